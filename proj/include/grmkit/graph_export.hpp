#pragma once

#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>

#include "grmkit/errors.hpp"
#include "grmkit/graph.hpp"

#include <json.hpp>

namespace grmkit {

enum class GraphFormat { graphml, dot, json };

namespace detail {

inline std::string fmt_double(double v) {
  std::ostringstream out;
  out << std::setprecision(17) << v;
  return out.str();
}

inline std::string xml_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

}  // namespace detail

// Edges carry weight, sign color (blue positive / red negative) and a width
// proportional to |rho|; vertex labels are attached when provided. Output is
// deterministic: vertices in id order, edges sorted by (i, j).
inline void export_graph(const PartialCorrelationGraph& graph,
                         const std::string& path, GraphFormat format,
                         const CommunityPartition* partition = nullptr,
                         const SectorMap* sectors = nullptr) {
  if (partition)
    require(partition->asset_ids == graph.asset_ids, errc::dimension_mismatch,
            "partition covers a different asset set");
  std::ofstream out(path);
  require(out.good(), errc::io_failure, "cannot write " + path);

  auto sector_of = [&](const std::string& id) -> std::string {
    if (!sectors) return "";
    const auto it = sectors->entries.find(id);
    return it == sectors->entries.end() ? "" : it->second;
  };

  switch (format) {
    case GraphFormat::graphml: {
      out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
          << "<graphml xmlns=\"http://graphml.graphdrawing.org/xmlns\">\n"
          << "  <key id=\"weight\" for=\"edge\" attr.name=\"weight\" attr.type=\"double\"/>\n"
          << "  <key id=\"sign\" for=\"edge\" attr.name=\"sign\" attr.type=\"string\"/>\n"
          << "  <key id=\"width\" for=\"edge\" attr.name=\"width\" attr.type=\"double\"/>\n"
          << "  <key id=\"community\" for=\"node\" attr.name=\"community\" attr.type=\"int\"/>\n"
          << "  <key id=\"sector\" for=\"node\" attr.name=\"sector\" attr.type=\"string\"/>\n"
          << "  <graph id=\"grm\" edgedefault=\"undirected\">\n";
      for (Index v = 0; v < graph.vertex_count(); ++v) {
        out << "    <node id=\"" << detail::xml_escape(graph.asset_ids[v]) << "\">";
        if (partition) out << "<data key=\"community\">" << partition->labels[v]
                           << "</data>";
        const std::string sec = sector_of(graph.asset_ids[v]);
        if (!sec.empty())
          out << "<data key=\"sector\">" << detail::xml_escape(sec) << "</data>";
        out << "</node>\n";
      }
      for (const auto& e : graph.edges) {
        out << "    <edge source=\"" << detail::xml_escape(graph.asset_ids[e.i])
            << "\" target=\"" << detail::xml_escape(graph.asset_ids[e.j]) << "\">"
            << "<data key=\"weight\">" << detail::fmt_double(e.rho) << "</data>"
            << "<data key=\"sign\">" << (e.rho > 0 ? "blue" : "red") << "</data>"
            << "<data key=\"width\">" << detail::fmt_double(std::abs(e.rho))
            << "</data></edge>\n";
      }
      out << "  </graph>\n</graphml>\n";
      break;
    }
    case GraphFormat::dot: {
      out << "graph grm {\n";
      for (Index v = 0; v < graph.vertex_count(); ++v) {
        out << "  \"" << graph.asset_ids[v] << "\"";
        std::string attrs;
        if (partition)
          attrs += "community=" + std::to_string(partition->labels[v]);
        const std::string sec = sector_of(graph.asset_ids[v]);
        if (!sec.empty())
          attrs += std::string(attrs.empty() ? "" : ", ") + "sector=\"" + sec + "\"";
        if (!attrs.empty()) out << " [" << attrs << "]";
        out << ";\n";
      }
      for (const auto& e : graph.edges)
        out << "  \"" << graph.asset_ids[e.i] << "\" -- \""
            << graph.asset_ids[e.j] << "\" [weight="
            << detail::fmt_double(e.rho) << ", color="
            << (e.rho > 0 ? "blue" : "red")
            << ", penwidth=" << detail::fmt_double(std::abs(e.rho)) << "];\n";
      out << "}\n";
      break;
    }
    case GraphFormat::json: {
      nlohmann::ordered_json j;
      j["source"] = graph_source_name(graph.source);
      j["assets"] = graph.asset_ids;
      if (partition) j["community"] = partition->labels;
      if (sectors) {
        std::vector<std::string> labels;
        for (const auto& id : graph.asset_ids) labels.push_back(sector_of(id));
        j["sector"] = labels;
      }
      auto edges = nlohmann::ordered_json::array();
      for (const auto& e : graph.edges) {
        nlohmann::ordered_json edge;
        edge["i"] = e.i;
        edge["j"] = e.j;
        edge["weight"] = e.rho;
        edge["sign"] = e.rho > 0 ? "blue" : "red";
        edges.push_back(edge);
      }
      j["edges"] = std::move(edges);
      out << j.dump(2) << "\n";
      break;
    }
  }
  require(out.good(), errc::io_failure, "write failed for " + path);
}

inline PartialCorrelationGraph import_graph_json(const std::string& path) {
  std::ifstream in(path);
  require(in.good(), errc::io_failure, "cannot open " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    fail(errc::io_failure, "malformed graph JSON in " + path + ": " + e.what());
  }
  PartialCorrelationGraph g;
  g.asset_ids = j.at("assets").get<std::vector<std::string>>();
  const std::string source = j.at("source").get<std::string>();
  if (source == "glasso")
    g.source = GraphSource::glasso;
  else if (source == "concord")
    g.source = GraphSource::concord;
  else
    g.source = GraphSource::pca_threshold;
  for (const auto& edge : j.at("edges")) {
    GraphEdge e;
    e.i = edge.at("i").get<Index>();
    e.j = edge.at("j").get<Index>();
    e.rho = edge.at("weight").get<double>();
    require(e.i >= 0 && e.j > e.i && e.j < g.vertex_count(), errc::io_failure,
            "edge endpoints out of range in " + path);
    g.edges.push_back(e);
  }
  return g;
}

}  // namespace grmkit
