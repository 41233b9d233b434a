#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "grmkit/covariance.hpp"
#include "grmkit/eigs.hpp"
#include "grmkit/errors.hpp"
#include "grmkit/panel.hpp"
#include "grmkit/precision.hpp"

namespace grmkit {

enum class GraphSource { glasso, concord, pca_threshold };

inline std::string graph_source_name(GraphSource s) {
  switch (s) {
    case GraphSource::glasso: return "glasso";
    case GraphSource::concord: return "concord";
    case GraphSource::pca_threshold: return "pca_threshold";
  }
  return "unknown";
}

struct GraphEdge {
  Index i = 0;
  Index j = 0;  // i < j
  double rho = 0.0;
};

struct PartialCorrelationGraph {
  std::vector<std::string> asset_ids;
  std::vector<GraphEdge> edges;  // sorted by (i, j), no duplicates or loops
  GraphSource source = GraphSource::glasso;

  Index vertex_count() const { return static_cast<Index>(asset_ids.size()); }
};

struct CommunityPartition {
  std::vector<std::string> asset_ids;
  std::vector<int> labels;  // community ids in [1, k]
  int k = 0;
  std::vector<std::pair<int, int>> merge_trace;  // representative vertex pairs
};

struct SectorRatioMatrix {
  std::vector<std::string> group_labels;
  Matrix phi;         // log((C+ + 1) / (C- + 1))
  Matrix phi_scaled;  // phi / max(phi) when any phi > 0, else phi
  Eigen::MatrixXi counts_pos;
  Eigen::MatrixXi counts_neg;
};

// P = -D^1/2 Omega D^1/2 off the diagonal; the diagonal (which the formula
// sends to -1) is zeroed for graph use.
inline Matrix partial_correlation_matrix(const PrecisionEstimate& omega) {
  const Index p = omega.omega.rows();
  Vector inv_sqrt(p);
  for (Index i = 0; i < p; ++i) {
    require(omega.omega(i, i) > 0.0, errc::non_positive_diagonal,
            "omega diagonal must be positive at index " + std::to_string(i));
    inv_sqrt[i] = 1.0 / std::sqrt(omega.omega(i, i));
  }
  Matrix pcorr(p, p);
  for (Index i = 0; i < p; ++i) {
    pcorr(i, i) = 0.0;
    for (Index j = 0; j < i; ++j) {
      const double value = -omega.omega(i, j) * inv_sqrt[i] * inv_sqrt[j];
      pcorr(i, j) = pcorr(j, i) = value;
    }
  }
  return pcorr;
}

inline PartialCorrelationGraph graph_from_pcorr(const Matrix& pcorr,
                                                std::vector<std::string> ids,
                                                GraphSource source) {
  PartialCorrelationGraph g;
  g.asset_ids = std::move(ids);
  g.source = source;
  const Index p = pcorr.rows();
  for (Index i = 0; i < p; ++i)
    for (Index j = i + 1; j < p; ++j)
      if (pcorr(i, j) != 0.0) {
        require(std::abs(pcorr(i, j)) <= 1.0 + 1e-8, errc::invalid_argument,
                "partial correlation magnitude exceeds 1");
        g.edges.push_back({i, j, pcorr(i, j)});
      }
  return g;
}

inline PartialCorrelationGraph graph_from_precision(const PrecisionEstimate& omega,
                                                    GraphSource source) {
  return graph_from_pcorr(partial_correlation_matrix(omega), omega.asset_ids,
                          source);
}

// Hard-thresholded PCA comparison graph: plug-in precision
// (B Lambda B^T + diag residual)^-1, partial correlations, then bisection on
// the threshold until the surviving edge count is as close to target as the
// step function allows (ties resolve to the smallest threshold with
// count <= target).
inline PartialCorrelationGraph threshold_pca_graph(const CovarianceEstimate& cov,
                                                   Index k, long target_edges) {
  const Index p = cov.S.rows();
  require(k >= 1 && k < p, errc::invalid_argument,
          "component count k must satisfy 1 <= k < p");
  require(target_edges >= 0, errc::invalid_argument,
          "target edge count must be nonnegative");
  const long max_pairs = static_cast<long>(p) * (p - 1) / 2;
  require(target_edges <= max_pairs, errc::unreachable_target,
          "target " + std::to_string(target_edges) + " exceeds " +
              std::to_string(max_pairs) + " off-diagonal pairs");

  const auto eig = top_eigenpairs(cov.S, std::min(k + 1, p), 1e-10, 10000, k);
  for (Index i = 0; i + 1 < std::min(k + 1, p); ++i)
    require(eig.eigenvalues[i] - eig.eigenvalues[i + 1] >= 1e-12,
            errc::tied_eigenvalues,
            "eigenvalue gap below 1e-12 at cut " + std::to_string(i + 1));
  const Matrix b = eig.vectors.leftCols(k);
  const Matrix low_rank =
      b * eig.eigenvalues.head(k).asDiagonal() * b.transpose();
  Matrix sigma_plugin = low_rank;
  sigma_plugin.diagonal() += (cov.S - low_rank).diagonal();

  Eigen::LLT<Matrix> llt(sigma_plugin);
  require(llt.info() == Eigen::Success && llt.rcond() > 1e-14,
          errc::singular_input, "PCA plug-in covariance is singular");
  PrecisionEstimate plugin;
  plugin.asset_ids = cov.asset_ids;
  plugin.method = Method::pca_plugin;
  plugin.omega = llt.solve(Matrix::Identity(p, p));
  plugin.omega = ((plugin.omega + plugin.omega.transpose()) * 0.5).eval();

  const Matrix pcorr = partial_correlation_matrix(plugin);
  auto count_above = [&](double gamma) {
    long c = 0;
    for (Index i = 0; i < p; ++i)
      for (Index j = i + 1; j < p; ++j)
        if (std::abs(pcorr(i, j)) > gamma) ++c;
    return c;
  };

  double lo = 0.0, hi = 1.0;
  while (hi - lo > 1e-12) {
    const double mid = 0.5 * (lo + hi);
    if (count_above(mid) > target_edges)
      lo = mid;
    else
      hi = mid;
  }
  const long count_hi = count_above(hi);
  const long count_lo = count_above(lo);
  const double gamma =
      (std::abs(count_hi - target_edges) <= std::abs(count_lo - target_edges))
          ? hi
          : lo;

  Matrix thresholded = pcorr;
  for (Index i = 0; i < p; ++i)
    for (Index j = 0; j < p; ++j)
      if (std::abs(thresholded(i, j)) <= gamma) thresholded(i, j) = 0.0;
  return graph_from_pcorr(thresholded, cov.asset_ids, GraphSource::pca_threshold);
}

// Random-walk community detection on the unweighted sparsity pattern
// (Pons-Latapy). Vertex distances use rows of P^t with P = D^-1 A; communities
// merge greedily by the smallest variance increment, lowest-index pair first.
// Isolated vertices stay as their own communities.
inline CommunityPartition walktrap(const PartialCorrelationGraph& graph,
                                   int walk_length = 4, int k = 1) {
  const Index n = graph.vertex_count();
  require(n > 0, errc::empty_graph, "graph has no vertices");
  require(walk_length >= 1, errc::invalid_argument, "walk length must be >= 1");
  require(k >= 1, errc::invalid_argument, "community count must be >= 1");

  std::vector<std::set<int>> adjacency(n);
  for (const auto& e : graph.edges) {
    adjacency[e.i].insert(static_cast<int>(e.j));
    adjacency[e.j].insert(static_cast<int>(e.i));
  }
  std::vector<int> walkers;  // non-isolated vertices
  std::vector<Index> col_of(n, -1);
  for (Index v = 0; v < n; ++v)
    if (!adjacency[v].empty()) {
      col_of[v] = static_cast<Index>(walkers.size());
      walkers.push_back(static_cast<int>(v));
    }
  const Index q = static_cast<Index>(walkers.size());

  Matrix walk_probs;  // row r: t-step distribution started at walkers[r]
  Vector degree(q);
  if (q > 0) {
    Matrix transition = Matrix::Zero(q, q);
    for (Index r = 0; r < q; ++r) {
      const int v = walkers[r];
      degree[r] = static_cast<double>(adjacency[v].size());
      for (int u : adjacency[v]) transition(r, col_of[u]) = 1.0 / degree[r];
    }
    walk_probs = transition;
    for (int t = 1; t < walk_length; ++t) walk_probs = walk_probs * transition;
  }

  struct Community {
    std::vector<int> members;
    int repr = 0;  // smallest member index
    Vector probs;  // mean walk distribution over members
    std::set<int> neighbors;
    bool alive = true;
  };
  std::vector<Community> comms(n);
  std::vector<int> comm_of(n);
  for (Index v = 0; v < n; ++v) {
    comms[v].members = {static_cast<int>(v)};
    comms[v].repr = static_cast<int>(v);
    if (col_of[v] >= 0) comms[v].probs = walk_probs.row(col_of[v]);
    for (int u : adjacency[v]) comms[v].neighbors.insert(u);
    comm_of[v] = static_cast<int>(v);
  }

  auto merge_cost = [&](int a, int b) {
    // (1/n) |Ca||Cb|/(|Ca|+|Cb|) * sum_k (Pa_k - Pb_k)^2 / d(k)
    const double sa = static_cast<double>(comms[a].members.size());
    const double sb = static_cast<double>(comms[b].members.size());
    double dist = 0.0;
    for (Index c = 0; c < q; ++c) {
      const double diff = comms[a].probs[c] - comms[b].probs[c];
      dist += diff * diff / degree[c];
    }
    return sa * sb / (sa + sb) * dist / static_cast<double>(n);
  };

  std::map<std::pair<int, int>, double> candidates;
  auto pair_key = [&](int a, int b) {
    return std::make_pair(std::min(comms[a].repr, comms[b].repr),
                          std::max(comms[a].repr, comms[b].repr));
  };
  std::map<std::pair<int, int>, std::pair<int, int>> key_to_comms;
  auto add_candidate = [&](int a, int b) {
    const auto key = pair_key(a, b);
    candidates[key] = merge_cost(a, b);
    key_to_comms[key] = {a, b};
  };
  for (Index v = 0; v < n; ++v)
    for (int u : adjacency[v])
      if (static_cast<int>(v) < u) add_candidate(static_cast<int>(v), u);

  std::vector<std::pair<int, int>> trace;
  while (!candidates.empty()) {
    auto best = candidates.begin();
    for (auto it = std::next(candidates.begin()); it != candidates.end(); ++it)
      if (it->second < best->second) best = it;  // ties keep the earlier key
    const auto [ca, cb] = key_to_comms[best->first];
    trace.push_back(best->first);

    const int keep = comms[ca].repr <= comms[cb].repr ? ca : cb;
    const int drop = keep == ca ? cb : ca;
    // drop stale candidate entries touching either community
    for (auto it = candidates.begin(); it != candidates.end();) {
      const auto [x, y] = key_to_comms[it->first];
      if (x == ca || x == cb || y == ca || y == cb) {
        key_to_comms.erase(it->first);
        it = candidates.erase(it);
      } else {
        ++it;
      }
    }

    const double sk = static_cast<double>(comms[keep].members.size());
    const double sd = static_cast<double>(comms[drop].members.size());
    comms[keep].probs =
        (sk * comms[keep].probs + sd * comms[drop].probs) / (sk + sd);
    for (int m : comms[drop].members) {
      comms[keep].members.push_back(m);
      comm_of[m] = keep;
    }
    for (int nb : comms[drop].neighbors) comms[keep].neighbors.insert(nb);
    comms[drop].alive = false;

    std::set<int> adjacent;
    for (int nb : comms[keep].neighbors) {
      const int cn = comm_of[nb];
      if (cn != keep && comms[cn].alive) adjacent.insert(cn);
    }
    for (int cn : adjacent) add_candidate(keep, cn);
  }

  // cut the dendrogram: replay the first n - k merges (all of them if the
  // component structure cannot reach k)
  std::vector<int> parent(n);
  for (Index v = 0; v < n; ++v) parent[v] = static_cast<int>(v);
  std::function<int(int)> find = [&](int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  const long wanted_merges = std::max<long>(0, static_cast<long>(n) - k);
  const long applied =
      std::min<long>(wanted_merges, static_cast<long>(trace.size()));
  for (long t = 0; t < applied; ++t) {
    const auto [a, b] = trace[t];
    const int ra = find(a);
    const int rb = find(b);
    const int root = std::min(ra, rb);
    parent[ra] = root;
    parent[rb] = root;
  }

  CommunityPartition part;
  part.asset_ids = graph.asset_ids;
  part.merge_trace = trace;
  part.labels.resize(n);
  std::map<int, int> label_of_root;  // roots visited in vertex order
  for (Index v = 0; v < n; ++v) {
    const int root = find(static_cast<int>(v));
    auto [it, inserted] =
        label_of_root.emplace(root, static_cast<int>(label_of_root.size()) + 1);
    part.labels[v] = it->second;
  }
  part.k = static_cast<int>(label_of_root.size());
  return part;
}

struct Grouping {
  std::vector<std::string> labels;
  std::vector<int> assignment;  // vertex -> index into labels
};

inline Grouping group_by_sectors(const PartialCorrelationGraph& graph,
                                 const SectorMap& sectors) {
  Grouping g;
  std::map<std::string, int> label_index;
  g.assignment.reserve(graph.asset_ids.size());
  std::set<std::string> distinct;
  for (const auto& id : graph.asset_ids) {
    const auto it = sectors.entries.find(id);
    require(it != sectors.entries.end(), errc::uncovered_vertex,
            "no sector label for symbol '" + id + "'");
    distinct.insert(it->second);
  }
  g.labels.assign(distinct.begin(), distinct.end());
  for (std::size_t l = 0; l < g.labels.size(); ++l)
    label_index[g.labels[l]] = static_cast<int>(l);
  for (const auto& id : graph.asset_ids)
    g.assignment.push_back(label_index[sectors.entries.at(id)]);
  return g;
}

inline Grouping group_by_communities(const CommunityPartition& part) {
  Grouping g;
  for (int c = 1; c <= part.k; ++c) g.labels.push_back(std::to_string(c));
  g.assignment.reserve(part.labels.size());
  for (int label : part.labels) g.assignment.push_back(label - 1);
  return g;
}

// C+/C- count positive/negative edges per unordered group pair (each edge
// counted once); phi_ij = log((C+_ij + 1) / (C-_ij + 1)).
inline SectorRatioMatrix ratio_matrix(const PartialCorrelationGraph& graph,
                                      const Grouping& grouping) {
  require(grouping.assignment.size() == graph.asset_ids.size(),
          errc::uncovered_vertex, "grouping does not cover every vertex");
  const int m = static_cast<int>(grouping.labels.size());
  SectorRatioMatrix ratio;
  ratio.group_labels = grouping.labels;
  ratio.counts_pos = Eigen::MatrixXi::Zero(m, m);
  ratio.counts_neg = Eigen::MatrixXi::Zero(m, m);
  for (const auto& e : graph.edges) {
    const int a = std::min(grouping.assignment[e.i], grouping.assignment[e.j]);
    const int b = std::max(grouping.assignment[e.i], grouping.assignment[e.j]);
    if (e.rho > 0.0) {
      ratio.counts_pos(a, b) += 1;
      if (a != b) ratio.counts_pos(b, a) += 1;
    } else {
      ratio.counts_neg(a, b) += 1;
      if (a != b) ratio.counts_neg(b, a) += 1;
    }
  }
  ratio.phi.resize(m, m);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j)
      ratio.phi(i, j) = std::log((ratio.counts_pos(i, j) + 1.0) /
                                 (ratio.counts_neg(i, j) + 1.0));
  const double max_phi = m > 0 ? ratio.phi.maxCoeff() : 0.0;
  ratio.phi_scaled = max_phi > 0.0 ? (ratio.phi / max_phi).eval() : ratio.phi;
  return ratio;
}

}  // namespace grmkit
