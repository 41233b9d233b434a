#include <grmkit/panel.hpp>

#include <gtest/gtest.h>

#include "test_util.hpp"

using grmkit::Error;
using grmkit::errc;

namespace {

const char* kSmallCsv =
    "date,AAA,BBB\n"
    "2008-01-02,0.01,-0.02\n"
    "2008-01-03,0.00,0.01\n"
    "2008-01-04,-0.01,0.03\n"
    "2008-01-07,0.02,-0.01\n";

TEST(LoadReturns, ParsesWideCsv) {
  const auto path = testutil::write_temp("returns_ok.csv", kSmallCsv);
  const auto panel = grmkit::load_returns(path);
  EXPECT_EQ(panel.p(), 2);
  EXPECT_EQ(panel.n(), 4);
  EXPECT_FALSE(panel.centered);
  EXPECT_EQ(panel.asset_ids[0], "AAA");
  EXPECT_EQ(panel.timestamps[3], "2008-01-07");
  EXPECT_DOUBLE_EQ(panel.values(1, 2), 0.03);
}

TEST(LoadReturns, DuplicateSymbolRejected) {
  const auto path = testutil::write_temp(
      "returns_dup.csv",
      "date,AAA,AAA\n2008-01-02,0.1,0.2\n2008-01-03,0.0,0.1\n");
  try {
    grmkit::load_returns(path);
    FAIL() << "expected DuplicateSymbol";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), errc::duplicate_symbol);
  }
}

TEST(LoadReturns, BlankCellRejected) {
  const auto path = testutil::write_temp(
      "returns_blank.csv",
      "date,AAA,BBB\n2008-01-02,0.1,\n2008-01-03,0.0,0.1\n");
  try {
    grmkit::load_returns(path);
    FAIL() << "expected MissingValue";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), errc::missing_value);
  }
}

TEST(LoadReturns, NonNumericCellRejected) {
  const auto path = testutil::write_temp(
      "returns_nan.csv",
      "date,AAA,BBB\n2008-01-02,0.1,x\n2008-01-03,0.0,0.1\n");
  EXPECT_THROW(grmkit::load_returns(path), Error);
}

TEST(LoadReturns, NonMonotoneDatesRejected) {
  const auto path = testutil::write_temp(
      "returns_dates.csv",
      "date,AAA,BBB\n2008-01-03,0.1,0.2\n2008-01-02,0.0,0.1\n");
  try {
    grmkit::load_returns(path);
    FAIL() << "expected NonMonotoneDates";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), errc::non_monotone_dates);
  }
}

TEST(LoadReturns, MissingFileNamesPath) {
  try {
    grmkit::load_returns("/tmp/grmkit_does_not_exist.csv");
    FAIL() << "expected IoFailure";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), errc::io_failure);
    EXPECT_NE(std::string(e.what()).find("grmkit_does_not_exist"),
              std::string::npos);
  }
}

TEST(Center, SubtractsRowMeans) {
  grmkit::Matrix values(1, 2);
  values << 1.0, 3.0;
  auto panel = testutil::panel_from_matrix(values);
  panel.asset_ids = {"A1"};
  const auto centered = grmkit::center(panel);
  EXPECT_DOUBLE_EQ(centered.values(0, 0), -1.0);
  EXPECT_DOUBLE_EQ(centered.values(0, 1), 1.0);
  EXPECT_TRUE(centered.centered);
}

TEST(Center, Idempotent) {
  grmkit::Matrix values(2, 3);
  values << 0.02, 0.00, -0.02, 0.05, -0.01, 0.02;
  const auto panel = testutil::panel_from_matrix(values);
  const auto once = grmkit::center(panel);
  const auto twice = grmkit::center(once);
  EXPECT_NEAR((once.values - twice.values).cwiseAbs().maxCoeff(), 0.0, 1e-16);
  // zero-mean row passes through unchanged
  EXPECT_NEAR((once.values.row(0) - values.row(0)).cwiseAbs().maxCoeff(), 0.0,
              1e-16);
}

TEST(Split, Table1CrisisCounts) {
  grmkit::Matrix values = grmkit::Matrix::Zero(2, 126);
  grmkit::ReturnsPanel panel;
  panel.values = values;
  panel.asset_ids = {"A1", "A2"};
  for (int j = 0; j < 126; ++j) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "2008-%02d-%02d", j / 28 + 1, j % 28 + 1);
    panel.timestamps.emplace_back(buf);
  }
  const auto [in_panel, out_panel] = grmkit::split(panel, panel.timestamps[60]);
  EXPECT_EQ(in_panel.n(), 61);
  EXPECT_EQ(out_panel.n(), 65);
  EXPECT_EQ(in_panel.timestamps.back(), panel.timestamps[60]);
  EXPECT_EQ(out_panel.timestamps.front(), panel.timestamps[61]);
}

TEST(Split, PreservesColumnsInOrder) {
  grmkit::Matrix values(2, 10);
  for (int j = 0; j < 10; ++j) {
    values(0, j) = j;
    values(1, j) = -j;
  }
  const auto panel = testutil::panel_from_matrix(values);
  const auto [a, b] = grmkit::split(panel, panel.timestamps[4]);
  EXPECT_EQ(a.n(), 5);
  EXPECT_EQ(b.n(), 5);
  grmkit::Matrix glued(2, 10);
  glued << a.values, b.values;
  EXPECT_EQ((glued - panel.values).cwiseAbs().maxCoeff(), 0.0);
}

TEST(Split, BoundaryBeforeFirstDateIsEmptySplit) {
  grmkit::Matrix values = grmkit::Matrix::Zero(2, 6);
  const auto panel = testutil::panel_from_matrix(values);
  try {
    grmkit::split(panel, "1999-01-01");
    FAIL() << "expected EmptySplit";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), errc::empty_split);
  }
}

TEST(Sectors, LoadsAndRejectsDuplicates) {
  const auto path = testutil::write_temp("sectors.csv",
                                         "symbol,sector\nAAA,Tech\nBBB,Energy\n");
  const auto sectors = grmkit::load_sectors(path);
  EXPECT_EQ(sectors.entries.at("AAA"), "Tech");
  const auto dup = testutil::write_temp(
      "sectors_dup.csv", "symbol,sector\nAAA,Tech\nAAA,Energy\n");
  EXPECT_THROW(grmkit::load_sectors(dup), Error);
}

TEST(Distances, ValidatesSymmetryAndDiagonal) {
  const auto ok = testutil::write_temp(
      "dist_ok.csv", "symbol,AAA,BBB\nAAA,0,10\nBBB,10,0\n");
  const auto dist = grmkit::load_distances(ok);
  EXPECT_DOUBLE_EQ(dist.d(0, 1), 10.0);

  const auto bad = testutil::write_temp(
      "dist_zero.csv", "symbol,AAA,BBB\nAAA,0,0\nBBB,0,0\n");
  try {
    grmkit::load_distances(bad);
    FAIL() << "expected ZeroDistance";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), errc::zero_distance);
  }
}

TEST(Factors, LoadAndCenterRows) {
  const auto path = testutil::write_temp(
      "factors.csv",
      "date,MKT,SMB\n2008-01-02,0.01,0.02\n2008-01-03,0.03,-0.02\n");
  auto factors = grmkit::load_factors(path);
  EXPECT_EQ(factors.k(), 2);
  factors = grmkit::center(factors);
  EXPECT_NEAR(factors.values.row(0).mean(), 0.0, 1e-16);
  EXPECT_NEAR(factors.values.row(1).mean(), 0.0, 1e-16);
}

}  // namespace
