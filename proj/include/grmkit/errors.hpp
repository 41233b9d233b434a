#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace grmkit {

// Every failure mode surfaced by the library. Codes are stable identifiers;
// messages carry the offending detail (path, index, lambda, ...).
enum class errc {
  invalid_argument,
  io_failure,
  // panel ingestion
  missing_value,
  duplicate_symbol,
  non_monotone_dates,
  empty_split,
  // covariance
  degenerate_sample,
  // solvers
  not_converged,
  singular_input,
  non_finite_objective,
  insufficient_data,
  // grm
  non_positive_diagonal,
  dimension_mismatch,
  empty_subset,
  full_subset,
  singular_block,
  // factor models
  singular_factor_gram,
  misalignment,
  tied_eigenvalues,
  singular_omega,
  zero_mean_eigenvector,
  missing_factors,
  // interaction models
  zero_distance,
  no_feasible_point,
  // evaluation
  shape_mismatch,
  zero_residual,
  constant_row,
  insufficient_history,
  unknown_kind,
  // beta analytics
  zero_vector,
  zero_mean,
  zero_beta,
  // graph
  unreachable_target,
  empty_graph,
  uncovered_vertex,
  // synthetic markets
  not_positive_definite,
  degenerate_market,
  singular_submatrix,
};

inline std::string_view errc_name(errc c) {
  switch (c) {
    case errc::invalid_argument: return "InvalidArgument";
    case errc::io_failure: return "IoFailure";
    case errc::missing_value: return "MissingValue";
    case errc::duplicate_symbol: return "DuplicateSymbol";
    case errc::non_monotone_dates: return "NonMonotoneDates";
    case errc::empty_split: return "EmptySplit";
    case errc::degenerate_sample: return "DegenerateSample";
    case errc::not_converged: return "NotConverged";
    case errc::singular_input: return "SingularInput";
    case errc::non_finite_objective: return "NonFiniteObjective";
    case errc::insufficient_data: return "InsufficientData";
    case errc::non_positive_diagonal: return "NonPositiveDiagonal";
    case errc::dimension_mismatch: return "DimensionMismatch";
    case errc::empty_subset: return "EmptySubset";
    case errc::full_subset: return "FullSubset";
    case errc::singular_block: return "SingularBlock";
    case errc::singular_factor_gram: return "SingularFactorGram";
    case errc::misalignment: return "Misalignment";
    case errc::tied_eigenvalues: return "TiedEigenvalues";
    case errc::singular_omega: return "SingularOmega";
    case errc::zero_mean_eigenvector: return "ZeroMeanEigenvector";
    case errc::missing_factors: return "MissingFactors";
    case errc::zero_distance: return "ZeroDistance";
    case errc::no_feasible_point: return "NoFeasiblePoint";
    case errc::shape_mismatch: return "ShapeMismatch";
    case errc::zero_residual: return "ZeroResidual";
    case errc::constant_row: return "ConstantRow";
    case errc::insufficient_history: return "InsufficientHistory";
    case errc::unknown_kind: return "UnknownKind";
    case errc::zero_vector: return "ZeroVector";
    case errc::zero_mean: return "ZeroMean";
    case errc::zero_beta: return "ZeroBeta";
    case errc::unreachable_target: return "UnreachableTarget";
    case errc::empty_graph: return "EmptyGraph";
    case errc::uncovered_vertex: return "UncoveredVertex";
    case errc::not_positive_definite: return "NotPositiveDefinite";
    case errc::degenerate_market: return "DegenerateMarket";
    case errc::singular_submatrix: return "SingularSubmatrix";
  }
  return "Unknown";
}

class Error : public std::runtime_error {
 public:
  Error(errc code, const std::string& what)
      : std::runtime_error(std::string(errc_name(code)) + ": " + what),
        code_(code) {}

  errc code() const noexcept { return code_; }

 private:
  errc code_;
};

[[noreturn]] inline void fail(errc code, const std::string& what) {
  throw Error(code, what);
}

inline void require(bool cond, errc code, const std::string& what) {
  if (!cond) fail(code, what);
}

}  // namespace grmkit
