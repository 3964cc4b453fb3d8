#pragma once

#include <cstddef>
#include <string>

#include "wbary/candidates.hpp"
#include "wbary/core.hpp"
#include "wbary/solver.hpp"

namespace wbary {

/// Exact barycenter of a tiny instance from the full multi-marginal LP.
struct ExactResult {
  double value = 0.0;
  DiscreteMeasure barycenter;
  TuplePlan plan;
  std::size_t tuples_enumerated = 0;
  /// S*: the weighted means of all tuples (the barycenter lives on these).
  CandidateSupport support;
};

inline constexpr std::size_t kExactTupleGuard = 100'000;

/// Enumerates every tuple with its closed-form cost and solves the MOT LP.
/// Throws GuardExceeded when the tuple count exceeds max_tuples.
ExactResult solve_exact(const BarycenterInstance& inst, std::size_t max_tuples = kExactTupleGuard);

enum class BoundKind { kGeneral, kEqual };
std::string to_string(BoundKind b);

/// Approximation factor of the t-th candidate construction:
/// general weights 1 + 1/t, equal weights 1 + (k - t) / (t (k - 1)).
double ratio_bound(BoundKind kind, std::size_t k, std::size_t t);

}  // namespace wbary
