#pragma once

#include <cstddef>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "wbary/candidates.hpp"
#include "wbary/core.hpp"
#include "wbary/lp.hpp"
#include "wbary/transport.hpp"

namespace wbary {

/// Dual multipliers gamma_{ij} of the MOT marginal constraints.
struct DualVector {
  std::vector<std::vector<double>> gamma;  // gamma[i][j]

  static DualVector zeros(const BarycenterInstance& inst);
  double objective(const BarycenterInstance& inst) const;  // sum_ij p_ij gamma_ij
};

struct OracleResult {
  TupleIndex tuple;
  std::size_t atom = 0;
  /// min over (tuple, atom) of sum_i lambda_i |w - x_{i j_i}|^2 - gamma_{i j_i}.
  double violation = 0.0;

  /// gamma is feasible for the restricted dual iff violation >= -1e-9.
  bool feasible() const { return violation >= -1e-9; }
};

/// Most violated restricted-dual constraint. Decomposes per atom: for each w_l
/// every measure picks its cheapest atom independently (lowest j on ties), then
/// the cheapest atom l wins (lowest l on ties). O(k n |S| d).
OracleResult separation_oracle(const BarycenterInstance& inst, const PointSet& support,
                               const DualVector& gamma);

/// Sparse k-way coupling Pi over index tuples.
struct TuplePlan {
  std::vector<std::pair<TupleIndex, double>> entries;
};

/// C_j(S) with its argmin atom (lowest index on ties).
std::pair<double, std::size_t> tuple_cost(const BarycenterInstance& inst, const PointSet& support,
                                          const TupleIndex& tuple);

struct Recovery {
  DiscreteMeasure measure;
  /// Index into the candidate support of every atom of `measure`.
  std::vector<std::size_t> support_index;
  /// plans[i]: coupling between `measure` (source) and input measure i (target).
  std::vector<TransportPlan> plans;
};

/// Pushes each tuple's mass onto its best-fitting candidate atom and
/// aggregates. Throws InvalidInput when the plan misses a marginal by > 1e-9.
Recovery recover_barycenter(const BarycenterInstance& inst, const PointSet& support,
                            const TuplePlan& plan);

enum class SolveMode { kAuto, kCompact, kColgen };
std::string to_string(SolveMode m);
SolveMode parse_solve_mode(const std::string& s);

enum class Termination { kOptimal, kTimeLimit, kIterationLimit };
std::string to_string(Termination t);

struct SolverLimits {
  double time_limit_seconds = std::numeric_limits<double>::infinity();
  std::size_t max_iterations = 1'000'000;        // column-generation rounds
  std::size_t max_compact_variables = 2'000'000;  // compact LP guard
  /// kAuto uses the compact LP up to this size and column generation beyond;
  /// colgen is much faster on large degenerate supports.
  std::size_t auto_compact_variables = 250'000;
  std::size_t max_lp_pivots = 1'000'000;
  /// The barycenter LPs are highly degenerate; Devex needs far fewer pivots.
  lp::Pricing pricing = lp::Pricing::kDevex;
  /// Reduced-cost tolerance of the barycenter LPs, and the relative oracle
  /// violation at which column generation stops. Candidate atoms can sit very
  /// close together, so a looser value leaves measurable objective on the table.
  double optimality_tol = 1e-9;
  /// Columns added per pricing round: the most violated tuple first, then the
  /// best tuple of every other violated atom in order of violation.
  std::size_t columns_per_round = std::numeric_limits<std::size_t>::max();
};

struct SolverDiagnostics {
  SolveMode mode = SolveMode::kCompact;
  std::size_t iterations = 0;     // master LP solves
  std::size_t pricing_calls = 0;  // separation oracle calls
  std::size_t lp_pivots = 0;
  std::size_t columns = 0;        // LP columns at termination
  double wall_seconds = 0.0;
  Termination termination = Termination::kOptimal;
  /// Certified lower bound on v(S); equals value when optimal.
  double lower_bound = 0.0;
  /// Master objective after every solve (column generation only).
  std::vector<double> value_history;
};

struct BarycenterSolution {
  DiscreteMeasure measure;
  std::vector<std::size_t> support_index;
  /// v(S) when optimal, otherwise the incumbent's restricted objective.
  double value = 0.0;
  std::vector<TransportPlan> plans;
  TuplePlan tuple_plan;  // filled by column generation
  SolverDiagnostics diagnostics;
};

BarycenterSolution solve_restricted_colgen(const BarycenterInstance& inst, const PointSet& support,
                                           const SolverLimits& limits = {});
BarycenterSolution solve_fixed_support_lp(const BarycenterInstance& inst, const PointSet& support,
                                          const SolverLimits& limits = {});
/// Variables of the compact LP for this support.
std::size_t compact_variable_count(const BarycenterInstance& inst, std::size_t support_size);
/// kAuto picks the compact LP when it fits both compact-size limits.
BarycenterSolution solve_restricted(const BarycenterInstance& inst, const PointSet& support,
                                    SolveMode mode = SolveMode::kAuto,
                                    const SolverLimits& limits = {});

/// Hybrid expansion around the active atoms of a previous solution.
CandidateSupport hybrid_expand(const BarycenterInstance& inst, const BarycenterSolution& base,
                               std::size_t neighbors = 5, const SupportGuard& guard = {});

}  // namespace wbary
