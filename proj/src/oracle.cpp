#include "wbary/oracle.hpp"

#include <algorithm>

#include "wbary/lp.hpp"

namespace wbary {

ExactResult solve_exact(const BarycenterInstance& inst, std::size_t max_tuples) {
  const std::size_t count = inst.tuple_count();
  if (count > max_tuples) {
    throw GuardExceeded("exact oracle needs " + std::to_string(count) +
                        " tuples, above the guard of " + std::to_string(max_tuples));
  }
  const std::size_t k = inst.k();
  std::vector<std::size_t> sizes(k), offset(k + 1, 0);
  for (std::size_t i = 0; i < k; ++i) {
    sizes[i] = inst.measure(i).size();
    offset[i + 1] = offset[i] + sizes[i];
  }
  std::vector<double> rhs;
  for (const auto& m : inst.measures()) rhs.insert(rhs.end(), m.masses().begin(), m.masses().end());
  lp::LinearProgram prog(std::move(rhs));

  std::vector<TupleIndex> tuples;
  tuples.reserve(count);
  std::vector<int> rows(k);
  const std::vector<double> ones(k, 1.0);
  for_each_tuple(sizes, [&](const TupleIndex& tuple) {
    // Closed form: the weighted mean is the unconstrained minimizer.
    const double cost = fit_point(tuple_points(inst, tuple), inst.weights()).cost;
    for (std::size_t i = 0; i < k; ++i) rows[i] = static_cast<int>(offset[i] + tuple[i]);
    prog.add_column(cost, rows, ones);
    tuples.push_back(tuple);
  });

  // Ground truth for audits: tighter than the default reduced-cost tolerance.
  lp::LpOptions opt;
  opt.optimality_tol = 1e-9;
  const lp::LpSolution sol = lp::solve_lp(prog, opt);
  if (sol.status != lp::LpStatus::kOptimal) {
    throw lp::LpError("exact MOT LP ended with status " + lp::to_string(sol.status));
  }
  TuplePlan plan;
  for (std::size_t c = 0; c < tuples.size(); ++c) {
    if (sol.primal[c] > 0.0) plan.entries.emplace_back(tuples[c], sol.primal[c]);
  }
  SupportGuard guard;
  guard.max_atoms = std::max(guard.max_atoms, max_tuples);
  CandidateSupport support = build_exact_support(inst, guard);
  Recovery rec = recover_barycenter(inst, support.atoms, plan);
  return ExactResult{std::max(0.0, sol.objective), std::move(rec.measure), std::move(plan), count,
                     std::move(support)};
}

std::string to_string(BoundKind b) { return b == BoundKind::kGeneral ? "general" : "equal"; }

double ratio_bound(BoundKind kind, std::size_t k, std::size_t t) {
  if (t < 1 || t > k) {
    throw InvalidInput("ratio_bound needs 1 <= t <= k (t=" + std::to_string(t) +
                       ", k=" + std::to_string(k) + ")");
  }
  const double td = static_cast<double>(t);
  if (kind == BoundKind::kGeneral) return 1.0 + 1.0 / td;
  if (k == 1) return 1.0;
  const double kd = static_cast<double>(k);
  return 1.0 + (kd - td) / (td * (kd - 1.0));
}

}  // namespace wbary
