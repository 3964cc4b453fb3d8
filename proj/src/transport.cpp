#include "wbary/transport.hpp"

#include <algorithm>

#include "wbary/lp.hpp"

namespace wbary {

namespace {
constexpr double kPlanPruneThreshold = 1e-12;
}

std::vector<double> TransportPlan::source_marginal(std::size_t n_source) const {
  std::vector<double> out(n_source, 0.0);
  for (const auto& e : entries) out[e.source] += e.mass;
  return out;
}

std::vector<double> TransportPlan::target_marginal(std::size_t n_target) const {
  std::vector<double> out(n_target, 0.0);
  for (const auto& e : entries) out[e.target] += e.mass;
  return out;
}

CostMatrix cost_matrix(const DiscreteMeasure& a, const DiscreteMeasure& b) {
  if (a.dim() != b.dim()) {
    throw InvalidInput("cost_matrix: dimension mismatch (" + std::to_string(a.dim()) + " vs " +
                       std::to_string(b.dim()) + ")");
  }
  CostMatrix c{a.size(), b.size(), std::vector<double>(a.size() * b.size())};
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t j = 0; j < b.size(); ++j) c.values[i * c.cols + j] = squared_distance(a.atom(i), b.atom(j));
  }
  return c;
}

W2Result w2_squared(const DiscreteMeasure& a, const DiscreteMeasure& b) {
  const CostMatrix cost = cost_matrix(a, b);
  const std::size_t na = a.size();
  const std::size_t nb = b.size();

  std::vector<double> rhs(a.masses());
  rhs.insert(rhs.end(), b.masses().begin(), b.masses().end());
  lp::LinearProgram prog(std::move(rhs));
  const double ones[2] = {1.0, 1.0};
  for (std::size_t i = 0; i < na; ++i) {
    for (std::size_t j = 0; j < nb; ++j) {
      const int rows[2] = {static_cast<int>(i), static_cast<int>(na + j)};
      prog.add_column(cost(i, j), rows, ones);
    }
  }
  // Ground truth for audits: tighter than the default reduced-cost tolerance.
  lp::LpOptions opt;
  opt.optimality_tol = 1e-9;
  const lp::LpSolution sol = lp::solve_lp(prog, opt);
  if (sol.status != lp::LpStatus::kOptimal) {
    throw lp::LpError("transportation LP ended with status " + lp::to_string(sol.status));
  }

  W2Result out;
  out.value = std::max(0.0, sol.objective);
  for (std::size_t i = 0; i < na; ++i) {
    for (std::size_t j = 0; j < nb; ++j) {
      const double mass = sol.primal[i * nb + j];
      if (mass >= kPlanPruneThreshold) out.plan.entries.push_back({i, j, mass});
    }
  }
  return out;
}

double eval_objective(const BarycenterInstance& inst, const DiscreteMeasure& mu) {
  if (mu.dim() != inst.dim()) throw InvalidInput("eval_objective: dimension mismatch");
  double total = 0.0;
  for (std::size_t i = 0; i < inst.k(); ++i) {
    if (inst.weight(i) == 0.0) continue;
    total += inst.weight(i) * w2_squared(mu, inst.measure(i)).value;
  }
  return total;
}

}  // namespace wbary
