#include "wbary/solver.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <map>
#include <numeric>
#include <set>

#include "wbary/lp.hpp"

namespace wbary {

namespace {

constexpr double kAtomPruneThreshold = 1e-12;
constexpr double kMarginalTolerance = 1e-9;

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

void check_support(const BarycenterInstance& inst, const PointSet& support) {
  if (support.empty()) throw InvalidInput("candidate support is empty");
  if (support.dim() != inst.dim()) {
    throw InvalidInput("candidate support has dimension " + std::to_string(support.dim()) +
                       ", instance has " + std::to_string(inst.dim()));
  }
}

std::vector<std::size_t> row_offsets(const BarycenterInstance& inst) {
  std::vector<std::size_t> offset(inst.k() + 1, 0);
  for (std::size_t i = 0; i < inst.k(); ++i) offset[i + 1] = offset[i] + inst.measure(i).size();
  return offset;
}

// Best tuple for every candidate atom; see separation_oracle.
struct AtomPrice {
  double value;
  std::size_t atom;
};

std::vector<AtomPrice> price_atoms(const BarycenterInstance& inst, const PointSet& support,
                                   const DualVector& gamma,
                                   std::vector<std::vector<std::uint32_t>>* choices) {
  const std::size_t k = inst.k();
  const std::size_t L = support.size();
  std::vector<AtomPrice> out(L);
  if (choices) choices->assign(L, std::vector<std::uint32_t>(k, 0));
  for (std::size_t l = 0; l < L; ++l) {
    const auto w = support[l];
    double total = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
      const DiscreteMeasure& m = inst.measure(i);
      const double lambda = inst.weight(i);
      double best = std::numeric_limits<double>::infinity();
      std::uint32_t best_j = 0;
      for (std::size_t j = 0; j < m.size(); ++j) {
        const double c = lambda * squared_distance(w, m.atom(j)) - gamma.gamma[i][j];
        if (c < best) {
          best = c;
          best_j = static_cast<std::uint32_t>(j);
        }
      }
      total += best;
      if (choices) (*choices)[l][i] = best_j;
    }
    out[l] = {total, l};
  }
  return out;
}

// Generalized northwest corner: one cursor per measure, emit the cursor tuple
// with the smallest remaining mass, advance exhausted cursors.
std::vector<std::pair<TupleIndex, double>> northwest_corner(const BarycenterInstance& inst) {
  const std::size_t k = inst.k();
  std::vector<std::size_t> cursor(k, 0);
  std::vector<double> remaining(k);
  for (std::size_t i = 0; i < k; ++i) remaining[i] = inst.measure(i).mass(0);
  std::vector<std::pair<TupleIndex, double>> tuples;
  auto current = [&] {
    TupleIndex t(k);
    for (std::size_t i = 0; i < k; ++i) {
      t[i] = static_cast<std::uint32_t>(std::min(cursor[i], inst.measure(i).size() - 1));
    }
    return t;
  };
  while (true) {
    bool done = false;
    for (std::size_t i = 0; i < k; ++i) done = done || cursor[i] >= inst.measure(i).size();
    if (done) break;
    const double mass = *std::min_element(remaining.begin(), remaining.end());
    tuples.emplace_back(current(), mass);
    for (std::size_t i = 0; i < k; ++i) {
      remaining[i] -= mass;
      if (remaining[i] <= 1e-15) {
        ++cursor[i];
        remaining[i] = cursor[i] < inst.measure(i).size() ? inst.measure(i).mass(cursor[i]) : 0.0;
      }
    }
  }
  // Rounding can leave trailing atoms uncovered; give each a column.
  for (std::size_t i = 0; i < k; ++i) {
    while (cursor[i] < inst.measure(i).size()) {
      TupleIndex t = current();
      t[i] = static_cast<std::uint32_t>(cursor[i]++);
      tuples.emplace_back(std::move(t), 0.0);
    }
  }
  return tuples;
}

struct Stopwatch {
  Clock::time_point start = Clock::now();
  double elapsed() const { return seconds_since(start); }
};

}  // namespace

DualVector DualVector::zeros(const BarycenterInstance& inst) {
  DualVector g;
  g.gamma.resize(inst.k());
  for (std::size_t i = 0; i < inst.k(); ++i) g.gamma[i].assign(inst.measure(i).size(), 0.0);
  return g;
}

double DualVector::objective(const BarycenterInstance& inst) const {
  double s = 0.0;
  for (std::size_t i = 0; i < inst.k(); ++i) {
    for (std::size_t j = 0; j < inst.measure(i).size(); ++j) s += inst.measure(i).mass(j) * gamma[i][j];
  }
  return s;
}

OracleResult separation_oracle(const BarycenterInstance& inst, const PointSet& support,
                               const DualVector& gamma) {
  check_support(inst, support);
  if (gamma.gamma.size() != inst.k()) throw InvalidInput("dual vector has wrong number of measures");
  for (std::size_t i = 0; i < inst.k(); ++i) {
    if (gamma.gamma[i].size() != inst.measure(i).size()) {
      throw InvalidInput("dual vector shape does not match measure " + std::to_string(i));
    }
  }
  std::vector<std::vector<std::uint32_t>> choices;
  const auto prices = price_atoms(inst, support, gamma, &choices);
  std::size_t best = 0;
  for (std::size_t l = 1; l < prices.size(); ++l) {
    if (prices[l].value < prices[best].value) best = l;
  }
  return OracleResult{choices[best], best, prices[best].value};
}

std::pair<double, std::size_t> tuple_cost(const BarycenterInstance& inst, const PointSet& support,
                                          const TupleIndex& tuple) {
  double best = std::numeric_limits<double>::infinity();
  std::size_t best_l = 0;
  for (std::size_t l = 0; l < support.size(); ++l) {
    double c = 0.0;
    for (std::size_t i = 0; i < tuple.size(); ++i) {
      c += inst.weight(i) * squared_distance(support[l], inst.measure(i).atom(tuple[i]));
    }
    if (c < best) {
      best = c;
      best_l = l;
    }
  }
  return {best, best_l};
}

Recovery recover_barycenter(const BarycenterInstance& inst, const PointSet& support,
                            const TuplePlan& plan) {
  check_support(inst, support);
  const std::size_t k = inst.k();
  // Marginal check.
  std::vector<std::vector<double>> marg(k);
  for (std::size_t i = 0; i < k; ++i) marg[i].assign(inst.measure(i).size(), 0.0);
  for (const auto& [tuple, mass] : plan.entries) {
    if (tuple.size() != k) throw InvalidInput("invalid plan: tuple length differs from k");
    if (mass < 0.0) throw InvalidInput("invalid plan: negative tuple mass");
    for (std::size_t i = 0; i < k; ++i) {
      if (tuple[i] >= inst.measure(i).size()) throw InvalidInput("invalid plan: tuple index out of range");
      marg[i][tuple[i]] += mass;
    }
  }
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = 0; j < marg[i].size(); ++j) {
      const double miss = std::abs(marg[i][j] - inst.measure(i).mass(j));
      if (miss > kMarginalTolerance) {
        throw InvalidInput("invalid plan: marginal of measure " + std::to_string(i) + " atom " +
                           std::to_string(j) + " off by " + std::to_string(miss));
      }
    }
  }

  std::vector<double> atom_mass(support.size(), 0.0);
  std::vector<std::size_t> target(plan.entries.size());
  for (std::size_t e = 0; e < plan.entries.size(); ++e) {
    target[e] = tuple_cost(inst, support, plan.entries[e].first).second;
    atom_mass[target[e]] += plan.entries[e].second;
  }

  std::vector<std::size_t> kept_index(support.size(), SIZE_MAX);
  PointSet atoms(support.dim());
  std::vector<double> masses;
  std::vector<std::size_t> support_index;
  for (std::size_t l = 0; l < support.size(); ++l) {
    if (atom_mass[l] <= kAtomPruneThreshold) continue;
    kept_index[l] = masses.size();
    atoms.push_back(support[l]);
    masses.push_back(atom_mass[l]);
    support_index.push_back(l);
  }
  if (masses.empty()) throw InvalidInput("invalid plan: no atom keeps positive mass");
  double total = std::accumulate(masses.begin(), masses.end(), 0.0);
  for (double& m : masses) m /= total;

  std::vector<std::map<std::pair<std::size_t, std::size_t>, double>> agg(k);
  for (std::size_t e = 0; e < plan.entries.size(); ++e) {
    const std::size_t src = kept_index[target[e]];
    if (src == SIZE_MAX) continue;
    for (std::size_t i = 0; i < k; ++i) agg[i][{src, plan.entries[e].first[i]}] += plan.entries[e].second;
  }
  std::vector<TransportPlan> plans(k);
  for (std::size_t i = 0; i < k; ++i) {
    for (const auto& [key, mass] : agg[i]) {
      if (mass >= 1e-12) plans[i].entries.push_back({key.first, key.second, mass});
    }
  }
  return Recovery{DiscreteMeasure(std::move(atoms), std::move(masses)), std::move(support_index),
                  std::move(plans)};
}

std::string to_string(SolveMode m) {
  switch (m) {
    case SolveMode::kAuto: return "auto";
    case SolveMode::kCompact: return "compact";
    case SolveMode::kColgen: return "colgen";
  }
  return "unknown";
}

SolveMode parse_solve_mode(const std::string& s) {
  if (s == "auto") return SolveMode::kAuto;
  if (s == "compact") return SolveMode::kCompact;
  if (s == "colgen") return SolveMode::kColgen;
  throw InvalidInput("unknown solver mode '" + s + "' (expected compact, colgen or auto)");
}

std::string to_string(Termination t) {
  switch (t) {
    case Termination::kOptimal: return "optimal";
    case Termination::kTimeLimit: return "early-stop:time-limit";
    case Termination::kIterationLimit: return "early-stop:iteration-limit";
  }
  return "unknown";
}

BarycenterSolution solve_restricted_colgen(const BarycenterInstance& inst, const PointSet& support,
                                           const SolverLimits& limits) {
  check_support(inst, support);
  const Stopwatch clock;
  const std::size_t k = inst.k();
  const auto offset = row_offsets(inst);

  std::vector<double> rhs;
  rhs.reserve(offset[k]);
  for (const auto& m : inst.measures()) rhs.insert(rhs.end(), m.masses().begin(), m.masses().end());
  lp::LinearProgram master(std::move(rhs));

  std::vector<TupleIndex> columns;
  std::set<TupleIndex> in_master;
  const std::vector<double> ones(k, 1.0);
  std::vector<int> rows(k);
  auto add_tuple = [&](const TupleIndex& tuple) {
    if (!in_master.insert(tuple).second) return false;
    for (std::size_t i = 0; i < k; ++i) rows[i] = static_cast<int>(offset[i] + tuple[i]);
    master.add_column(tuple_cost(inst, support, tuple).first, rows, ones);
    columns.push_back(tuple);
    return true;
  };
  for (const auto& [tuple, mass] : northwest_corner(inst)) add_tuple(tuple);

  SolverDiagnostics diag;
  diag.mode = SolveMode::kColgen;
  diag.lower_bound = 0.0;
  lp::LpOptions lp_opt;
  lp_opt.max_pivots = limits.max_lp_pivots;
  lp_opt.pricing = limits.pricing;
  lp_opt.optimality_tol = limits.optimality_tol;
  lp::LpSolution sol;
  DualVector gamma = DualVector::zeros(inst);
  std::vector<std::vector<std::uint32_t>> choices;

  while (true) {
    sol = lp::solve_lp(master, lp_opt);
    if (sol.status != lp::LpStatus::kOptimal) {
      throw lp::LpError("restricted master ended with status " + lp::to_string(sol.status));
    }
    lp_opt.warm_basis = sol.basis;
    diag.lp_pivots += sol.pivots;
    ++diag.iterations;
    diag.value_history.push_back(sol.objective);

    for (std::size_t i = 0; i < k; ++i) {
      for (std::size_t j = 0; j < inst.measure(i).size(); ++j) gamma.gamma[i][j] = sol.dual[offset[i] + j];
    }
    auto prices = price_atoms(inst, support, gamma, &choices);
    ++diag.pricing_calls;
    std::size_t best = 0;
    for (std::size_t l = 1; l < prices.size(); ++l) {
      if (prices[l].value < prices[best].value) best = l;
    }
    const double violation = prices[best].value;
    // gamma shifted by violation/k per measure is dual feasible.
    diag.lower_bound = std::max(diag.lower_bound, gamma.objective(inst) + std::min(0.0, violation));

    if (violation >= -limits.optimality_tol * (1.0 + std::abs(sol.objective))) {
      diag.termination = Termination::kOptimal;
      break;
    }
    // Most violated tuple first, then other atoms' best tuples by violation.
    std::size_t added = add_tuple(choices[best]) ? 1 : 0;
    if (limits.columns_per_round > 1) {
      std::vector<std::size_t> order(prices.size());
      std::iota(order.begin(), order.end(), std::size_t{0});
      std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return prices[a].value < prices[b].value;
      });
      for (std::size_t l : order) {
        if (added >= limits.columns_per_round) break;
        if (l == best) continue;
        if (prices[l].value >= -limits.optimality_tol * (1.0 + std::abs(sol.objective))) break;
        if (add_tuple(choices[l])) ++added;
      }
    }
    if (added == 0) {
      // The priced tuple is already in the master: optimal up to LP tolerance.
      diag.termination = Termination::kOptimal;
      break;
    }
    if (diag.iterations >= limits.max_iterations) {
      diag.termination = Termination::kIterationLimit;
      break;
    }
    if (clock.elapsed() >= limits.time_limit_seconds) {
      diag.termination = Termination::kTimeLimit;
      break;
    }
  }

  // With early stop, the last solve covers all but the just-added columns.
  TuplePlan plan;
  for (std::size_t c = 0; c < sol.primal.size(); ++c) {
    if (sol.primal[c] > 0.0) plan.entries.emplace_back(columns[c], sol.primal[c]);
  }
  Recovery rec = recover_barycenter(inst, support, plan);
  diag.columns = master.num_cols();
  const double value = std::max(0.0, sol.objective);
  if (diag.termination == Termination::kOptimal) diag.lower_bound = value;
  diag.lower_bound = std::min(diag.lower_bound, value);
  diag.wall_seconds = clock.elapsed();
  return BarycenterSolution{std::move(rec.measure), std::move(rec.support_index), value,
                            std::move(rec.plans), std::move(plan), std::move(diag)};
}

std::size_t compact_variable_count(const BarycenterInstance& inst, std::size_t support_size) {
  return support_size * (inst.total_atoms() + 1);
}

BarycenterSolution solve_fixed_support_lp(const BarycenterInstance& inst, const PointSet& support,
                                          const SolverLimits& limits) {
  check_support(inst, support);
  const Stopwatch clock;
  const std::size_t k = inst.k();
  const std::size_t L = support.size();
  const std::size_t vars = compact_variable_count(inst, L);
  if (vars > limits.max_compact_variables) {
    throw GuardExceeded("compact LP needs " + std::to_string(vars) + " variables, above the guard of " +
                        std::to_string(limits.max_compact_variables));
  }
  const auto offset = row_offsets(inst);
  const std::size_t coupling0 = offset[k];

  // Rows: marginal (i, j), then coupling (i, l): sum_j pi^i_lj - m_l = 0.
  std::vector<double> rhs(coupling0 + k * L, 0.0);
  for (std::size_t i = 0; i < k; ++i) {
    std::copy(inst.measure(i).masses().begin(), inst.measure(i).masses().end(),
              rhs.begin() + static_cast<std::ptrdiff_t>(offset[i]));
  }
  lp::LinearProgram prog(std::move(rhs));
  struct Var {
    std::size_t i, l, j;
  };
  std::vector<Var> pi_vars;
  pi_vars.reserve(L * offset[k]);
  const double ones[2] = {1.0, 1.0};
  for (std::size_t i = 0; i < k; ++i) {
    const DiscreteMeasure& m = inst.measure(i);
    for (std::size_t l = 0; l < L; ++l) {
      for (std::size_t j = 0; j < m.size(); ++j) {
        const int rows[2] = {static_cast<int>(offset[i] + j), static_cast<int>(coupling0 + i * L + l)};
        prog.add_column(inst.weight(i) * squared_distance(support[l], m.atom(j)), rows, ones);
        pi_vars.push_back({i, l, j});
      }
    }
  }
  const std::size_t m0 = prog.num_cols();
  std::vector<int> mrows(k);
  const std::vector<double> minus(k, -1.0);
  for (std::size_t l = 0; l < L; ++l) {
    for (std::size_t i = 0; i < k; ++i) mrows[i] = static_cast<int>(coupling0 + i * L + l);
    prog.add_column(0.0, mrows, minus);
  }

  lp::LpOptions opt;
  opt.max_pivots = limits.max_lp_pivots;
  opt.pricing = limits.pricing;
  opt.optimality_tol = limits.optimality_tol;
  const lp::LpSolution sol = lp::solve_lp(prog, opt);
  if (sol.status != lp::LpStatus::kOptimal) {
    throw lp::LpError("compact barycenter LP ended with status " + lp::to_string(sol.status));
  }

  std::vector<std::size_t> kept_index(L, SIZE_MAX);
  PointSet atoms(support.dim());
  std::vector<double> masses;
  std::vector<std::size_t> support_index;
  for (std::size_t l = 0; l < L; ++l) {
    const double m = sol.primal[m0 + l];
    if (m <= kAtomPruneThreshold) continue;
    kept_index[l] = masses.size();
    atoms.push_back(support[l]);
    masses.push_back(m);
    support_index.push_back(l);
  }
  const double total = std::accumulate(masses.begin(), masses.end(), 0.0);
  for (double& m : masses) m /= total;
  std::vector<TransportPlan> plans(k);
  for (std::size_t v = 0; v < pi_vars.size(); ++v) {
    const double x = sol.primal[v];
    if (x < 1e-12) continue;
    const Var& var = pi_vars[v];
    if (kept_index[var.l] == SIZE_MAX) continue;
    plans[var.i].entries.push_back({kept_index[var.l], var.j, x});
  }

  SolverDiagnostics diag;
  diag.mode = SolveMode::kCompact;
  diag.iterations = 1;
  diag.lp_pivots = sol.pivots;
  diag.columns = prog.num_cols();
  diag.termination = Termination::kOptimal;
  const double value = std::max(0.0, sol.objective);
  diag.lower_bound = value;
  diag.wall_seconds = clock.elapsed();
  return BarycenterSolution{DiscreteMeasure(std::move(atoms), std::move(masses)),
                            std::move(support_index), value, std::move(plans), TuplePlan{},
                            std::move(diag)};
}

BarycenterSolution solve_restricted(const BarycenterInstance& inst, const PointSet& support,
                                    SolveMode mode, const SolverLimits& limits) {
  if (mode == SolveMode::kAuto) {
    const std::size_t vars = compact_variable_count(inst, support.size());
    mode = vars <= std::min(limits.max_compact_variables, limits.auto_compact_variables)
               ? SolveMode::kCompact
               : SolveMode::kColgen;
  }
  return mode == SolveMode::kCompact ? solve_fixed_support_lp(inst, support, limits)
                                     : solve_restricted_colgen(inst, support, limits);
}

CandidateSupport hybrid_expand(const BarycenterInstance& inst, const BarycenterSolution& base,
                               std::size_t neighbors, const SupportGuard& guard) {
  return hybrid_expand(inst, base.measure, neighbors, guard);
}

}  // namespace wbary
