#include "wbary/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <sstream>

#include "wbary/candidates.hpp"
#include "wbary/io.hpp"
#include "wbary/rng.hpp"
#include "wbary/transport.hpp"

namespace wbary::bench {

namespace {

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::vector<double> flat_dirichlet(Rng& rng, std::size_t n) {
  std::vector<double> v(n);
  double total = 0.0;
  for (double& x : v) {
    x = std::max(rng.exponential(), 1e-12);
    total += x;
  }
  for (double& x : v) x /= total;
  return v;
}

// Solves v(S) and reports how far the recovered barycenter's true objective
// sits above the reported value.
double solve_value(const BarycenterInstance& inst, const PointSet& support, SolveMode mode,
                   double& audit_gap) {
  const BarycenterSolution sol = solve_restricted(inst, support, mode);
  audit_gap = std::max(audit_gap, eval_objective(inst, sol.measure) - sol.value);
  return sol.value;
}

double ratio_of(double value, double optimum) {
  if (optimum > 1e-15) return value / optimum;
  return value <= 1e-8 ? 1.0 : std::numeric_limits<double>::infinity();
}

void finish(RatioRecord& r) {
  r.ratio = ratio_of(r.value, r.optimum);
  r.pass = !r.asserted || r.value <= r.bound * r.optimum + 1e-8;
}

std::size_t checked_power(std::size_t base, std::size_t exp, std::size_t cap) {
  std::size_t out = 1;
  for (std::size_t e = 0; e < exp; ++e) {
    if (out > cap / std::max<std::size_t>(base, 1)) return cap + 1;
    out *= base;
  }
  return out;
}

std::size_t checked_binomial(std::size_t k, std::size_t t, std::size_t cap) {
  if (t > k) return 0;
  t = std::min(t, k - t);
  double out = 1.0;
  for (std::size_t i = 1; i <= t; ++i) out = out * static_cast<double>(k - t + i) / static_cast<double>(i);
  return out > static_cast<double>(cap) ? cap + 1 : static_cast<std::size_t>(std::llround(out));
}

}  // namespace

std::string to_string(WeightsKind w) { return w == WeightsKind::kEqual ? "equal" : "general"; }

WeightsKind parse_weights_kind(const std::string& s) {
  if (s == "equal") return WeightsKind::kEqual;
  if (s == "general") return WeightsKind::kGeneral;
  throw InvalidInput("unknown weights kind '" + s + "' (expected equal or general)");
}

BarycenterInstance random_instance(std::size_t k, std::size_t n, std::size_t d, WeightsKind weights,
                                   std::uint64_t seed) {
  if (k == 0 || n == 0 || d == 0) throw InvalidInput("random_instance needs k, n, d >= 1");
  Rng rng(seed);
  std::vector<DiscreteMeasure> measures;
  for (std::size_t i = 0; i < k; ++i) {
    PointSet atoms(d);
    std::vector<double> p(d);
    for (std::size_t j = 0; j < n; ++j) {
      for (double& x : p) x = rng.uniform();
      atoms.push_back(p);
    }
    measures.emplace_back(std::move(atoms), flat_dirichlet(rng, n));
  }
  if (weights == WeightsKind::kEqual) return BarycenterInstance::equal_weights(std::move(measures));
  return BarycenterInstance(std::move(measures), flat_dirichlet(rng, k));
}

double expected_s1_value(const BarycenterInstance& inst, std::size_t t, std::size_t limit,
                         SolveMode mode, double* audit_gap, std::size_t* index_sets) {
  const std::size_t k = inst.k();
  if (t == 0) throw InvalidInput("t must be positive");
  if (checked_power(k, t, limit) > limit) {
    throw GuardExceeded("k^t = " + std::to_string(k) + "^" + std::to_string(t) + " index sequences exceed " +
                        std::to_string(limit));
  }
  // Sequences that sort to the same multiset give the same support.
  std::map<std::vector<std::size_t>, double> multisets;
  const std::vector<std::size_t> sizes(t, k);
  for_each_tuple(sizes, [&](const TupleIndex& seq) {
    double p = 1.0;
    for (auto i : seq) p *= inst.weight(i);
    if (p <= 0.0) return;
    std::vector<std::size_t> key(seq.begin(), seq.end());
    std::sort(key.begin(), key.end());
    multisets[key] += p;
  });
  double gap = -std::numeric_limits<double>::infinity();
  double expectation = 0.0;
  for (const auto& [indices, p] : multisets) {
    const CandidateSupport s = support_from_indices(inst, SampledIndexSet{indices, true});
    expectation += p * solve_value(inst, s.atoms, mode, gap);
  }
  if (audit_gap) *audit_gap = std::max(*audit_gap, gap);
  if (index_sets) *index_sets = multisets.size();
  return expectation;
}

double expected_s2_value(const BarycenterInstance& inst, std::size_t t, std::size_t limit,
                         SolveMode mode, double* audit_gap, std::size_t* index_sets) {
  const std::size_t k = inst.k();
  if (t == 0 || t > k) throw InvalidInput("t must lie in [1, k]");
  const std::size_t count = checked_binomial(k, t, limit);
  if (count > limit) {
    throw GuardExceeded("C(" + std::to_string(k) + ", " + std::to_string(t) + ") subsets exceed " +
                        std::to_string(limit));
  }
  double gap = -std::numeric_limits<double>::infinity();
  double total = 0.0;
  std::vector<std::size_t> subset(t);
  for (std::size_t i = 0; i < t; ++i) subset[i] = i;
  while (true) {
    const CandidateSupport s = support_from_indices(inst, SampledIndexSet{subset, false});
    total += solve_value(inst, s.atoms, mode, gap);
    // Next subset in lexicographic order.
    std::size_t pos = t;
    while (pos > 0 && subset[pos - 1] == k - t + pos - 1) --pos;
    if (pos == 0) break;
    ++subset[pos - 1];
    for (std::size_t q = pos; q < t; ++q) subset[q] = subset[q - 1] + 1;
  }
  if (audit_gap) *audit_gap = std::max(*audit_gap, gap);
  if (index_sets) *index_sets = count;
  return total / static_cast<double>(count);
}

void check_instance(const BarycenterInstance& inst, double optimum, std::size_t t,
                    const RatioSuiteConfig& config, RatioRecord base, std::vector<RatioRecord>& out) {
  const std::size_t k = inst.k();
  const bool equal = inst.has_equal_weights();
  const double general_bound = ratio_bound(BoundKind::kGeneral, k, t);
  base.t = t;
  base.optimum = optimum;
  auto emit = [&](const std::string& algorithm, double value, double bound, std::size_t support,
                  bool asserted, double gap) {
    RatioRecord r = base;
    r.algorithm = algorithm;
    r.value = value;
    r.bound = bound;
    r.support_size = support;
    r.asserted = asserted;
    r.audit_gap = gap;
    finish(r);
    out.push_back(r);
  };
  // S2 subsets need t <= k; its bound is stated for equal weights only.
  const bool s2 = equal && t <= k;
  const double equal_bound = s2 ? ratio_bound(BoundKind::kEqual, k, t) : 0.0;

  if (config.enumeration) {
    double gap = -std::numeric_limits<double>::infinity();
    const CandidateSupport s1 = build_s1_enum(inst, t);
    emit("s1-enum", solve_value(inst, s1.atoms, config.mode, gap), general_bound, s1.size(), true, gap);
    if (s2) {
      gap = -std::numeric_limits<double>::infinity();
      const CandidateSupport s = build_s2_enum(inst, t);
      emit("s2-enum", solve_value(inst, s.atoms, config.mode, gap), equal_bound, s.size(), true, gap);
    }
  }
  if (!config.expectation) return;

  // Seeds for the Monte Carlo fallback come from the instance id.
  Rng seeds(config.seed ^ (0x9e3779b97f4a7c15ULL * (base.instance + 1)) ^ (t << 48));
  auto monte_carlo = [&](bool subsets, double bound) {
    double gap = -std::numeric_limits<double>::infinity();
    double sum = 0.0;
    for (std::size_t r = 0; r < config.mc_repetitions; ++r) {
      const std::uint64_t seed = seeds.next();
      const CandidateSupport s = subsets ? build_s2_sample(inst, t, seed) : build_s1_sample(inst, t, seed);
      sum += solve_value(inst, s.atoms, config.mode, gap);
    }
    emit(subsets ? "s2-mc" : "s1-mc", sum / static_cast<double>(config.mc_repetitions), bound,
         config.mc_repetitions, false, gap);
  };

  if (checked_power(k, t, config.exhaustive_limit) <= config.exhaustive_limit) {
    double gap = -std::numeric_limits<double>::infinity();
    std::size_t sets = 0;
    const double e = expected_s1_value(inst, t, config.exhaustive_limit, config.mode, &gap, &sets);
    emit("s1-expect", e, general_bound, sets, true, gap);
  } else if (config.mc_repetitions > 0) {
    monte_carlo(false, general_bound);
  }
  if (!s2) return;
  if (checked_binomial(k, t, config.exhaustive_limit) <= config.exhaustive_limit) {
    double gap = -std::numeric_limits<double>::infinity();
    std::size_t sets = 0;
    const double e = expected_s2_value(inst, t, config.exhaustive_limit, config.mode, &gap, &sets);
    emit("s2-expect", e, equal_bound, sets, true, gap);
  } else if (config.mc_repetitions > 0) {
    monte_carlo(true, equal_bound);
  }
}

RatioReport run_ratio_suite(const RatioSuiteConfig& config) {
  if (config.ks.empty() || config.ns.empty() || config.ds.empty() || config.ts.empty()) {
    throw InvalidInput("ratio suite grid must be nonempty");
  }
  RatioReport report;
  Rng master(config.seed);
  for (WeightsKind kind : config.weights) {
    for (std::size_t i = 0; i < config.instances; ++i) {
      const std::size_t k = config.ks[i % config.ks.size()];
      const std::size_t n = config.ns[(i / config.ks.size()) % config.ns.size()];
      const std::size_t d = config.ds[(i / (config.ks.size() * config.ns.size())) % config.ds.size()];
      const std::uint64_t seed = master.next();
      const BarycenterInstance inst = random_instance(k, n, d, kind, seed);
      const ExactResult exact = solve_exact(inst, config.max_tuples);
      RatioRecord base;
      base.instance = i;
      base.k = k;
      base.n = n;
      base.d = d;
      base.weights = kind;
      for (std::size_t t : config.ts) check_instance(inst, exact.value, t, config, base, report.records);
    }
  }
  return report;
}

RatioSummary RatioReport::summary() const {
  RatioSummary s;
  s.records = records.size();
  s.max_audit_gap = -std::numeric_limits<double>::infinity();
  double ratio_sum = 0.0;
  for (const auto& r : records) {
    s.max_audit_gap = std::max(s.max_audit_gap, r.audit_gap);
    if (!r.asserted) continue;
    ++s.asserted;
    if (!r.pass) ++s.violations;
    s.max_ratio = std::max(s.max_ratio, r.ratio);
    ratio_sum += r.ratio;
  }
  if (s.asserted > 0) s.mean_ratio = ratio_sum / static_cast<double>(s.asserted);
  if (records.empty()) s.max_audit_gap = 0.0;
  return s;
}

std::string RatioReport::to_csv() const {
  std::ostringstream os;
  os << "instance,k,n,d,weights,t,algorithm,value,optimum,ratio,bound,support_size,asserted,pass,audit_gap\n";
  for (const auto& r : records) {
    os << r.instance << ',' << r.k << ',' << r.n << ',' << r.d << ',' << to_string(r.weights) << ',' << r.t
       << ',' << r.algorithm << ',' << num(r.value) << ',' << num(r.optimum) << ',' << num(r.ratio) << ','
       << num(r.bound) << ',' << r.support_size << ',' << (r.asserted ? 1 : 0) << ',' << (r.pass ? 1 : 0)
       << ',' << num(r.audit_gap) << '\n';
  }
  return os.str();
}

std::string RatioReport::summary_csv() const {
  const RatioSummary s = summary();
  std::ostringstream os;
  os << "key,value\n"
     << "records," << s.records << '\n'
     << "asserted," << s.asserted << '\n'
     << "violations," << s.violations << '\n'
     << "max_ratio," << num(s.max_ratio) << '\n'
     << "mean_ratio," << num(s.mean_ratio) << '\n'
     << "max_audit_gap," << num(s.max_audit_gap) << '\n';
  return os.str();
}

std::string EllipseReport::to_csv() const {
  std::ostringstream os;
  os << "t,mode,support_size,raw_count,value,lower_bound,audit_value,iterations,lp_pivots,"
        "barycenter_atoms,termination\n";
  for (const auto& r : runs) {
    os << r.t << ',' << to_string(r.mode) << ',' << r.support_size << ',' << r.raw_count << ','
       << num(r.value) << ',' << num(r.lower_bound) << ',' << num(r.audit_value) << ',' << r.iterations << ','
       << r.lp_pivots << ',' << r.barycenter_atoms << ',' << to_string(r.termination) << '\n';
  }
  return os.str();
}

EllipseReport run_ellipse_pipeline(const EllipseConfig& config) {
  if (config.ts.empty()) throw InvalidInput("ellipse pipeline needs at least one t");
  auto measures = io::generate_nested_ellipses(config.count, config.grid, config.seed);
  EllipseReport report;
  for (const auto& m : measures) report.atoms_per_measure.push_back(m.size());
  if (config.render_dir) {
    std::filesystem::create_directories(*config.render_dir);
    for (std::size_t i = 0; i < measures.size(); ++i) {
      char name[32];
      std::snprintf(name, sizeof name, "input_%02zu.pgm", i);
      io::write_rendered(*config.render_dir / name,
                         io::render_measure(measures[i], config.grid, io::RenderMode::kGray));
    }
  }
  const BarycenterInstance inst = BarycenterInstance::equal_weights(std::move(measures));

  auto run = [&](const CandidateSupport& support, std::size_t t, SolveMode mode) {
    const auto start = std::chrono::steady_clock::now();
    const BarycenterSolution sol = solve_restricted(inst, support.atoms, mode, config.limits);
    EllipseRun r;
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    r.t = t;
    r.mode = sol.diagnostics.mode;
    r.support_size = support.size();
    r.raw_count = support.provenance.raw_count;
    r.value = sol.value;
    r.lower_bound = sol.diagnostics.lower_bound;
    r.audit_value = eval_objective(inst, sol.measure);
    r.iterations = sol.diagnostics.iterations;
    r.lp_pivots = sol.diagnostics.lp_pivots;
    r.barycenter_atoms = sol.measure.size();
    r.termination = sol.diagnostics.termination;
    report.runs.push_back(r);
    return sol;
  };

  std::vector<std::size_t> ts = config.ts;
  std::sort(ts.begin(), ts.end());
  ts.erase(std::unique(ts.begin(), ts.end()), ts.end());
  std::map<std::size_t, double> value_at;
  for (std::size_t t : ts) {
    const CandidateSupport support = build_s1_enum(inst, t);
    const BarycenterSolution sol = run(support, t, config.mode);
    value_at[t] = sol.value;
    if (config.render_dir) {
      io::write_rendered(*config.render_dir / ("barycenter_t" + std::to_string(t) + ".pgm"),
                         io::render_measure(sol.measure, config.grid, io::RenderMode::kGray));
    }
    if (config.cross_check && t == ts.front()) {
      const SolveMode other =
          sol.diagnostics.mode == SolveMode::kCompact ? SolveMode::kColgen : SolveMode::kCompact;
      const BarycenterSolution alt = run(support, t, other);
      report.mode_gap = std::abs(alt.value - sol.value);
      report.modes_agree = report.mode_gap <= 1e-6 * (1.0 + std::abs(sol.value));
    }
  }
  // S1^t is contained in S1^{mt}, so v may only drop along multiples.
  for (std::size_t a : ts) {
    for (std::size_t b : ts) {
      if (b > a && b % a == 0 && value_at[b] > value_at[a] + 1e-8) report.monotone = false;
    }
  }
  return report;
}

}  // namespace wbary::bench
