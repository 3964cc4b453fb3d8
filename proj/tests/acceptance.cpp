// Acceptance run: one PASS/FAIL line per criterion. Exit status is the number
// of failed criteria.

#include <sys/wait.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "wbary/bench.hpp"
#include "wbary/candidates.hpp"
#include "wbary/io.hpp"
#include "wbary/oracle.hpp"
#include "wbary/solver.hpp"
#include "wbary/transport.hpp"

using namespace wbary;
namespace fs = std::filesystem;

namespace {

int failures = 0;

void report(int id, bool pass, const std::string& what, const std::string& detail, double seconds) {
  std::printf("%s criterion %d: %s [%s; %.1f s]\n", pass ? "PASS" : "FAIL", id, what.c_str(), detail.c_str(),
              seconds);
  std::fflush(stdout);
  if (!pass) ++failures;
}

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c);
  return buf;
}

double since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// Recovered measures are audited against their reported values for every solve in criteria 1-5.
struct Audit {
  std::size_t solves = 0;
  std::size_t failures = 0;
  double worst = -std::numeric_limits<double>::infinity();  // (eval - value) / (1 + value)

  void add(double value, double recomputed) {
    ++solves;
    const double rel = (recomputed - value) / (1.0 + value);
    worst = std::max(worst, rel);
    if (rel > 1e-6) ++failures;
  }
  void add_solution(const BarycenterInstance& inst, const BarycenterSolution& s) {
    add(s.value, eval_objective(inst, s.measure));
  }
} audit;

void audit_records(const bench::RatioReport& r) {
  for (const auto& rec : r.records) {
    ++audit.solves;
    const double rel = rec.audit_gap / (1.0 + rec.value);
    audit.worst = std::max(audit.worst, rel);
    if (rel > 1e-6) ++audit.failures;
  }
}

PointSet random_support(std::mt19937_64& gen, std::size_t n, std::size_t d) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> flat(n * d);
  for (double& x : flat) x = u(gen);
  return dedup_points(PointSet(d, std::move(flat))).first;
}

DiscreteMeasure random_measure(std::mt19937_64& gen, std::size_t n, std::size_t d) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> m(n);
  double s = 0.0;
  for (double& x : m) s += (x = 0.05 + u(gen));
  for (double& x : m) x /= s;
  return DiscreteMeasure(random_support(gen, n, d), std::move(m));
}

void criterion1() {
  const auto t0 = std::chrono::steady_clock::now();
  std::mt19937_64 gen(101);
  double worst = 0.0;
  std::size_t bad = 0;
  for (int i = 0; i < 50; ++i) {
    const std::size_t k = 2 + gen() % 3, n = 2 + gen() % 2, d = 1 + gen() % 3;
    const BarycenterInstance inst = bench::random_instance(k, n, d, bench::WeightsKind::kEqual, gen());
    const double opt = solve_exact(inst).value;
    const BarycenterSolution sol = solve_restricted(inst, build_s2_enum(inst, k).atoms);
    audit.add_solution(inst, sol);
    const double rel = std::abs(sol.value - opt) / (1.0 + opt);
    worst = std::max(worst, rel);
    bad += rel > 1e-8;
  }
  report(1, bad == 0, "s2-enum at t=k equals the exact optimum on 50 instances",
         fmt("worst |v-v*|/(1+v*) = %.2e, %.0f misses", worst, static_cast<double>(bad)), since(t0));
}

bench::RatioReport ratio_suite(bench::WeightsKind kind) {
  bench::RatioSuiteConfig cfg;
  cfg.weights = {kind};
  cfg.instances = 100;
  const bench::RatioReport r = bench::run_ratio_suite(cfg);
  audit_records(r);
  return r;
}

void deterministic_bounds(int id, const bench::RatioReport& r, const std::string& algorithm, const std::string& what,
                          double seconds) {
  std::size_t checked = 0, bad = 0;
  double worst = 0.0;
  for (const auto& rec : r.records) {
    if (rec.algorithm != algorithm) continue;
    ++checked;
    bad += !(rec.value <= rec.bound * rec.optimum + 1e-8);
    worst = std::max(worst, rec.ratio / rec.bound);
  }
  report(id, checked > 0 && bad == 0, what,
         fmt("%.0f checks, %.0f violations, max ratio/bound %.4f", static_cast<double>(checked),
             static_cast<double>(bad), worst),
         seconds);
}

void criterion4(const bench::RatioReport& general, const bench::RatioReport& equal, double seconds) {
  const auto t0 = std::chrono::steady_clock::now();
  std::size_t checked = 0, bad = 0;
  for (const auto* r : {&general, &equal}) {
    for (const auto& rec : r->records) {
      if (rec.algorithm != "s1-expect" && rec.algorithm != "s2-expect") continue;
      ++checked;
      bad += !(rec.value <= rec.bound * rec.optimum + 1e-8);
    }
  }
  const BarycenterInstance witness = BarycenterInstance::equal_weights(
      {DiscreteMeasure::dirac(Point{0.0}), DiscreteMeasure::dirac(Point{1.0}), DiscreteMeasure::dirac(Point{2.0})});
  const double opt = solve_exact(witness).value;
  double gap = -std::numeric_limits<double>::infinity();
  const double e = bench::expected_s2_value(witness, 1, 10'000, SolveMode::kAuto, &gap);
  audit.add(e, e + gap);
  const double target = ratio_bound(BoundKind::kEqual, 3, 1) * opt;
  const bool witness_ok = std::abs(e - 4.0 / 3.0) <= 1e-10 && std::abs(e - target) <= 1e-10;
  report(4, checked > 0 && bad == 0 && witness_ok, "exhaustive expectations within the bounds; witness attains 4/3",
         fmt("%.0f expectation checks, %.0f violations, witness E = %.12f", static_cast<double>(checked),
             static_cast<double>(bad), e),
         seconds + since(t0));
}

void criterion5() {
  const auto t0 = std::chrono::steady_clock::now();
  std::mt19937_64 gen(505);
  double worst = 0.0;
  std::size_t pairs = 0, bad = 0;
  while (pairs < 50) {
    const std::size_t k = 2 + gen() % 3, n = 2 + gen() % 4, d = 1 + gen() % 3;
    const auto kind = pairs % 2 ? bench::WeightsKind::kEqual : bench::WeightsKind::kGeneral;
    const BarycenterInstance inst = bench::random_instance(k, n, d, kind, gen());
    PointSet s;
    switch (pairs % 3) {
      case 0: s = random_support(gen, 1 + gen() % 200, d); break;
      case 1: s = build_s1_enum(inst, 1).atoms; break;
      default: s = build_s1_enum(inst, std::min<std::size_t>(k, 2)).atoms; break;
    }
    if (s.size() > 200) continue;
    ++pairs;
    const BarycenterSolution a = solve_fixed_support_lp(inst, s);
    const BarycenterSolution b = solve_restricted_colgen(inst, s);
    audit.add_solution(inst, a);
    audit.add_solution(inst, b);
    const double rel = std::abs(a.value - b.value) / (1.0 + a.value);
    worst = std::max(worst, rel);
    bad += rel > 1e-6;
  }

  std::size_t tiny = 0, oracle_bad = 0;
  double oracle_worst = 0.0;
  std::uniform_real_distribution<double> u(-0.5, 0.5);
  while (tiny < 50) {
    const std::size_t k = 2 + gen() % 3, n = 1 + gen() % 4, d = 1 + gen() % 3;
    const BarycenterInstance inst = bench::random_instance(k, n, d, bench::WeightsKind::kGeneral, gen());
    if (inst.tuple_count() > 200) continue;
    ++tiny;
    const PointSet s = random_support(gen, 1 + gen() % 20, d);
    DualVector g = DualVector::zeros(inst);
    for (auto& row : g.gamma)
      for (double& x : row) x = u(gen);
    const OracleResult r = separation_oracle(inst, s, g);
    std::vector<std::size_t> sizes;
    for (const auto& m : inst.measures()) sizes.push_back(m.size());
    double best = std::numeric_limits<double>::infinity();
    auto cost = [&](const TupleIndex& t, std::size_t l) {
      double v = 0.0;
      for (std::size_t i = 0; i < k; ++i)
        v += inst.weight(i) * squared_distance(s[l], inst.measure(i).atom(t[i])) - g.gamma[i][t[i]];
      return v;
    };
    for_each_tuple(sizes, [&](const TupleIndex& t) {
      for (std::size_t l = 0; l < s.size(); ++l) best = std::min(best, cost(t, l));
    });
    const double err = std::max(std::abs(r.violation - best), std::abs(cost(r.tuple, r.atom) - best));
    oracle_worst = std::max(oracle_worst, err);
    oracle_bad += err > 1e-10;
  }
  report(5, bad == 0 && oracle_bad == 0, "colgen matches compact on 50 pairs; oracle matches brute force on 50 cases",
         fmt("worst mode gap %.2e, worst oracle error %.2e, %.0f misses", worst, oracle_worst,
             static_cast<double>(bad + oracle_bad)),
         since(t0));
}

void criterion6() {
  report(6, audit.solves > 0 && audit.failures == 0, "recovered barycenters never beat their reported values",
         fmt("%.0f solves audited, worst (eval-v)/(1+v) = %.2e, %.0f failures", static_cast<double>(audit.solves),
             audit.worst, static_cast<double>(audit.failures)),
         0.0);
}

void criterion7() {
  const auto t0 = std::chrono::steady_clock::now();
  std::mt19937_64 gen(707);
  std::size_t bad = 0;
  for (int i = 0; i < 20; ++i) {
    const BarycenterInstance inst = bench::random_instance(3, 3, 2, bench::WeightsKind::kGeneral, gen());
    const PointSet big = random_support(gen, 30 + gen() % 60, 2);
    PointSet small(2);
    for (std::size_t l = 0; l < big.size(); ++l) {
      if (gen() % 2) small.push_back(big[l]);
    }
    if (small.empty()) small.push_back(big[0]);
    bad += !(solve_restricted(inst, big).value <= solve_restricted(inst, small).value + 1e-8);
  }
  std::size_t ineq = 0;
  for (int i = 0; i < 20; ++i) {
    const std::size_t k = 3 + i % 3;
    const BarycenterInstance inst = bench::random_instance(k, 2 + i % 3, 2, bench::WeightsKind::kEqual, gen());
    const double s11 = solve_restricted(inst, build_s1_enum(inst, 1).atoms).value;
    const double s12 = solve_restricted(inst, build_s1_enum(inst, 2).atoms).value;
    const double s21 = solve_restricted(inst, build_s2_enum(inst, 1).atoms).value;
    const double s22 = solve_restricted(inst, build_s2_enum(inst, 2).atoms).value;
    ineq += !(s12 <= s11 + 1e-8) + !(s11 <= s21 + 1e-8) + !(s12 <= s22 + 1e-8);
  }
  report(7, bad == 0 && ineq == 0, "value monotone under inclusion (20 nested pairs, 20 equal-weight instances)",
         fmt("%.0f nested violations, %.0f ordering violations", static_cast<double>(bad),
             static_cast<double>(ineq)),
         since(t0));
}

void criterion8() {
  const auto t0 = std::chrono::steady_clock::now();
  bench::EllipseConfig cfg;
  cfg.count = 10;
  cfg.grid = 20;
  cfg.seed = 1;
  cfg.ts = {1, 2};
  const bench::EllipseReport r = bench::run_ellipse_pipeline(cfg);
  const double seconds = since(t0);
  bool optimal = true;
  std::string values;
  for (const auto& run : r.runs) {
    optimal = optimal && run.termination == Termination::kOptimal;
    values += "t=" + std::to_string(run.t) + " " + to_string(run.mode) + fmt(" v=%.10f; ", run.value);
  }
  report(8, optimal && r.monotone && r.modes_agree && seconds <= 600.0,
         "nested-ellipse pipeline (10 measures, 20x20, t=1,2) within 10 minutes",
         values + fmt("mode gap %.2e", r.mode_gap), seconds);
}

void criterion9() {
  const auto t0 = std::chrono::steady_clock::now();
  std::mt19937_64 gen(909);
  double worst_sym = 0.0, worst_tri = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < 100; ++i) {
    const std::size_t d = 1 + gen() % 3;
    const DiscreteMeasure a = random_measure(gen, 1 + gen() % 6, d);
    const DiscreteMeasure b = random_measure(gen, 1 + gen() % 6, d);
    const DiscreteMeasure c = random_measure(gen, 1 + gen() % 6, d);
    auto w = [](const DiscreteMeasure& x, const DiscreteMeasure& y) {
      return std::sqrt(std::max(0.0, w2_squared(x, y).value));
    };
    worst_sym = std::max(worst_sym, std::abs(w(a, b) - w(b, a)));
    worst_tri = std::max(worst_tri, w(a, c) - w(a, b) - w(b, c));
  }
  double worst_dirac = 0.0;
  std::uniform_real_distribution<double> u(-5.0, 5.0);
  for (int i = 0; i < 100; ++i) {
    const Point p{u(gen), u(gen)}, q{u(gen), u(gen)};
    worst_dirac = std::max(worst_dirac, std::abs(w2_squared(DiscreteMeasure::dirac(p), DiscreteMeasure::dirac(q)).value -
                                                 squared_distance(p, q)));
  }
  report(9, worst_sym <= 1e-7 && worst_tri <= 1e-7 && worst_dirac <= 1e-12,
         "sqrt W2^2 symmetric with triangle inequality; Dirac pairs exact",
         fmt("symmetry %.2e, triangle excess %.2e, Dirac error %.2e", worst_sym, worst_tri, worst_dirac), since(t0));
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(WBARY_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void criterion10() {
  const auto t0 = std::chrono::steady_clock::now();
  const fs::path root = fs::temp_directory_path() / "wbary_acceptance";
  fs::remove_all(root);
  fs::create_directories(root);
  const BarycenterInstance inst = bench::random_instance(4, 3, 2, bench::WeightsKind::kEqual, 10);
  io::write_instance(root / "inst.json", inst);
  const std::string in = (root / "inst.json").string();

  bool ok = true;
  std::size_t files = 0;
  for (int rep = 0; rep < 2; ++rep) {
    const fs::path dir = root / ("run" + std::to_string(rep));
    fs::create_directories(dir);
    const std::string d = dir.string();
    ok = ok && run_cli("barycenter " + in + " --algorithm s1-sample --t 2 --seed 42 --out " + d +
                       "/s1.json --render " + d + "/s1.pgm --grid 16") == 0;
    ok = ok && run_cli("barycenter " + in + " --algorithm s2-sample --t 3 --seed 7 --mode colgen --out " + d +
                       "/s2.json") == 0;
    ok = ok && run_cli("bench ratio --instances 4 --k 3,4 --n 2,3 --t 1,2 --seed 5 --out " + d + "/ratio") == 0;
    ok = ok && run_cli("bench ellipse --count 3 --grid 12 --seed 3 --t 1,2 --out " + d + "/ellipse") == 0;
  }
  const fs::path a = root / "run0", b = root / "run1";
  for (const auto& entry : fs::recursive_directory_iterator(a)) {
    if (!entry.is_regular_file()) continue;
    const fs::path rel = fs::relative(entry.path(), a);
    ++files;
    if (slurp(entry.path()) != slurp(b / rel)) {
      ok = false;
      std::fprintf(stderr, "differs: %s\n", rel.string().c_str());
    }
  }
  report(10, ok && files >= 6, "seeded commands produce byte-identical files",
         fmt("%.0f files compared", static_cast<double>(files)), since(t0));
}

}  // namespace

int main() {
  try {
    criterion1();
    auto t0 = std::chrono::steady_clock::now();
    const bench::RatioReport general = ratio_suite(bench::WeightsKind::kGeneral);
    const double general_seconds = since(t0);
    deterministic_bounds(2, general, "s1-enum", "s1-enum within 1+1/t of the optimum (100 general-weight instances)",
                         general_seconds);
    t0 = std::chrono::steady_clock::now();
    const bench::RatioReport equal = ratio_suite(bench::WeightsKind::kEqual);
    deterministic_bounds(3, equal, "s2-enum", "s2-enum within 1+(k-t)/(t(k-1)) (100 equal-weight instances)",
                         since(t0));
    criterion4(general, equal, 0.0);
    criterion5();
    criterion6();
    criterion7();
    criterion8();
    criterion9();
    criterion10();
  } catch (const std::exception& e) {
    std::printf("FAIL acceptance aborted: %s\n", e.what());
    return 1;
  }
  return failures;
}
