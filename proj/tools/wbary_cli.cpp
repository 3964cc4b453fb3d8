// Command-line front end: one subcommand per capability, one JSON summary
// line on stdout, human-readable detail on stderr.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "wbary/bench.hpp"
#include "wbary/candidates.hpp"
#include "wbary/core.hpp"
#include "wbary/io.hpp"
#include "wbary/oracle.hpp"
#include "wbary/solver.hpp"
#include "wbary/transport.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace wbary;

namespace {

constexpr int kExitOptimal = 0;
constexpr int kExitError = 1;
constexpr int kExitEarlyStop = 2;

void emit(const json& summary) { std::cout << summary.dump() << std::endl; }

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write '" + path.string() + "'");
  out << text;
}

bool audit_ok(double reported, double recomputed) {
  return std::abs(reported - recomputed) <= 1e-6 * (1.0 + std::abs(reported));
}

struct RenderArgs {
  std::string path;
  std::size_t grid = 0;
  std::string mode = "gray";
};

void add_render_options(CLI::App* cmd, RenderArgs& r, bool required_path) {
  auto* opt = cmd->add_option(required_path ? "--out" : "--render", r.path,
                              required_path ? "image file to write" : "also render the barycenter to this image");
  if (required_path) opt->required();
  cmd->add_option("--grid", r.grid, "render grid size G (G x G pixels)");
  cmd->add_option("--render-mode", r.mode, "gray (d = 2) or rgb (d = 5)")->check(CLI::IsMember({"gray", "rgb"}));
}

void render_to(const RenderArgs& r, const DiscreteMeasure& m, const std::vector<double>& scale) {
  if (r.grid == 0) throw InvalidInput("--grid is required for rendering");
  io::write_rendered(r.path, io::render_measure(m, r.grid, io::parse_render_mode(r.mode), scale));
}

// ---------------------------------------------------------------------------

struct BarycenterArgs {
  std::string instance;
  std::string algorithm = "s1-enum";
  std::size_t t = 1;
  std::optional<std::uint64_t> seed;
  std::string mode = "auto";
  double time_limit = std::numeric_limits<double>::infinity();
  std::string out;
  std::vector<double> scale;
  std::string base;
  std::size_t neighbors = 5;
  std::size_t max_atoms = SupportGuard{}.max_atoms;
  RenderArgs render;
};

std::optional<double> bound_for(SupportAlgorithm alg, const BarycenterInstance& inst, std::size_t t) {
  switch (alg) {
    case SupportAlgorithm::kS1Enum:
    case SupportAlgorithm::kS1Sample:
      return ratio_bound(BoundKind::kGeneral, inst.k(), t);
    case SupportAlgorithm::kS2Enum:
    case SupportAlgorithm::kS2Sample:
      if (inst.has_equal_weights() && t <= inst.k()) return ratio_bound(BoundKind::kEqual, inst.k(), t);
      return std::nullopt;
    case SupportAlgorithm::kUnionExact: return 1.0;
    case SupportAlgorithm::kHybrid: return std::nullopt;
  }
  return std::nullopt;
}

int cmd_barycenter(const BarycenterArgs& a) {
  const BarycenterInstance inst = io::read_instance(a.instance);
  const SupportAlgorithm alg = parse_support_algorithm(a.algorithm);
  const SolveMode mode = parse_solve_mode(a.mode);
  SupportGuard guard;
  guard.max_atoms = a.max_atoms;

  CandidateSupport support;
  if (alg == SupportAlgorithm::kHybrid) {
    if (a.base.empty()) throw InvalidInput("--algorithm hybrid needs --base (a previous barycenter file)");
    support = hybrid_expand(inst, io::load_measure(a.base, a.scale), a.neighbors, guard);
  } else {
    support = build_support(inst, alg, a.t, a.seed, guard);
  }
  for (const auto& w : support.provenance.warnings) std::cerr << "warning: " << w << '\n';
  std::cerr << "candidate support: " << support.provenance.raw_count << " raw, " << support.size()
            << " distinct atoms\n";

  SolverLimits limits;
  limits.time_limit_seconds = a.time_limit;
  const BarycenterSolution sol = solve_restricted(inst, support.atoms, mode, limits);
  const double recomputed = eval_objective(inst, sol.measure);
  const bool optimal = sol.diagnostics.termination == Termination::kOptimal;
  if (optimal && !audit_ok(sol.value, recomputed)) {
    throw Error("self-audit failed: solver value " + std::to_string(sol.value) + ", recomputed " +
                std::to_string(recomputed));
  }
  const auto bound = bound_for(alg, inst, a.t);

  json meta = {{"algorithm", to_string(alg)},
               {"t", a.t},
               {"mode", to_string(sol.diagnostics.mode)},
               {"support_raw", support.provenance.raw_count},
               {"support_size", support.size()},
               {"value", recomputed},
               {"restricted_value", sol.value},
               {"lower_bound", sol.diagnostics.lower_bound},
               {"termination", to_string(sol.diagnostics.termination)}};
  if (a.seed) meta["seed"] = *a.seed;
  if (support.provenance.sampled) meta["sampled_indices"] = support.provenance.sampled->indices;
  if (bound) meta["ratio_bound"] = *bound;
  // v(S) <= bound * v* certifies v* >= v(S) / bound for the deterministic constructions.
  const bool certified = bound && !is_sampling(alg) && alg != SupportAlgorithm::kHybrid;
  if (certified) meta["optimum_lower_bound"] = sol.diagnostics.lower_bound / *bound;
  if (!a.scale.empty()) meta["scale"] = a.scale;

  if (!a.out.empty()) {
    if (fs::path(a.out).has_parent_path()) fs::create_directories(fs::path(a.out).parent_path());
    io::write_measure(a.out, sol.measure, meta.dump());
  }
  if (!a.render.path.empty()) render_to(a.render, sol.measure, a.scale);

  std::cerr << "value " << recomputed << " (" << to_string(sol.diagnostics.termination) << ", "
            << to_string(sol.diagnostics.mode) << ", " << sol.diagnostics.iterations << " iterations, "
            << sol.diagnostics.lp_pivots << " pivots, " << sol.diagnostics.wall_seconds << " s)\n";
  json summary = meta;
  summary["command"] = "barycenter";
  summary["iterations"] = sol.diagnostics.iterations;
  summary["lp_pivots"] = sol.diagnostics.lp_pivots;
  summary["wall_seconds"] = sol.diagnostics.wall_seconds;
  summary["barycenter_atoms"] = sol.measure.size();
  summary["audit"] = audit_ok(sol.value, recomputed) ? "ok" : "incumbent";
  emit(summary);
  return optimal ? kExitOptimal : kExitEarlyStop;
}

// ---------------------------------------------------------------------------

int cmd_exact(const std::string& instance, const std::string& out) {
  const BarycenterInstance inst = io::read_instance(instance);
  const ExactResult r = solve_exact(inst);
  const double recomputed = eval_objective(inst, r.barycenter);
  if (!audit_ok(r.value, recomputed)) {
    throw Error("self-audit failed: exact value " + std::to_string(r.value) + ", recomputed " +
                std::to_string(recomputed));
  }
  json meta = {{"algorithm", "exact"}, {"value", recomputed}, {"tuples", r.tuples_enumerated}};
  if (!out.empty()) io::write_measure(out, r.barycenter, meta.dump());
  std::cerr << "exact value " << recomputed << " over " << r.tuples_enumerated << " tuples\n";
  meta["command"] = "exact";
  meta["barycenter_atoms"] = r.barycenter.size();
  emit(meta);
  return kExitOptimal;
}

int cmd_distance(const std::string& a, const std::string& b, const std::vector<double>& scale) {
  const DiscreteMeasure ma = io::load_measure(a, scale);
  const DiscreteMeasure mb = io::load_measure(b, scale);
  const W2Result r = w2_squared(ma, mb);
  std::cerr << "W2^2 = " << r.value << '\n';
  emit({{"command", "distance"}, {"w2_squared", r.value}, {"w2", std::sqrt(r.value)},
        {"plan_entries", r.plan.entries.size()}});
  return kExitOptimal;
}

// ---------------------------------------------------------------------------

struct ClassifyArgs {
  std::vector<std::string> classes;
  std::vector<std::string> tests;
  std::vector<std::size_t> labels;
  std::vector<double> scale;
  std::string out;
};

int cmd_classify(const ClassifyArgs& a) {
  if (a.classes.size() < 2) throw InvalidInput("classification needs at least 2 classes");
  if (!a.labels.empty() && a.labels.size() != a.tests.size()) {
    throw InvalidInput("--label count must match --test count");
  }
  std::vector<DiscreteMeasure> centers;
  for (const auto& c : a.classes) centers.push_back(io::load_measure(c, a.scale));
  for (const auto& c : centers) {
    if (c.dim() != centers.front().dim()) throw InvalidInput("class barycenters differ in dimension");
  }
  const std::size_t C = centers.size();
  std::vector<std::vector<std::size_t>> confusion(C, std::vector<std::size_t>(C, 0));
  json items = json::array();
  std::ostringstream csv;
  csv << "test,assigned,distance,tie" << (a.labels.empty() ? "" : ",label") << '\n';
  std::size_t correct = 0, ties = 0;
  for (std::size_t t = 0; t < a.tests.size(); ++t) {
    const DiscreteMeasure m = io::load_measure(a.tests[t], a.scale);
    if (m.dim() != centers.front().dim()) {
      throw InvalidInput("test measure '" + a.tests[t] + "' has d=" + std::to_string(m.dim()) +
                         ", classes have d=" + std::to_string(centers.front().dim()));
    }
    std::vector<double> dist(C);
    for (std::size_t c = 0; c < C; ++c) dist[c] = w2_squared(centers[c], m).value;
    std::size_t best = 0;
    for (std::size_t c = 1; c < C; ++c) {
      if (dist[c] < dist[best]) best = c;
    }
    // Exact ties up to LP round-off go to the lowest class index and are flagged.
    bool tie = false;
    for (std::size_t c = 0; c < C; ++c) {
      if (c != best && std::abs(dist[c] - dist[best]) <= 1e-12 * (1.0 + dist[best])) tie = true;
    }
    ties += tie;
    json item = {{"test", a.tests[t]}, {"assigned", best}, {"distance", dist[best]}, {"distances", dist},
                 {"tie", tie}};
    csv << t << ',' << best << ',' << json(dist[best]).dump() << ',' << (tie ? 1 : 0);
    if (!a.labels.empty()) {
      const std::size_t label = a.labels[t];
      if (label >= C) throw InvalidInput("label " + std::to_string(label) + " is not a class index");
      ++confusion[label][best];
      correct += label == best;
      item["label"] = label;
      csv << ',' << label;
    }
    csv << '\n';
    std::cerr << a.tests[t] << " -> class " << best << (tie ? " (tie)" : "") << '\n';
    items.push_back(item);
  }
  json summary = {{"command", "classify"}, {"classes", C}, {"tests", a.tests.size()}, {"ties", ties},
                  {"assignments", items}};
  if (!a.labels.empty()) {
    summary["accuracy"] = a.tests.empty() ? 0.0 : static_cast<double>(correct) / static_cast<double>(a.tests.size());
    summary["confusion"] = confusion;  // rows: true class, columns: assigned class
  }
  if (!a.out.empty()) write_text(a.out, csv.str());
  emit(summary);
  return kExitOptimal;
}

int cmd_render(const std::string& measure, const RenderArgs& r, const std::vector<double>& scale) {
  const DiscreteMeasure m = io::load_measure(measure, scale);
  render_to(r, m, scale);
  emit({{"command", "render"}, {"out", r.path}, {"grid", r.grid}, {"mode", r.mode}, {"atoms", m.size()}});
  return kExitOptimal;
}

// ---------------------------------------------------------------------------

struct RatioArgs {
  bench::RatioSuiteConfig config;
  std::vector<std::string> weights{"general", "equal"};
  std::string mode = "auto";
  std::string out;
};

int cmd_bench_ratio(RatioArgs a) {
  a.config.weights.clear();
  for (const auto& w : a.weights) a.config.weights.push_back(bench::parse_weights_kind(w));
  a.config.mode = parse_solve_mode(a.mode);
  const bench::RatioReport report = bench::run_ratio_suite(a.config);
  const bench::RatioSummary s = report.summary();
  if (!a.out.empty()) {
    write_text(a.out + ".csv", report.to_csv());
    write_text(a.out + "_summary.csv", report.summary_csv());
  }
  std::cerr << report.summary_csv();
  emit({{"command", "bench-ratio"}, {"records", s.records}, {"asserted", s.asserted},
        {"violations", s.violations}, {"max_ratio", s.max_ratio}, {"mean_ratio", s.mean_ratio},
        {"max_audit_gap", s.max_audit_gap}});
  return s.violations == 0 ? kExitOptimal : kExitError;
}

struct EllipseArgs {
  bench::EllipseConfig config;
  std::string mode = "auto";
  std::string out;
  double time_limit = std::numeric_limits<double>::infinity();
};

int cmd_bench_ellipse(EllipseArgs a) {
  a.config.mode = parse_solve_mode(a.mode);
  a.config.limits.time_limit_seconds = a.time_limit;
  if (!a.out.empty()) a.config.render_dir = fs::path(a.out);
  const bench::EllipseReport report = bench::run_ellipse_pipeline(a.config);
  if (!a.out.empty()) write_text(fs::path(a.out) / "ellipse.csv", report.to_csv());
  json runs = json::array();
  bool early = false;
  for (const auto& r : report.runs) {
    std::cerr << "t=" << r.t << " " << to_string(r.mode) << ": |S|=" << r.support_size << " value " << r.value
              << " in " << r.seconds << " s\n";
    early = early || r.termination != Termination::kOptimal;
    runs.push_back({{"t", r.t}, {"mode", to_string(r.mode)}, {"support_size", r.support_size},
                    {"value", r.value}, {"audit_value", r.audit_value}, {"seconds", r.seconds},
                    {"termination", to_string(r.termination)}});
  }
  emit({{"command", "bench-ellipse"}, {"atoms_per_measure", report.atoms_per_measure}, {"runs", runs},
        {"monotone", report.monotone}, {"modes_agree", report.modes_agree}, {"mode_gap", report.mode_gap}});
  if (early) return kExitEarlyStop;
  return report.monotone && report.modes_agree ? kExitOptimal : kExitError;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Near-optimal discrete Wasserstein barycenters from reduced candidate supports"};
  app.require_subcommand(1);

  BarycenterArgs bary;
  auto* c_bary = app.add_subcommand("barycenter", "approximate barycenter on a candidate support");
  c_bary->add_option("instance", bary.instance, "instance file")->required();
  c_bary->add_option("--algorithm", bary.algorithm, "s1-sample, s1-enum, s2-sample, s2-enum, hybrid, union-exact");
  c_bary->add_option("--t", bary.t, "number of averaged measures");
  c_bary->add_option("--seed", bary.seed, "seed for the sampling variants");
  c_bary->add_option("--mode", bary.mode, "compact, colgen or auto");
  c_bary->add_option("--time-limit", bary.time_limit, "column generation time limit in seconds");
  c_bary->add_option("--out", bary.out, "barycenter measure file to write");
  c_bary->add_option("--scale", bary.scale, "per-coordinate scale used for .ppm inputs and rendering")->delimiter(',');
  c_bary->add_option("--base", bary.base, "previous barycenter to expand (hybrid)");
  c_bary->add_option("--neighbors", bary.neighbors, "nearest atoms per measure (hybrid)");
  c_bary->add_option("--max-atoms", bary.max_atoms, "candidate support guard");
  add_render_options(c_bary, bary.render, false);

  std::string exact_instance, exact_out;
  auto* c_exact = app.add_subcommand("exact", "exact barycenter of a tiny instance");
  c_exact->add_option("instance", exact_instance, "instance file")->required();
  c_exact->add_option("--out", exact_out, "barycenter measure file to write");

  std::string dist_a, dist_b;
  std::vector<double> dist_scale;
  auto* c_dist = app.add_subcommand("distance", "squared 2-Wasserstein distance");
  c_dist->add_option("a", dist_a, "first measure")->required();
  c_dist->add_option("b", dist_b, "second measure")->required();
  c_dist->add_option("--scale", dist_scale, "per-coordinate scale for .ppm inputs")->delimiter(',');

  ClassifyArgs cls;
  auto* c_cls = app.add_subcommand("classify", "nearest-barycenter classification");
  c_cls->add_option("--class", cls.classes, "class barycenter files, in class order")->required();
  c_cls->add_option("--test", cls.tests, "test measure files")->required();
  c_cls->add_option("--label", cls.labels, "true class index of each test measure");
  c_cls->add_option("--scale", cls.scale, "per-coordinate scale for .ppm inputs")->delimiter(',');
  c_cls->add_option("--out", cls.out, "assignment CSV to write");

  std::string render_measure;
  RenderArgs render;
  std::vector<double> render_scale;
  auto* c_render = app.add_subcommand("render", "render a measure to a pixmap");
  c_render->add_option("measure", render_measure, "measure file")->required();
  add_render_options(c_render, render, true);
  c_render->add_option("--scale", render_scale, "per-coordinate scale to undo")->delimiter(',');

  auto* c_bench = app.add_subcommand("bench", "experiments");
  c_bench->require_subcommand(1);
  RatioArgs ratio;
  auto* c_ratio = c_bench->add_subcommand("ratio", "certify approximation ratios against the exact oracle");
  c_ratio->add_option("--instances", ratio.config.instances, "instances per weights kind");
  c_ratio->add_option("--seed", ratio.config.seed, "suite seed");
  c_ratio->add_option("--k", ratio.config.ks, "measure counts")->delimiter(',');
  c_ratio->add_option("--n", ratio.config.ns, "atoms per measure")->delimiter(',');
  c_ratio->add_option("--d", ratio.config.ds, "dimensions")->delimiter(',');
  c_ratio->add_option("--t", ratio.config.ts, "t values")->delimiter(',');
  c_ratio->add_option("--weights", ratio.weights, "general and/or equal")->delimiter(',');
  c_ratio->add_option("--mc-repetitions", ratio.config.mc_repetitions, "Monte Carlo draws when enumeration is too large");
  c_ratio->add_option("--mode", ratio.mode, "compact, colgen or auto");
  c_ratio->add_option("--out", ratio.out, "report prefix (writes PREFIX.csv and PREFIX_summary.csv)");

  EllipseArgs ellipse;
  auto* c_ellipse = c_bench->add_subcommand("ellipse", "nested-ellipse barycenter pipeline");
  c_ellipse->add_option("--count", ellipse.config.count, "number of measures");
  c_ellipse->add_option("--grid", ellipse.config.grid, "grid size G");
  c_ellipse->add_option("--seed", ellipse.config.seed, "dataset seed");
  c_ellipse->add_option("--t", ellipse.config.ts, "t values")->delimiter(',');
  c_ellipse->add_option("--mode", ellipse.mode, "compact, colgen or auto");
  c_ellipse->add_option("--time-limit", ellipse.time_limit, "per-solve time limit in seconds");
  c_ellipse->add_option("--out", ellipse.out, "directory for report and renders");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitError;
  }

  try {
    if (*c_bary) return cmd_barycenter(bary);
    if (*c_exact) return cmd_exact(exact_instance, exact_out);
    if (*c_dist) return cmd_distance(dist_a, dist_b, dist_scale);
    if (*c_cls) return cmd_classify(cls);
    if (*c_render) return cmd_render(render_measure, render, render_scale);
    if (*c_ratio) return cmd_bench_ratio(ratio);
    if (*c_ellipse) return cmd_bench_ellipse(ellipse);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    emit({{"command", argc > 1 ? argv[1] : ""}, {"error", e.what()}});
    return kExitError;
  }
  return kExitError;
}
