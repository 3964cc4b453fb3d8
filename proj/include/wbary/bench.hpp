#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "wbary/core.hpp"
#include "wbary/oracle.hpp"
#include "wbary/solver.hpp"

namespace wbary::bench {

enum class WeightsKind { kEqual, kGeneral };
std::string to_string(WeightsKind w);
WeightsKind parse_weights_kind(const std::string& s);

/// k measures of n atoms uniform in [0,1]^d. Masses (and general weights) are
/// normalized standard exponentials, i.e. flat Dirichlet draws.
BarycenterInstance random_instance(std::size_t k, std::size_t n, std::size_t d, WeightsKind weights,
                                   std::uint64_t seed);

struct RatioRecord {
  std::size_t instance = 0;
  std::size_t k = 0, n = 0, d = 0;
  WeightsKind weights = WeightsKind::kEqual;
  std::size_t t = 0;
  /// s1-enum, s2-enum (per instance), s1-expect, s2-expect (exhaustive
  /// expectation), s1-mc, s2-mc (Monte Carlo mean, not asserted).
  std::string algorithm;
  double value = 0.0;    // v(S), or its expectation / sample mean
  double optimum = 0.0;  // v*
  double ratio = 0.0;
  double bound = 0.0;
  std::size_t support_size = 0;  // distinct atoms (enum) or index sets (expect / mc)
  bool asserted = true;
  bool pass = true;
  /// Largest eval_objective(recovered) - value seen behind this record.
  double audit_gap = 0.0;
};

struct RatioSummary {
  std::size_t records = 0;
  std::size_t asserted = 0;
  std::size_t violations = 0;
  double max_ratio = 0.0;
  double mean_ratio = 0.0;  // over asserted records
  double max_audit_gap = 0.0;
};

struct RatioReport {
  std::vector<RatioRecord> records;

  RatioSummary summary() const;
  std::string to_csv() const;
  std::string summary_csv() const;
};

struct RatioSuiteConfig {
  std::vector<std::size_t> ks{3, 4, 5};
  std::vector<std::size_t> ns{2, 3, 4};
  std::vector<std::size_t> ds{2};
  std::vector<std::size_t> ts{1, 2};
  std::vector<WeightsKind> weights{WeightsKind::kGeneral, WeightsKind::kEqual};
  /// Instances per weights kind; instance i cycles through the (k, n, d) grid.
  std::size_t instances = 100;
  std::uint64_t seed = 1;
  bool enumeration = true;
  bool expectation = true;
  /// Index sets up to which the expectation is enumerated exhaustively;
  /// beyond it a Monte Carlo mean over mc_repetitions draws is reported.
  std::size_t exhaustive_limit = 10'000;
  std::size_t mc_repetitions = 200;
  SolveMode mode = SolveMode::kAuto;
  std::size_t max_tuples = kExactTupleGuard;
};

/// Certifies the approximation bounds of every candidate construction against
/// solve_exact. Records are ordered by (weights kind, instance, t, algorithm).
RatioReport run_ratio_suite(const RatioSuiteConfig& config);

/// Ratio checks of one instance with a known optimum (appended to `out`).
void check_instance(const BarycenterInstance& inst, double optimum, std::size_t t,
                    const RatioSuiteConfig& config, RatioRecord base, std::vector<RatioRecord>& out);

/// E[v(S)] over every index set the sampler can draw, weighted by its
/// probability. Throws GuardExceeded past `limit` index sets.
double expected_s1_value(const BarycenterInstance& inst, std::size_t t, std::size_t limit,
                         SolveMode mode = SolveMode::kAuto, double* audit_gap = nullptr,
                         std::size_t* index_sets = nullptr);
double expected_s2_value(const BarycenterInstance& inst, std::size_t t, std::size_t limit,
                         SolveMode mode = SolveMode::kAuto, double* audit_gap = nullptr,
                         std::size_t* index_sets = nullptr);

struct EllipseConfig {
  std::size_t count = 10;
  std::size_t grid = 20;
  std::uint64_t seed = 1;
  std::vector<std::size_t> ts{1, 2};
  SolveMode mode = SolveMode::kAuto;
  /// Solve the smallest t with both compact LP and column generation.
  bool cross_check = true;
  SolverLimits limits;
  /// Rendered barycenters (and inputs) go here when set.
  std::optional<std::filesystem::path> render_dir;
};

struct EllipseRun {
  std::size_t t = 0;
  SolveMode mode = SolveMode::kCompact;
  std::size_t support_size = 0;
  std::size_t raw_count = 0;
  double value = 0.0;
  double lower_bound = 0.0;
  double audit_value = 0.0;  // eval_objective of the recovered barycenter
  std::size_t iterations = 0;
  std::size_t lp_pivots = 0;
  std::size_t barycenter_atoms = 0;
  Termination termination = Termination::kOptimal;
  double seconds = 0.0;
};

struct EllipseReport {
  std::vector<std::size_t> atoms_per_measure;
  std::vector<EllipseRun> runs;
  bool monotone = true;     // v non-increasing in t
  bool modes_agree = true;  // compact vs colgen within 1e-6 (1 + v)
  double mode_gap = 0.0;

  /// Deterministic: timings are left out.
  std::string to_csv() const;
};

EllipseReport run_ellipse_pipeline(const EllipseConfig& config);

}  // namespace wbary::bench
