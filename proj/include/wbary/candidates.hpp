#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "wbary/core.hpp"

namespace wbary {

enum class SupportAlgorithm { kS1Sample, kS1Enum, kS2Sample, kS2Enum, kHybrid, kUnionExact };

std::string to_string(SupportAlgorithm a);
/// Parses "s1-sample", "s1-enum", "s2-sample", "s2-enum", "hybrid", "union-exact".
SupportAlgorithm parse_support_algorithm(const std::string& name);
bool is_sampling(SupportAlgorithm a);

/// Measure indices drawn for one sampled support, sorted ascending.
struct SampledIndexSet {
  std::vector<std::size_t> indices;
  bool with_repetition = false;
};

struct SupportProvenance {
  SupportAlgorithm algorithm = SupportAlgorithm::kUnionExact;
  std::size_t t = 0;
  std::optional<std::uint64_t> seed;
  std::optional<SampledIndexSet> sampled;
  std::size_t raw_count = 0;  // atoms generated before deduplication
  std::vector<std::string> warnings;
};

/// Deduplicated candidate atoms for the barycenter.
struct CandidateSupport {
  PointSet atoms;
  SupportProvenance provenance;

  std::size_t size() const { return atoms.size(); }
};

struct SupportGuard {
  /// Maximum number of distinct atoms in a support.
  std::size_t max_atoms = 1'000'000;
  /// Maximum number of raw (pre-dedup) averages or tuples enumerated.
  std::size_t max_raw = 100'000'000;
};

/// t i.i.d. draws with Prob[T = i] = lambda_i.
SampledIndexSet sample_multiset(const BarycenterInstance& inst, std::size_t t, std::uint64_t seed);
/// Uniform size-t subset of [k] without repetition.
SampledIndexSet sample_subset(std::size_t k, std::size_t t, std::uint64_t seed);

/// All averages (1/t) sum_p x_p with x_p ranging over the support of measure
/// indices[p] (t = indices.size()).
CandidateSupport support_from_indices(const BarycenterInstance& inst, const SampledIndexSet& set,
                                      const SupportGuard& guard = {});

CandidateSupport build_s1_sample(const BarycenterInstance& inst, std::size_t t, std::uint64_t seed,
                                 const SupportGuard& guard = {});
CandidateSupport build_s1_enum(const BarycenterInstance& inst, std::size_t t,
                               const SupportGuard& guard = {});
CandidateSupport build_s2_sample(const BarycenterInstance& inst, std::size_t t, std::uint64_t seed,
                                 const SupportGuard& guard = {});
CandidateSupport build_s2_enum(const BarycenterInstance& inst, std::size_t t,
                               const SupportGuard& guard = {});
/// {sum_i lambda_i x_i} over all tuples: the support of an optimal barycenter.
CandidateSupport build_exact_support(const BarycenterInstance& inst, const SupportGuard& guard = {});

/// Active atoms of `base`, plus the `neighbors` nearest atoms of every input
/// measure around each of them, plus all pairwise midpoints of that pool.
CandidateSupport hybrid_expand(const BarycenterInstance& inst, const DiscreteMeasure& base,
                               std::size_t neighbors = 5, const SupportGuard& guard = {});

/// Builds the support named by `algorithm`; seed required for sampling variants.
CandidateSupport build_support(const BarycenterInstance& inst, SupportAlgorithm algorithm,
                               std::size_t t, std::optional<std::uint64_t> seed,
                               const SupportGuard& guard = {});

}  // namespace wbary
