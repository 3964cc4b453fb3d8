#include "doctest.h"

#include <random>
#include <vector>

#include "helpers.hpp"
#include "wbary/bench.hpp"
#include "wbary/candidates.hpp"

using namespace wbary;
using namespace wbary::testing;

using V = std::vector<double>;

TEST_CASE("algorithm names round-trip") {
  for (auto a : {SupportAlgorithm::kS1Sample, SupportAlgorithm::kS1Enum, SupportAlgorithm::kS2Sample,
                 SupportAlgorithm::kS2Enum, SupportAlgorithm::kHybrid, SupportAlgorithm::kUnionExact}) {
    CHECK(parse_support_algorithm(to_string(a)) == a);
  }
  CHECK_THROWS_AS(parse_support_algorithm("s3-enum"), InvalidInput);
}

TEST_CASE("s1 sample examples") {
  const BarycenterInstance inst = three_diracs();
  SUBCASE("t=1 gives the support of the drawn measure") {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      const CandidateSupport s = build_s1_sample(inst, 1, seed);
      REQUIRE(s.provenance.sampled.has_value());
      const std::size_t i = s.provenance.sampled->indices.at(0);
      CHECK(sorted_coords(s.atoms) == V{static_cast<double>(i)});
    }
  }
  SUBCASE("t=k=2 with one atom each") {
    const BarycenterInstance two = BarycenterInstance::equal_weights({dirac({0.0}), dirac({2.0})});
    const CandidateSupport s = support_from_indices(two, {{0, 1}, true});
    CHECK(sorted_coords(s.atoms) == V{1.0});
  }
  SUBCASE("indices 1 and 3 give the midpoint") {
    const CandidateSupport s = support_from_indices(inst, {{0, 2}, true});
    CHECK(sorted_coords(s.atoms) == V{1.0});
  }
  CHECK_THROWS_AS(build_s1_sample(inst, 0, 1), InvalidInput);
  CHECK_THROWS_AS(build_s1_sample(inst, 4, 1), InvalidInput);
}

TEST_CASE("s1 enum examples") {
  const BarycenterInstance inst = three_diracs();
  CHECK(sorted_coords(build_s1_enum(inst, 1).atoms) == V{0.0, 1.0, 2.0});
  CHECK(sorted_coords(build_s1_enum(inst, 2).atoms) == V{0.0, 0.5, 1.0, 1.5, 2.0});

  const DiscreteMeasure m = line_measure({0.3, 0.1, 0.7}, {0.2, 0.3, 0.5});
  const BarycenterInstance single = BarycenterInstance::equal_weights({m});
  CHECK(build_s1_enum(single, 1).atoms.flat() == m.atoms().flat());
  CHECK_THROWS_AS(build_s1_enum(inst, 4), InvalidInput);
}

TEST_CASE("s2 examples") {
  const BarycenterInstance inst = three_diracs();
  CHECK(sorted_coords(build_s2_enum(inst, 2).atoms) == V{0.5, 1.0, 1.5});
  CHECK(sorted_coords(build_s2_enum(inst, 3).atoms) == V{1.0});
  CHECK(sorted_coords(build_s2_enum(inst, 1).atoms) == sorted_coords(build_s1_enum(inst, 1).atoms));
  CHECK(sorted_coords(support_from_indices(inst, {{1}, false}).atoms) == V{1.0});
  CHECK(sorted_coords(support_from_indices(inst, {{0, 2}, false}).atoms) == V{1.0});
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    CHECK(sorted_coords(build_s2_sample(inst, 3, seed).atoms) == V{1.0});
  }
}

TEST_CASE("s2 on unequal weights warns") {
  const BarycenterInstance inst({dirac({0.0}), dirac({1.0})}, {0.3, 0.7});
  const CandidateSupport s = build_s2_enum(inst, 1);
  CHECK_FALSE(s.provenance.warnings.empty());
  CHECK(build_s1_enum(inst, 1).provenance.warnings.empty());
}

TEST_CASE("exact support examples") {
  const BarycenterInstance pair = BarycenterInstance::equal_weights({dirac({0.0}), dirac({2.0})});
  CHECK(sorted_coords(build_exact_support(pair).atoms) == V{1.0});
  CHECK(sorted_coords(build_exact_support(three_diracs()).atoms) == V{1.0});
  const DiscreteMeasure m = line_measure({0.0, 1.0}, {0.5, 0.5});
  const BarycenterInstance two = BarycenterInstance::equal_weights({m, m});
  const CandidateSupport s = build_exact_support(two);
  CHECK(sorted_coords(s.atoms) == V{0.0, 0.5, 1.0});
  CHECK(s.provenance.raw_count == 4);
}

TEST_CASE("hybrid examples") {
  SUBCASE("one active atom, one single-atom measure") {
    const BarycenterInstance inst = BarycenterInstance::equal_weights({dirac({4.0})});
    const CandidateSupport s = hybrid_expand(inst, dirac({0.0}), 5);
    CHECK(sorted_coords(s.atoms) == V{0.0, 2.0, 4.0});
  }
  SUBCASE("neighbors = 0") {
    const BarycenterInstance inst = three_diracs();
    const DiscreteMeasure base = line_measure({0.0, 1.0}, {0.5, 0.5});
    CHECK(sorted_coords(hybrid_expand(inst, base, 0).atoms) == V{0.0, 0.5, 1.0});
  }
  SUBCASE("three Diracs, neighbors = 1") {
    const CandidateSupport s = hybrid_expand(three_diracs(), dirac({1.0}), 1);
    CHECK(sorted_coords(s.atoms) == V{0.0, 0.5, 1.0, 1.5, 2.0});
  }
}

TEST_CASE("guards fail loudly") {
  const BarycenterInstance inst = bench::random_instance(4, 4, 2, bench::WeightsKind::kEqual, 3);
  SupportGuard guard;
  guard.max_atoms = 10;
  CHECK_THROWS_AS(build_s1_enum(inst, 2, guard), GuardExceeded);
  guard = {};
  guard.max_raw = 20;
  CHECK_THROWS_AS(build_exact_support(inst, guard), GuardExceeded);
}

TEST_CASE("inclusion properties on random instances") {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const std::size_t k = 2 + seed % 3;
    const auto kind = seed % 2 ? bench::WeightsKind::kEqual : bench::WeightsKind::kGeneral;
    const BarycenterInstance inst = bench::random_instance(k, 2 + seed % 2, 2, kind, seed);
    CAPTURE(seed);
    for (std::size_t t = 1; t <= std::min<std::size_t>(k, 2); ++t) {
      const CandidateSupport s1 = build_s1_enum(inst, t);
      CHECK(subset_of(build_s2_enum(inst, t).atoms, s1.atoms));
      if (2 * t <= k) CHECK(subset_of(s1.atoms, build_s1_enum(inst, 2 * t).atoms));
      const CandidateSupport s2s = build_s2_sample(inst, t, seed);
      CHECK(subset_of(s2s.atoms, build_s2_enum(inst, t).atoms));
      CHECK(subset_of(build_s1_sample(inst, t, seed).atoms, s1.atoms));
    }
    if (kind == bench::WeightsKind::kEqual) {
      CHECK(key_set(build_s2_enum(inst, k).atoms) == key_set(build_exact_support(inst).atoms));
    }
  }
}

TEST_CASE("sampling is deterministic per seed") {
  const BarycenterInstance inst = bench::random_instance(5, 3, 2, bench::WeightsKind::kGeneral, 8);
  for (std::uint64_t seed : {0ull, 1ull, 123456789ull}) {
    const CandidateSupport a = build_s1_sample(inst, 2, seed), b = build_s1_sample(inst, 2, seed);
    CHECK(a.atoms.flat() == b.atoms.flat());
    CHECK(a.provenance.sampled->indices == b.provenance.sampled->indices);
    const CandidateSupport c = build_s2_sample(inst, 3, seed), e = build_s2_sample(inst, 3, seed);
    CHECK(c.atoms.flat() == e.atoms.flat());
    CHECK(c.provenance.sampled->indices.size() == 3);
  }
  CHECK_THROWS_AS(build_support(inst, SupportAlgorithm::kS1Sample, 2, std::nullopt), InvalidInput);
}

TEST_CASE("sampling laws") {
  // i.i.d. categorical draws follow lambda; subsets are uniform.
  const BarycenterInstance inst({dirac({0.0}), dirac({1.0}), dirac({2.0})}, {0.2, 0.3, 0.5});
  std::vector<double> freq(3, 0.0);
  const int draws = 20000;
  for (int s = 0; s < draws; ++s) freq[sample_multiset(inst, 1, s).indices[0]] += 1.0 / draws;
  CHECK(freq[0] == doctest::Approx(0.2).epsilon(0.1));
  CHECK(freq[1] == doctest::Approx(0.3).epsilon(0.1));
  CHECK(freq[2] == doctest::Approx(0.5).epsilon(0.1));

  std::vector<double> pairs(3, 0.0);
  for (int s = 0; s < draws; ++s) {
    const auto idx = sample_subset(3, 2, s).indices;
    REQUIRE(idx.size() == 2);
    CHECK(idx[0] < idx[1]);
    pairs[3 - idx[0] - idx[1]] += 1.0 / draws;
  }
  for (double p : pairs) CHECK(p == doctest::Approx(1.0 / 3.0).epsilon(0.1));
}

TEST_CASE("dedup idempotence") {
  const BarycenterInstance inst = bench::random_instance(3, 3, 2, bench::WeightsKind::kEqual, 4);
  const CandidateSupport s = build_s1_enum(inst, 2);
  const auto [again, map] = dedup_points(s.atoms);
  CHECK(again.flat() == s.atoms.flat());
  CHECK(s.provenance.raw_count >= s.size());
}
