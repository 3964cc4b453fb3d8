#include "wbary/candidates.hpp"

#include <algorithm>
#include <numeric>
#include <unordered_map>

#include "wbary/rng.hpp"

namespace wbary {

namespace {

struct KeyHash {
  std::size_t operator()(const std::vector<std::int64_t>& key) const {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (std::int64_t v : key) {
      h ^= static_cast<std::uint64_t>(v);
      h *= 0x100000001b3ULL;
      h ^= h >> 29;
    }
    return static_cast<std::size_t>(h);
  }
};

// Collects atoms in insertion order, dropping any whose dedup key was seen.
class AtomAccumulator {
 public:
  AtomAccumulator(std::size_t dim, const SupportGuard& guard) : atoms_(dim), guard_(guard) {}

  void add(std::span<const double> p) {
    if (++raw_ > guard_.max_raw) {
      throw GuardExceeded("candidate enumeration exceeded " + std::to_string(guard_.max_raw) +
                          " raw atoms");
    }
    if (seen_.try_emplace(dedup_key(p), atoms_.size()).second) {
      atoms_.push_back(p);
      if (atoms_.size() > guard_.max_atoms) {
        throw GuardExceeded("candidate support exceeded " + std::to_string(guard_.max_atoms) +
                            " distinct atoms");
      }
    }
  }

  CandidateSupport finish(SupportProvenance prov) && {
    prov.raw_count = raw_;
    return CandidateSupport{std::move(atoms_), std::move(prov)};
  }

 private:
  PointSet atoms_;
  const SupportGuard& guard_;
  std::size_t raw_ = 0;
  std::unordered_map<std::vector<std::int64_t>, std::size_t, KeyHash> seen_;
};

void check_t(const BarycenterInstance& inst, std::size_t t) {
  if (t < 1 || t > inst.k()) {
    throw InvalidInput("t must satisfy 1 <= t <= k (t=" + std::to_string(t) +
                       ", k=" + std::to_string(inst.k()) + ")");
  }
}

// Adds (1/t) sum_p x_p for every per-position atom choice over measures `indices`.
void add_averages(const BarycenterInstance& inst, std::span<const std::size_t> indices,
                  AtomAccumulator& acc) {
  const std::size_t d = inst.dim();
  const double t = static_cast<double>(indices.size());
  std::vector<std::size_t> sizes(indices.size());
  for (std::size_t p = 0; p < indices.size(); ++p) sizes[p] = inst.measure(indices[p]).size();
  std::vector<double> point(d);
  for_each_tuple(sizes, [&](const TupleIndex& choice) {
    std::fill(point.begin(), point.end(), 0.0);
    for (std::size_t p = 0; p < indices.size(); ++p) {
      const auto x = inst.measure(indices[p]).atom(choice[p]);
      for (std::size_t c = 0; c < d; ++c) point[c] += x[c];
    }
    for (double& v : point) v /= t;
    acc.add(point);
  });
}

void s2_warning(const BarycenterInstance& inst, SupportProvenance& prov) {
  if (!inst.has_equal_weights()) {
    prov.warnings.push_back(
        "subset construction used with unequal weights: the equal-weight approximation bound "
        "does not apply");
  }
}

}  // namespace

std::string to_string(SupportAlgorithm a) {
  switch (a) {
    case SupportAlgorithm::kS1Sample: return "s1-sample";
    case SupportAlgorithm::kS1Enum: return "s1-enum";
    case SupportAlgorithm::kS2Sample: return "s2-sample";
    case SupportAlgorithm::kS2Enum: return "s2-enum";
    case SupportAlgorithm::kHybrid: return "hybrid";
    case SupportAlgorithm::kUnionExact: return "union-exact";
  }
  return "unknown";
}

SupportAlgorithm parse_support_algorithm(const std::string& name) {
  for (auto a : {SupportAlgorithm::kS1Sample, SupportAlgorithm::kS1Enum, SupportAlgorithm::kS2Sample,
                 SupportAlgorithm::kS2Enum, SupportAlgorithm::kHybrid, SupportAlgorithm::kUnionExact}) {
    if (to_string(a) == name) return a;
  }
  throw InvalidInput("unknown support algorithm '" + name + "'");
}

bool is_sampling(SupportAlgorithm a) {
  return a == SupportAlgorithm::kS1Sample || a == SupportAlgorithm::kS2Sample;
}

SampledIndexSet sample_multiset(const BarycenterInstance& inst, std::size_t t, std::uint64_t seed) {
  check_t(inst, t);
  Rng rng(seed);
  SampledIndexSet set{{}, true};
  set.indices.reserve(t);
  for (std::size_t p = 0; p < t; ++p) set.indices.push_back(rng.categorical(inst.weights()));
  std::sort(set.indices.begin(), set.indices.end());
  return set;
}

SampledIndexSet sample_subset(std::size_t k, std::size_t t, std::uint64_t seed) {
  if (t < 1 || t > k) throw InvalidInput("t must satisfy 1 <= t <= k");
  Rng rng(seed);
  return SampledIndexSet{rng.subset(k, t), false};
}

CandidateSupport support_from_indices(const BarycenterInstance& inst, const SampledIndexSet& set,
                                      const SupportGuard& guard) {
  check_t(inst, set.indices.size());
  for (std::size_t i : set.indices) {
    if (i >= inst.k()) throw InvalidInput("sampled measure index out of range");
  }
  if (!set.with_repetition) {
    for (std::size_t p = 1; p < set.indices.size(); ++p) {
      if (set.indices[p] == set.indices[p - 1]) {
        throw InvalidInput("subset without repetition contains a repeated index");
      }
    }
  }
  AtomAccumulator acc(inst.dim(), guard);
  add_averages(inst, set.indices, acc);
  SupportProvenance prov;
  prov.algorithm = set.with_repetition ? SupportAlgorithm::kS1Sample : SupportAlgorithm::kS2Sample;
  prov.t = set.indices.size();
  prov.sampled = set;
  return std::move(acc).finish(std::move(prov));
}

CandidateSupport build_s1_sample(const BarycenterInstance& inst, std::size_t t, std::uint64_t seed,
                                 const SupportGuard& guard) {
  auto support = support_from_indices(inst, sample_multiset(inst, t, seed), guard);
  support.provenance.seed = seed;
  return support;
}

CandidateSupport build_s2_sample(const BarycenterInstance& inst, std::size_t t, std::uint64_t seed,
                                 const SupportGuard& guard) {
  check_t(inst, t);
  auto support = support_from_indices(inst, sample_subset(inst.k(), t, seed), guard);
  support.provenance.seed = seed;
  s2_warning(inst, support.provenance);
  return support;
}

CandidateSupport build_s1_enum(const BarycenterInstance& inst, std::size_t t,
                               const SupportGuard& guard) {
  check_t(inst, t);
  const std::size_t k = inst.k();
  AtomAccumulator acc(inst.dim(), guard);
  // Nondecreasing index tuples in lexicographic order.
  std::vector<std::size_t> idx(t, 0);
  while (true) {
    add_averages(inst, idx, acc);
    std::size_t p = t;
    while (p > 0 && idx[p - 1] == k - 1) --p;
    if (p == 0) break;
    const std::size_t v = ++idx[p - 1];
    for (std::size_t q = p; q < t; ++q) idx[q] = v;
  }
  SupportProvenance prov;
  prov.algorithm = SupportAlgorithm::kS1Enum;
  prov.t = t;
  return std::move(acc).finish(std::move(prov));
}

CandidateSupport build_s2_enum(const BarycenterInstance& inst, std::size_t t,
                               const SupportGuard& guard) {
  check_t(inst, t);
  const std::size_t k = inst.k();
  AtomAccumulator acc(inst.dim(), guard);
  // Strictly increasing index tuples in lexicographic order.
  std::vector<std::size_t> idx(t);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  while (true) {
    add_averages(inst, idx, acc);
    std::size_t p = t;
    while (p > 0 && idx[p - 1] == k - t + (p - 1)) --p;
    if (p == 0) break;
    ++idx[p - 1];
    for (std::size_t q = p; q < t; ++q) idx[q] = idx[q - 1] + 1;
  }
  SupportProvenance prov;
  prov.algorithm = SupportAlgorithm::kS2Enum;
  prov.t = t;
  s2_warning(inst, prov);
  return std::move(acc).finish(std::move(prov));
}

CandidateSupport build_exact_support(const BarycenterInstance& inst, const SupportGuard& guard) {
  if (inst.tuple_count() > guard.max_atoms) {
    throw GuardExceeded("exact support needs " + std::to_string(inst.tuple_count()) +
                        " tuples, above the guard of " + std::to_string(guard.max_atoms));
  }
  const std::size_t d = inst.dim();
  std::vector<std::size_t> sizes(inst.k());
  for (std::size_t i = 0; i < inst.k(); ++i) sizes[i] = inst.measure(i).size();
  AtomAccumulator acc(d, guard);
  std::vector<double> point(d);
  for_each_tuple(sizes, [&](const TupleIndex& tuple) {
    std::fill(point.begin(), point.end(), 0.0);
    for (std::size_t i = 0; i < tuple.size(); ++i) {
      const auto x = inst.measure(i).atom(tuple[i]);
      for (std::size_t c = 0; c < d; ++c) point[c] += inst.weight(i) * x[c];
    }
    acc.add(point);
  });
  SupportProvenance prov;
  prov.algorithm = SupportAlgorithm::kUnionExact;
  prov.t = inst.k();
  return std::move(acc).finish(std::move(prov));
}

CandidateSupport hybrid_expand(const BarycenterInstance& inst, const DiscreteMeasure& base,
                               std::size_t neighbors, const SupportGuard& guard) {
  if (base.dim() != inst.dim()) throw InvalidInput("hybrid_expand: dimension mismatch");
  PointSet active(inst.dim());
  for (std::size_t a = 0; a < base.size(); ++a) {
    if (base.mass(a) > 1e-12) active.push_back(base.atom(a));
  }
  if (active.empty()) throw InvalidInput("hybrid_expand: base barycenter has no active atom");

  SupportGuard pool_guard = guard;
  AtomAccumulator pool_acc(inst.dim(), pool_guard);
  for (std::size_t a = 0; a < active.size(); ++a) pool_acc.add(active[a]);
  std::vector<std::size_t> order;
  std::vector<double> dist;
  for (std::size_t a = 0; a < active.size(); ++a) {
    for (const DiscreteMeasure& m : inst.measures()) {
      const std::size_t take = std::min(neighbors, m.size());
      if (take == 0) continue;
      order.resize(m.size());
      dist.resize(m.size());
      std::iota(order.begin(), order.end(), std::size_t{0});
      for (std::size_t j = 0; j < m.size(); ++j) dist[j] = squared_distance(active[a], m.atom(j));
      std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(take), order.end(),
                        [&](std::size_t x, std::size_t y) {
                          return dist[x] < dist[y] || (dist[x] == dist[y] && x < y);
                        });
      for (std::size_t r = 0; r < take; ++r) pool_acc.add(m.atom(order[r]));
    }
  }
  CandidateSupport pool = std::move(pool_acc).finish({});

  AtomAccumulator acc(inst.dim(), guard);
  const PointSet& p = pool.atoms;
  for (std::size_t a = 0; a < p.size(); ++a) acc.add(p[a]);
  std::vector<double> mid(inst.dim());
  for (std::size_t a = 0; a < p.size(); ++a) {
    for (std::size_t b = a + 1; b < p.size(); ++b) {
      for (std::size_t c = 0; c < mid.size(); ++c) mid[c] = 0.5 * (p[a][c] + p[b][c]);
      acc.add(mid);
    }
  }
  SupportProvenance prov;
  prov.algorithm = SupportAlgorithm::kHybrid;
  prov.t = 2;
  return std::move(acc).finish(std::move(prov));
}

CandidateSupport build_support(const BarycenterInstance& inst, SupportAlgorithm algorithm,
                               std::size_t t, std::optional<std::uint64_t> seed,
                               const SupportGuard& guard) {
  if (is_sampling(algorithm) && !seed) {
    throw InvalidInput(to_string(algorithm) + " requires a seed");
  }
  switch (algorithm) {
    case SupportAlgorithm::kS1Sample: return build_s1_sample(inst, t, *seed, guard);
    case SupportAlgorithm::kS1Enum: return build_s1_enum(inst, t, guard);
    case SupportAlgorithm::kS2Sample: return build_s2_sample(inst, t, *seed, guard);
    case SupportAlgorithm::kS2Enum: return build_s2_enum(inst, t, guard);
    case SupportAlgorithm::kUnionExact: return build_exact_support(inst, guard);
    case SupportAlgorithm::kHybrid:
      throw InvalidInput("hybrid support needs a base barycenter; use hybrid_expand");
  }
  throw InvalidInput("unknown support algorithm");
}

}  // namespace wbary
