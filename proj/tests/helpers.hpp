#pragma once

#include <algorithm>
#include <cstddef>
#include <initializer_list>
#include <vector>

#include "wbary/core.hpp"

namespace wbary::testing {

inline DiscreteMeasure line_measure(std::vector<double> xs, std::vector<double> masses) {
  return DiscreteMeasure(PointSet(1, std::move(xs)), std::move(masses));
}

inline DiscreteMeasure dirac(std::initializer_list<double> p) { return DiscreteMeasure::dirac(Point(p)); }

// delta_0, delta_1, delta_2 on the line with equal weights.
inline BarycenterInstance three_diracs() {
  return BarycenterInstance::equal_weights({dirac({0.0}), dirac({1.0}), dirac({2.0})});
}

inline PointSet line_points(std::vector<double> xs) { return PointSet(1, std::move(xs)); }

// 1-d coordinates of a point set, sorted.
inline std::vector<double> sorted_coords(const PointSet& s) {
  std::vector<double> out(s.flat());
  std::sort(out.begin(), out.end());
  return out;
}

// Sorted flat keys of a point set, for set comparisons in any dimension.
inline std::vector<std::vector<std::int64_t>> key_set(const PointSet& s) {
  std::vector<std::vector<std::int64_t>> keys;
  for (std::size_t i = 0; i < s.size(); ++i) keys.push_back(dedup_key(s[i]));
  std::sort(keys.begin(), keys.end());
  keys.erase(std::unique(keys.begin(), keys.end()), keys.end());
  return keys;
}

inline bool subset_of(const PointSet& a, const PointSet& b) {
  const auto ka = key_set(a);
  const auto kb = key_set(b);
  return std::includes(kb.begin(), kb.end(), ka.begin(), ka.end());
}

}  // namespace wbary::testing
