#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace wbary {

// Error hierarchy. Everything thrown by the library derives from Error.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidInput : public Error {
 public:
  using Error::Error;
};

// Raised when an enumeration or LP would exceed a configured size guard.
class GuardExceeded : public Error {
 public:
  using Error::Error;
};

/// Tolerance used for atom deduplication (coordinates are rounded to this grid).
inline constexpr double kDedupResolution = 1e-9;
/// Masses whose sum drifts from 1 by more than this are rejected.
inline constexpr double kMassDriftTolerance = 1e-9;

/// An owning point in R^d.
class Point {
 public:
  Point() = default;
  explicit Point(std::vector<double> coords) : coords_(std::move(coords)) {}
  Point(std::initializer_list<double> coords) : coords_(coords) {}
  explicit Point(std::span<const double> coords) : coords_(coords.begin(), coords.end()) {}

  std::size_t dim() const { return coords_.size(); }
  double operator[](std::size_t i) const { return coords_[i]; }
  double& operator[](std::size_t i) { return coords_[i]; }
  std::span<const double> coords() const { return coords_; }
  operator std::span<const double>() const { return coords_; }

  bool operator==(const Point&) const = default;

 private:
  std::vector<double> coords_;
};

/// Contiguous row-major storage for n points of common dimension d.
class PointSet {
 public:
  PointSet() = default;
  explicit PointSet(std::size_t dim) : dim_(dim) {}
  PointSet(std::size_t dim, std::vector<double> flat);
  static PointSet from_points(std::span<const Point> points);

  std::size_t dim() const { return dim_; }
  std::size_t size() const { return dim_ == 0 ? 0 : data_.size() / dim_; }
  bool empty() const { return data_.empty(); }

  std::span<const double> operator[](std::size_t i) const {
    return {data_.data() + i * dim_, dim_};
  }
  std::span<double> mutable_at(std::size_t i) { return {data_.data() + i * dim_, dim_}; }

  void push_back(std::span<const double> p);
  void reserve(std::size_t n) { data_.reserve(n * dim_); }
  const std::vector<double>& flat() const { return data_; }

 private:
  std::size_t dim_ = 0;
  std::vector<double> data_;
};

double squared_distance(std::span<const double> a, std::span<const double> b);

/// Integer key of a point after rounding every coordinate to kDedupResolution.
std::vector<std::int64_t> dedup_key(std::span<const double> p);

/// Merge atoms with equal dedup keys, keeping first-occurrence coordinates.
/// Returns the deduplicated set and, for each input atom, its output index.
std::pair<PointSet, std::vector<std::size_t>> dedup_points(const PointSet& points);

struct Violation {
  enum class Kind { kNegativeMass, kNonFiniteMass, kNonFiniteCoordinate, kSumDrift, kEmpty,
                    kDimensionMismatch, kLengthMismatch };
  Kind kind;
  std::size_t index = 0;  // offending atom (or 0 for whole-measure issues)
  double magnitude = 0.0;
  std::string describe() const;
};

struct ValidationReport {
  std::vector<Violation> violations;
  double mass_sum = 0.0;
  double drift = 0.0;        // |sum - 1|
  bool renormalized = false;  // drift was nonzero but within tolerance
  bool ok() const { return violations.empty(); }
  std::string describe() const;
};

/// Finitely supported probability measure. Immutable after construction.
class DiscreteMeasure {
 public:
  /// Validates, renormalizes (drift <= 1e-9) and merges duplicate atoms.
  /// Throws InvalidInput on any invariant violation.
  DiscreteMeasure(PointSet atoms, std::vector<double> masses);
  static DiscreteMeasure dirac(const Point& p);

  std::size_t dim() const { return atoms_.dim(); }
  std::size_t size() const { return masses_.size(); }
  const PointSet& atoms() const { return atoms_; }
  std::span<const double> atom(std::size_t j) const { return atoms_[j]; }
  const std::vector<double>& masses() const { return masses_; }
  double mass(std::size_t j) const { return masses_[j]; }
  /// Factor applied to the raw masses during construction (1/raw_sum).
  double normalization_factor() const { return normalization_factor_; }

 private:
  PointSet atoms_;
  std::vector<double> masses_;
  double normalization_factor_ = 1.0;
};

/// Inspect raw atoms/masses without constructing. Never throws.
ValidationReport validate_measure(const PointSet& atoms, std::span<const double> masses);
/// Same check on an already constructed measure.
ValidationReport validate_measure(const DiscreteMeasure& m);

/// k measures in a common dimension plus simplex weights lambda.
class BarycenterInstance {
 public:
  BarycenterInstance(std::vector<DiscreteMeasure> measures, std::vector<double> weights);
  static BarycenterInstance equal_weights(std::vector<DiscreteMeasure> measures);

  std::size_t k() const { return measures_.size(); }
  std::size_t dim() const { return measures_.front().dim(); }
  const DiscreteMeasure& measure(std::size_t i) const { return measures_[i]; }
  const std::vector<DiscreteMeasure>& measures() const { return measures_; }
  const std::vector<double>& weights() const { return weights_; }
  double weight(std::size_t i) const { return weights_[i]; }
  bool has_equal_weights() const { return equal_weights_; }

  /// Product of support sizes, saturating at SIZE_MAX.
  std::size_t tuple_count() const;
  std::size_t total_atoms() const;
  std::size_t max_support() const;

 private:
  std::vector<DiscreteMeasure> measures_;
  std::vector<double> weights_;
  bool equal_weights_ = false;
};

/// Index tuple (j_1, ..., j_k), one atom per input measure.
using TupleIndex = std::vector<std::uint32_t>;

/// Calls fn(tuple) for every tuple in lexicographic order (last index fastest).
template <typename Fn>
void for_each_tuple(std::span<const std::size_t> sizes, Fn&& fn) {
  TupleIndex idx(sizes.size(), 0);
  for (std::size_t s : sizes) {
    if (s == 0) return;
  }
  while (true) {
    fn(static_cast<const TupleIndex&>(idx));
    std::size_t pos = sizes.size();
    while (pos > 0) {
      --pos;
      if (++idx[pos] < sizes[pos]) break;
      idx[pos] = 0;
      if (pos == 0) return;
    }
    if (sizes.empty()) return;
  }
}

struct PointFit {
  Point location;  // weighted mean
  double cost = 0.0;
};

/// Weighted least-squares fit of a single location to k points:
/// w* = sum lambda_i x_i, c* = sum lambda_i |x_i - w*|^2.
PointFit fit_point(std::span<const Point> points, std::span<const double> weights);
PointFit fit_point(const PointSet& points, std::span<const double> weights);

/// sum lambda_i |x_i - w|^2
double fit_cost_against(std::span<const Point> points, std::span<const double> weights,
                        std::span<const double> w);
double fit_cost_against(const PointSet& points, std::span<const double> weights,
                        std::span<const double> w);

/// The tuple's points (x_{1 j_1}, ..., x_{k j_k}).
PointSet tuple_points(const BarycenterInstance& inst, const TupleIndex& tuple);

}  // namespace wbary
