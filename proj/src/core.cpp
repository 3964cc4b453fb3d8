#include "wbary/core.hpp"

#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <sstream>
#include <unordered_map>

namespace wbary {

namespace {

struct KeyHash {
  std::size_t operator()(const std::vector<std::int64_t>& key) const {
    std::uint64_t h = 1469598103934665603ULL;
    for (std::int64_t v : key) {
      h ^= static_cast<std::uint64_t>(v) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
    }
    return static_cast<std::size_t>(h);
  }
};

void check_weights(std::span<const double> weights, std::size_t k) {
  if (weights.size() != k) {
    throw InvalidInput("weight vector has length " + std::to_string(weights.size()) +
                       ", expected " + std::to_string(k));
  }
}

}  // namespace

PointSet::PointSet(std::size_t dim, std::vector<double> flat) : dim_(dim), data_(std::move(flat)) {
  if (dim_ == 0) throw InvalidInput("point dimension must be at least 1");
  if (data_.size() % dim_ != 0) throw InvalidInput("flat coordinate array is not a multiple of d");
}

PointSet PointSet::from_points(std::span<const Point> points) {
  if (points.empty()) return PointSet();
  PointSet out(points.front().dim());
  out.reserve(points.size());
  for (const Point& p : points) out.push_back(p.coords());
  return out;
}

void PointSet::push_back(std::span<const double> p) {
  if (dim_ == 0) dim_ = p.size();
  if (p.size() != dim_) {
    throw InvalidInput("dimension mismatch: point has d=" + std::to_string(p.size()) +
                       ", set has d=" + std::to_string(dim_));
  }
  data_.insert(data_.end(), p.begin(), p.end());
}

double squared_distance(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double diff = a[i] - b[i];
    s += diff * diff;
  }
  return s;
}

std::vector<std::int64_t> dedup_key(std::span<const double> p) {
  std::vector<std::int64_t> key(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) {
    key[i] = std::llround(p[i] / kDedupResolution);
  }
  return key;
}

std::pair<PointSet, std::vector<std::size_t>> dedup_points(const PointSet& points) {
  PointSet out(points.dim());
  std::vector<std::size_t> map(points.size());
  std::unordered_map<std::vector<std::int64_t>, std::size_t, KeyHash> seen;
  seen.reserve(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) {
    auto [it, inserted] = seen.try_emplace(dedup_key(points[i]), out.size());
    if (inserted) out.push_back(points[i]);
    map[i] = it->second;
  }
  return {std::move(out), std::move(map)};
}

std::string Violation::describe() const {
  std::ostringstream os;
  switch (kind) {
    case Kind::kNegativeMass: os << "negative mass " << magnitude << " at atom " << index; break;
    case Kind::kNonFiniteMass: os << "non-finite mass at atom " << index; break;
    case Kind::kNonFiniteCoordinate: os << "non-finite coordinate at atom " << index; break;
    case Kind::kSumDrift: os << "sum drift " << magnitude; break;
    case Kind::kEmpty: os << "measure has no atoms"; break;
    case Kind::kDimensionMismatch: os << "dimension mismatch at atom " << index; break;
    case Kind::kLengthMismatch:
      os << "mass vector length " << index << " does not match atom count " << magnitude;
      break;
  }
  return os.str();
}

std::string ValidationReport::describe() const {
  if (ok()) return "ok";
  std::string s;
  for (const Violation& v : violations) {
    if (!s.empty()) s += "; ";
    s += v.describe();
  }
  return s;
}

ValidationReport validate_measure(const PointSet& atoms, std::span<const double> masses) {
  ValidationReport report;
  using K = Violation::Kind;
  if (atoms.size() == 0 || masses.empty()) {
    report.violations.push_back({K::kEmpty, 0, 0.0});
    return report;
  }
  if (atoms.dim() == 0) {
    report.violations.push_back({K::kDimensionMismatch, 0, 0.0});
    return report;
  }
  if (atoms.size() != masses.size()) {
    report.violations.push_back(
        {K::kLengthMismatch, masses.size(), static_cast<double>(atoms.size())});
    return report;
  }
  double sum = 0.0;
  for (std::size_t j = 0; j < masses.size(); ++j) {
    if (!std::isfinite(masses[j])) {
      report.violations.push_back({K::kNonFiniteMass, j, masses[j]});
      continue;
    }
    if (masses[j] < 0.0) report.violations.push_back({K::kNegativeMass, j, masses[j]});
    sum += masses[j];
    for (double c : atoms[j]) {
      if (!std::isfinite(c)) {
        report.violations.push_back({K::kNonFiniteCoordinate, j, c});
        break;
      }
    }
  }
  report.mass_sum = sum;
  report.drift = std::abs(sum - 1.0);
  if (report.drift > kMassDriftTolerance) {
    report.violations.push_back({K::kSumDrift, 0, report.drift});
  } else {
    report.renormalized = report.drift > 0.0;
  }
  return report;
}

ValidationReport validate_measure(const DiscreteMeasure& m) {
  return validate_measure(m.atoms(), m.masses());
}

DiscreteMeasure::DiscreteMeasure(PointSet atoms, std::vector<double> masses) {
  const ValidationReport report = validate_measure(atoms, masses);
  if (!report.ok()) throw InvalidInput("invalid measure: " + report.describe());
  normalization_factor_ = 1.0 / report.mass_sum;

  auto [unique, map] = dedup_points(atoms);
  std::vector<double> merged(unique.size(), 0.0);
  for (std::size_t j = 0; j < masses.size(); ++j) merged[map[j]] += masses[j] * normalization_factor_;
  atoms_ = std::move(unique);
  masses_ = std::move(merged);
}

DiscreteMeasure DiscreteMeasure::dirac(const Point& p) {
  PointSet atoms(p.dim());
  atoms.push_back(p.coords());
  return DiscreteMeasure(std::move(atoms), {1.0});
}

BarycenterInstance::BarycenterInstance(std::vector<DiscreteMeasure> measures,
                                       std::vector<double> weights)
    : measures_(std::move(measures)), weights_(std::move(weights)) {
  if (measures_.empty()) throw InvalidInput("instance needs at least one measure");
  check_weights(weights_, measures_.size());
  const std::size_t d = measures_.front().dim();
  for (std::size_t i = 0; i < measures_.size(); ++i) {
    if (measures_[i].dim() != d) {
      throw InvalidInput("measure " + std::to_string(i) + " has dimension " +
                         std::to_string(measures_[i].dim()) + ", expected " + std::to_string(d));
    }
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < weights_.size(); ++i) {
    if (!std::isfinite(weights_[i]) || weights_[i] < 0.0) {
      throw InvalidInput("weight " + std::to_string(i) + " is negative or non-finite");
    }
    sum += weights_[i];
  }
  if (std::abs(sum - 1.0) > kMassDriftTolerance) {
    std::ostringstream os;
    os << "weights sum drift " << std::abs(sum - 1.0);
    throw InvalidInput(os.str());
  }
  if (sum != 1.0) {
    for (double& w : weights_) w /= sum;
  }
  const double uniform = 1.0 / static_cast<double>(weights_.size());
  equal_weights_ = true;
  for (double w : weights_) {
    if (std::abs(w - uniform) > 1e-12) equal_weights_ = false;
  }
}

BarycenterInstance BarycenterInstance::equal_weights(std::vector<DiscreteMeasure> measures) {
  const std::size_t k = measures.size();
  if (k == 0) throw InvalidInput("instance needs at least one measure");
  std::vector<double> weights(k, 1.0 / static_cast<double>(k));
  return BarycenterInstance(std::move(measures), std::move(weights));
}

std::size_t BarycenterInstance::tuple_count() const {
  std::size_t count = 1;
  for (const auto& m : measures_) {
    if (count > std::numeric_limits<std::size_t>::max() / m.size()) {
      return std::numeric_limits<std::size_t>::max();
    }
    count *= m.size();
  }
  return count;
}

std::size_t BarycenterInstance::total_atoms() const {
  std::size_t n = 0;
  for (const auto& m : measures_) n += m.size();
  return n;
}

std::size_t BarycenterInstance::max_support() const {
  std::size_t n = 0;
  for (const auto& m : measures_) n = std::max(n, m.size());
  return n;
}

PointFit fit_point(const PointSet& points, std::span<const double> weights) {
  check_weights(weights, points.size());
  if (points.size() == 0) throw InvalidInput("fit_point needs at least one point");
  const std::size_t d = points.dim();
  std::vector<double> mean(d, 0.0);
  for (std::size_t i = 0; i < points.size(); ++i) {
    for (std::size_t c = 0; c < d; ++c) mean[c] += weights[i] * points[i][c];
  }
  // Centered form: stays nonnegative and avoids cancellation in sum |x|^2 - |w|^2.
  double cost = 0.0;
  for (std::size_t i = 0; i < points.size(); ++i) cost += weights[i] * squared_distance(points[i], mean);
  return {Point(std::move(mean)), cost};
}

PointFit fit_point(std::span<const Point> points, std::span<const double> weights) {
  for (const Point& p : points) {
    if (p.dim() != points.front().dim()) throw InvalidInput("fit_point: dimension mismatch");
  }
  return fit_point(PointSet::from_points(points), weights);
}

double fit_cost_against(const PointSet& points, std::span<const double> weights,
                        std::span<const double> w) {
  check_weights(weights, points.size());
  if (w.size() != points.dim()) throw InvalidInput("fit_cost_against: dimension mismatch");
  double cost = 0.0;
  for (std::size_t i = 0; i < points.size(); ++i) cost += weights[i] * squared_distance(points[i], w);
  return cost;
}

double fit_cost_against(std::span<const Point> points, std::span<const double> weights,
                        std::span<const double> w) {
  for (const Point& p : points) {
    if (p.dim() != w.size()) throw InvalidInput("fit_cost_against: dimension mismatch");
  }
  return fit_cost_against(PointSet::from_points(points), weights, w);
}

PointSet tuple_points(const BarycenterInstance& inst, const TupleIndex& tuple) {
  PointSet pts(inst.dim());
  pts.reserve(tuple.size());
  for (std::size_t i = 0; i < tuple.size(); ++i) pts.push_back(inst.measure(i).atom(tuple[i]));
  return pts;
}

}  // namespace wbary
