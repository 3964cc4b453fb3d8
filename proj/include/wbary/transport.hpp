#pragma once

#include <cstddef>
#include <vector>

#include "wbary/core.hpp"

namespace wbary {

struct TransportEntry {
  std::size_t source = 0;
  std::size_t target = 0;
  double mass = 0.0;
};

/// Sparse coupling; entries below 1e-12 are dropped.
struct TransportPlan {
  std::vector<TransportEntry> entries;

  std::vector<double> source_marginal(std::size_t n_source) const;
  std::vector<double> target_marginal(std::size_t n_target) const;
};

/// Dense row-major matrix of squared distances.
struct CostMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> values;

  double operator()(std::size_t i, std::size_t j) const { return values[i * cols + j]; }
};

/// Entry (i, j) = |a_i - b_j|^2.
CostMatrix cost_matrix(const DiscreteMeasure& a, const DiscreteMeasure& b);

struct W2Result {
  double value = 0.0;
  TransportPlan plan;
};

/// Exact squared 2-Wasserstein distance via the transportation LP.
W2Result w2_squared(const DiscreteMeasure& a, const DiscreteMeasure& b);

/// sum_i lambda_i W2^2(mu, P_i): the barycenter objective of mu.
double eval_objective(const BarycenterInstance& inst, const DiscreteMeasure& mu);

}  // namespace wbary
