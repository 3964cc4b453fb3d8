#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "wbary/core.hpp"

namespace wbary::lp {

/// Thrown when the basis factorization breaks down numerically.
class LpError : public Error {
 public:
  using Error::Error;
};

struct Column {
  double cost = 0.0;
  std::vector<int> rows;
  std::vector<double> values;
};

/// min c'x  s.t.  Ax = b,  x >= 0.  Columns are stored compressed (CSC).
class LinearProgram {
 public:
  LinearProgram() = default;
  explicit LinearProgram(std::vector<double> rhs);

  std::size_t num_rows() const { return rhs_.size(); }
  std::size_t num_cols() const { return cost_.size(); }
  std::size_t num_nonzeros() const { return row_index_.size(); }

  /// Appends one column; duplicate row entries are summed. Returns its index.
  std::size_t add_column(double cost, std::span<const int> rows, std::span<const double> values);
  std::size_t add_column(const Column& col) { return add_column(col.cost, col.rows, col.values); }
  void add_columns(std::span<const Column> cols);

  const std::vector<double>& rhs() const { return rhs_; }
  double cost(std::size_t j) const { return cost_[j]; }
  std::span<const int> column_rows(std::size_t j) const {
    return {row_index_.data() + col_start_[j], col_start_[j + 1] - col_start_[j]};
  }
  std::span<const double> column_values(std::size_t j) const {
    return {values_.data() + col_start_[j], col_start_[j + 1] - col_start_[j]};
  }

  /// Throws InvalidInput when a row has no nonzero or a coefficient is not finite.
  void validate() const;

 private:
  std::vector<double> rhs_;
  std::vector<double> cost_;
  std::vector<std::size_t> col_start_{0};
  std::vector<int> row_index_;
  std::vector<double> values_;
};

/// Value-semantics variant: returns lp extended by cols.
LinearProgram add_columns(LinearProgram lp, std::span<const Column> cols);

enum class LpStatus { kOptimal, kInfeasible, kUnbounded, kIterationLimit };
std::string to_string(LpStatus s);

/// Basis entries: j >= 0 is structural column j, -(r+1) is the artificial of row r.
using Basis = std::vector<int>;

/// Entering-variable rule. Dantzig takes the most negative reduced cost;
/// Devex scales it by an approximate steepest-edge reference weight.
enum class Pricing { kDantzig, kDevex };

struct LpOptions {
  std::size_t max_pivots = 1'000'000;
  Pricing pricing = Pricing::kDantzig;
  double feasibility_tol = 1e-9;
  double optimality_tol = 1e-7;
  double pivot_tol = 1e-10;
  std::size_t refactor_interval = 100;
  /// Optional starting basis, e.g. LpSolution::basis of a previous solve of a
  /// prefix of the same columns. Ignored when not primal feasible.
  Basis warm_basis;
};

struct LpSolution {
  LpStatus status = LpStatus::kIterationLimit;
  std::vector<double> primal;
  std::vector<double> dual;  // one per equality row
  double objective = 0.0;
  std::size_t pivots = 0;
  bool warm_started = false;
  Basis basis;
};

LpSolution solve_lp(const LinearProgram& lp, const LpOptions& options = {});

}  // namespace wbary::lp
