#include "wbary/lp.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

namespace wbary::lp {

LinearProgram::LinearProgram(std::vector<double> rhs) : rhs_(std::move(rhs)) {}

std::size_t LinearProgram::add_column(double cost, std::span<const int> rows,
                                      std::span<const double> values) {
  if (rows.size() != values.size()) throw InvalidInput("column rows/values length mismatch");
  std::map<int, double> merged;
  for (std::size_t e = 0; e < rows.size(); ++e) {
    if (rows[e] < 0 || static_cast<std::size_t>(rows[e]) >= rhs_.size()) {
      throw InvalidInput("column row index " + std::to_string(rows[e]) + " out of range for " +
                         std::to_string(rhs_.size()) + " rows");
    }
    merged[rows[e]] += values[e];
  }
  for (auto [r, v] : merged) {
    if (v == 0.0) continue;
    row_index_.push_back(r);
    values_.push_back(v);
  }
  cost_.push_back(cost);
  col_start_.push_back(row_index_.size());
  return cost_.size() - 1;
}

void LinearProgram::add_columns(std::span<const Column> cols) {
  for (const Column& c : cols) add_column(c);
}

void LinearProgram::validate() const {
  std::vector<char> touched(rhs_.size(), 0);
  for (double b : rhs_) {
    if (!std::isfinite(b)) throw InvalidInput("non-finite right-hand side");
  }
  for (std::size_t j = 0; j < num_cols(); ++j) {
    if (!std::isfinite(cost_[j])) throw InvalidInput("non-finite objective coefficient");
    for (std::size_t e = col_start_[j]; e < col_start_[j + 1]; ++e) {
      if (!std::isfinite(values_[e])) throw InvalidInput("non-finite constraint coefficient");
      touched[row_index_[e]] = 1;
    }
  }
  for (std::size_t r = 0; r < rhs_.size(); ++r) {
    if (!touched[r]) throw InvalidInput("constraint row " + std::to_string(r) + " is all zero");
  }
}

LinearProgram add_columns(LinearProgram lp, std::span<const Column> cols) {
  lp.add_columns(cols);
  return lp;
}

std::string to_string(LpStatus s) {
  switch (s) {
    case LpStatus::kOptimal: return "optimal";
    case LpStatus::kInfeasible: return "infeasible";
    case LpStatus::kUnbounded: return "unbounded";
    case LpStatus::kIterationLimit: return "iteration-limit";
  }
  return "unknown";
}

namespace {

using SpMat = Eigen::SparseMatrix<double, Eigen::ColMajor, int>;
using Vec = Eigen::VectorXd;

constexpr double kDriveOutTol = 1e-8;

// Revised primal simplex on rows scaled so that b >= 0. Variables 0..n-1 are
// structural; n+r is the artificial for row r (column +e_r). The basis inverse
// is an LU factorization of a recent basis followed by a product-form eta file.
class Simplex {
 public:
  Simplex(const LinearProgram& lp, const LpOptions& opt)
      : lp_(lp), opt_(opt), m_(lp.num_rows()), n_(lp.num_cols()) {
    sign_.assign(m_, 1.0);
    b_.resize(static_cast<Eigen::Index>(m_));
    bmax_ = 0.0;
    for (std::size_t r = 0; r < m_; ++r) {
      const double v = lp.rhs()[r];
      if (v < 0) sign_[r] = -1.0;
      b_[static_cast<Eigen::Index>(r)] = std::abs(v);
      bmax_ = std::max(bmax_, std::abs(v));
    }
    position_.assign(n_ + m_, -1);
    // Sign-scaled copies of A by column and by row.
    col_start_.assign(n_ + 1, 0);
    std::vector<std::size_t> row_count(m_ + 1, 0);
    for (std::size_t v = 0; v < n_; ++v) {
      const auto rows = lp.column_rows(v);
      const auto vals = lp.column_values(v);
      for (std::size_t e = 0; e < rows.size(); ++e) {
        col_row_.push_back(rows[e]);
        col_val_.push_back(sign_[rows[e]] * vals[e]);
        ++row_count[rows[e] + 1];
      }
      col_start_[v + 1] = col_row_.size();
    }
    row_start_.assign(m_ + 1, 0);
    for (std::size_t r = 0; r < m_; ++r) row_start_[r + 1] = row_start_[r] + row_count[r + 1];
    row_col_.resize(col_row_.size());
    row_val_.resize(col_row_.size());
    std::vector<std::size_t> fill(row_start_.begin(), row_start_.end() - 1);
    for (std::size_t v = 0; v < n_; ++v) {
      for (std::size_t e = col_start_[v]; e < col_start_[v + 1]; ++e) {
        const std::size_t at = fill[static_cast<std::size_t>(col_row_[e])]++;
        row_col_[at] = static_cast<int>(v);
        row_val_[at] = col_val_[e];
      }
    }
    row_work_.assign(n_, 0.0);
  }

  LpSolution run() {
    const bool warm = try_warm_start();
    if (!warm) {
      cold_start();
      const Outcome p1 = iterate(/*phase=*/1);
      if (p1 == Outcome::kIterationLimit) return finish(LpStatus::kIterationLimit);
      double infeas = 0.0;
      for (std::size_t r = 0; r < m_; ++r) {
        if (is_artificial(basis_[r])) infeas += std::max(0.0, x_[static_cast<Eigen::Index>(r)]);
      }
      if (infeas > 10.0 * opt_.feasibility_tol * (1.0 + bmax_)) return finish(LpStatus::kInfeasible);
    }
    const Outcome p2 = iterate(/*phase=*/2);
    LpSolution out;
    switch (p2) {
      case Outcome::kOptimal: out = finish(LpStatus::kOptimal); break;
      case Outcome::kUnbounded: out = finish(LpStatus::kUnbounded); break;
      case Outcome::kIterationLimit: out = finish(LpStatus::kIterationLimit); break;
    }
    out.warm_started = warm;
    return out;
  }

 private:
  enum class Outcome { kOptimal, kUnbounded, kIterationLimit };

  struct Eta {
    Eigen::Index row;
    double pivot;
    std::vector<Eigen::Index> idx;
    std::vector<double> val;
  };

  bool is_artificial(std::size_t v) const { return v >= n_; }

  double cost(std::size_t v, int phase) const {
    if (phase == 1) return is_artificial(v) ? 1.0 : 0.0;
    return is_artificial(v) ? 0.0 : lp_.cost(v);
  }

  // y' a_v for the scaled column of variable v.
  double dot_column(std::size_t v, const Vec& y) const {
    if (is_artificial(v)) return y[static_cast<Eigen::Index>(v - n_)];
    double s = 0.0;
    for (std::size_t e = col_start_[v]; e < col_start_[v + 1]; ++e) s += col_val_[e] * y[col_row_[e]];
    return s;
  }

  Vec dense_column(std::size_t v) const {
    Vec a = Vec::Zero(static_cast<Eigen::Index>(m_));
    if (is_artificial(v)) {
      a[static_cast<Eigen::Index>(v - n_)] = 1.0;
      return a;
    }
    const auto rows = lp_.column_rows(v);
    const auto vals = lp_.column_values(v);
    for (std::size_t e = 0; e < rows.size(); ++e) a[rows[e]] = sign_[rows[e]] * vals[e];
    return a;
  }

  bool refactor() {
    etas_.clear();
    std::vector<Eigen::Triplet<double, int>> trips;
    for (std::size_t p = 0; p < m_; ++p) {
      const std::size_t v = basis_[p];
      if (is_artificial(v)) {
        trips.emplace_back(static_cast<int>(v - n_), static_cast<int>(p), 1.0);
        continue;
      }
      const auto rows = lp_.column_rows(v);
      const auto vals = lp_.column_values(v);
      for (std::size_t e = 0; e < rows.size(); ++e) {
        trips.emplace_back(rows[e], static_cast<int>(p), sign_[rows[e]] * vals[e]);
      }
    }
    SpMat B(static_cast<Eigen::Index>(m_), static_cast<Eigen::Index>(m_));
    B.setFromTriplets(trips.begin(), trips.end());
    B.makeCompressed();
    lu_.analyzePattern(B);
    lu_.factorize(B);
    if (lu_.info() != Eigen::Success) return false;
    good_basis_ = basis_;
    return true;
  }

  // A singular basis (a pivot on rounding noise) falls back to the last basis
  // that factored; the pivots since then are repeated with Bland's rule.
  void refactor_or_recover(bool& bland) {
    if (refactor()) {
      recompute_x();
      return;
    }
    if (++recoveries_ > 50) throw LpError("basis factorization failed repeatedly");
    for (std::size_t v : basis_) position_[v] = -1;
    basis_ = good_basis_;
    for (std::size_t p = 0; p < m_; ++p) position_[basis_[p]] = static_cast<long>(p);
    if (!refactor()) throw LpError("basis factorization failed");
    recompute_x();
    bland = true;
  }

  Vec ftran(const Vec& a) const {
    Vec x = lu_.solve(a);
    for (const Eta& e : etas_) {
      const double xr = x[e.row] / e.pivot;
      x[e.row] = xr;
      if (xr != 0.0) {
        for (std::size_t t = 0; t < e.idx.size(); ++t) x[e.idx[t]] -= e.val[t] * xr;
      }
    }
    return x;
  }

  Vec btran(Vec c) const {
    for (auto it = etas_.rbegin(); it != etas_.rend(); ++it) {
      double s = c[it->row];
      for (std::size_t t = 0; t < it->idx.size(); ++t) s -= it->val[t] * c[it->idx[t]];
      c[it->row] = s / it->pivot;
    }
    return lu_.transpose().solve(c);
  }

  void recompute_x() { x_ = ftran(b_); }

  void cold_start() {
    basis_.resize(m_);
    std::fill(position_.begin(), position_.end(), -1);
    for (std::size_t r = 0; r < m_; ++r) {
      basis_[r] = n_ + r;
      position_[n_ + r] = static_cast<long>(r);
    }
    if (!refactor()) throw LpError("failed to factor the identity basis");
    x_ = b_;
  }

  bool try_warm_start() {
    const Basis& wb = opt_.warm_basis;
    if (wb.size() != m_ || m_ == 0) return false;
    basis_.resize(m_);
    std::fill(position_.begin(), position_.end(), -1);
    for (std::size_t p = 0; p < m_; ++p) {
      std::size_t v;
      if (wb[p] >= 0) {
        if (static_cast<std::size_t>(wb[p]) >= n_) return false;
        v = static_cast<std::size_t>(wb[p]);
      } else {
        const std::size_t r = static_cast<std::size_t>(-wb[p] - 1);
        if (r >= m_) return false;
        v = n_ + r;
      }
      if (position_[v] != -1) return false;
      basis_[p] = v;
      position_[v] = static_cast<long>(p);
    }
    if (!refactor()) return false;
    recompute_x();
    for (std::size_t p = 0; p < m_; ++p) {
      const double xv = x_[static_cast<Eigen::Index>(p)];
      if (!std::isfinite(xv) || xv < -opt_.feasibility_tol) return false;
      if (is_artificial(basis_[p]) && xv > opt_.feasibility_tol) return false;
    }
    return true;
  }

  // Reduced costs of every structural variable from scratch (0 when basic).
  void price_all(int phase) {
    Vec cb(static_cast<Eigen::Index>(m_));
    for (std::size_t p = 0; p < m_; ++p) cb[static_cast<Eigen::Index>(p)] = cost(basis_[p], phase);
    const Vec y = btran(cb);
    d_.assign(n_, 0.0);
    candidates_.clear();
    candidate_slot_.assign(n_, kNoSlot);
    for (std::size_t v = 0; v < n_; ++v) {
      if (position_[v] != -1) continue;
      d_[v] = cost(v, phase) - dot_column(v, y);
      track(v, true);
    }
  }

  // Keeps `candidates_` equal to the nonbasic variables with d < -tol.
  void track(std::size_t v, bool nonbasic) {
    const bool attractive = nonbasic && d_[v] < -opt_.optimality_tol;
    const std::size_t slot = candidate_slot_[v];
    if (attractive && slot == kNoSlot) {
      candidate_slot_[v] = candidates_.size();
      candidates_.push_back(v);
    } else if (!attractive && slot != kNoSlot) {
      const std::size_t last = candidates_.back();
      candidates_[slot] = last;
      candidate_slot_[last] = slot;
      candidates_.pop_back();
      candidate_slot_[v] = kNoSlot;
    }
  }

  // Ties go to the lowest index, so the choice does not depend on list order.
  std::size_t choose_entering(bool bland) const {
    std::size_t entering = n_ + m_;
    double best = 0.0;
    for (std::size_t v : candidates_) {
      if (bland) {
        entering = std::min(entering, v);
        continue;
      }
      const double score = opt_.pricing == Pricing::kDevex ? d_[v] * d_[v] / weight_[v] : -d_[v];
      if (score > best || (score == best && v < entering)) {
        best = score;
        entering = v;
      }
    }
    return entering;
  }

  Outcome iterate(int phase) {
    std::size_t degenerate_run = 0;
    bool bland = false;
    bool verified = false;  // optimality confirmed on a fresh factorization
    price_all(phase);
    weight_.assign(n_, 1.0);
    std::size_t priced_at = pivots_;
    while (true) {
      if (pivots_ >= opt_.max_pivots) return Outcome::kIterationLimit;
      if (etas_.empty() && priced_at != pivots_) {
        // Fresh factorization: drop the drift of the incremental updates.
        price_all(phase);
        priced_at = pivots_;
      }
      // Artificials never re-enter.
      const std::size_t entering = choose_entering(bland);
      if (entering == n_ + m_) {
        if (!etas_.empty() && !verified) {
          refactor_or_recover(bland);
          price_all(phase);
          priced_at = pivots_;
          verified = true;
          continue;
        }
        return Outcome::kOptimal;
      }
      verified = false;

      const Vec alpha = ftran(dense_column(entering));
      const auto [leave, theta] = ratio_test(alpha, phase, bland);
      if (leave < 0) {
        if (phase == 2) return Outcome::kUnbounded;
        // Phase 1 is bounded below by 0; a missing blocking row is numerical noise.
        throw LpError("phase 1 reported an unbounded direction");
      }

      const auto r = static_cast<Eigen::Index>(leave);
      update_prices(entering, static_cast<std::size_t>(leave), alpha[r]);
      if (theta != 0.0) x_ -= theta * alpha;
      x_[r] = theta;

      if (theta <= 1e-12) {
        if (++degenerate_run > 10 * m_) bland = true;
      } else {
        degenerate_run = 0;
        bland = false;
      }

      Eta eta{r, alpha[r], {}, {}};
      for (Eigen::Index i = 0; i < alpha.size(); ++i) {
        if (i != r && alpha[i] != 0.0) {
          eta.idx.push_back(i);
          eta.val.push_back(alpha[i]);
        }
      }
      etas_.push_back(std::move(eta));

      position_[basis_[leave]] = -1;
      basis_[leave] = entering;
      position_[entering] = static_cast<long>(leave);
      ++pivots_;

      if (etas_.size() >= opt_.refactor_interval) {
        refactor_or_recover(bland);
      }
    }
  }

  // Row r of B^-1 A gives the change of every reduced cost (and Devex
  // weight) when q enters at basis position r.
  void update_prices(std::size_t q, std::size_t r, double alpha_rq) {
    Vec e = Vec::Zero(static_cast<Eigen::Index>(m_));
    e[static_cast<Eigen::Index>(r)] = 1.0;
    const Vec rho = btran(std::move(e));
    const double step = d_[q] / alpha_rq;
    const double wq = weight_[q];
    const bool devex = opt_.pricing == Pricing::kDevex;
    auto apply = [&](std::size_t v, double a) {
      d_[v] -= step * a;
      if (devex) {
        const double ratio = a / alpha_rq;
        weight_[v] = std::max(weight_[v], ratio * ratio * wq);
      }
      track(v, true);
    };
    std::size_t nz = 0;
    for (Eigen::Index i = 0; i < rho.size(); ++i) nz += rho[i] != 0.0;
    if (10 * nz < 7 * m_) {
      // Sparse rho: accumulate the pivot row through the rows it touches.
      touched_.clear();
      for (std::size_t i = 0; i < m_; ++i) {
        const double ri = rho[static_cast<Eigen::Index>(i)];
        if (ri == 0.0) continue;
        for (std::size_t t = row_start_[i]; t < row_start_[i + 1]; ++t) {
          const auto v = static_cast<std::size_t>(row_col_[t]);
          if (row_work_[v] == 0.0) touched_.push_back(v);
          row_work_[v] += ri * row_val_[t];
          if (row_work_[v] == 0.0) row_work_[v] = 1e-300;  // keep it marked
        }
      }
      for (std::size_t v : touched_) {
        const double a = row_work_[v];
        row_work_[v] = 0.0;
        if (position_[v] != -1 || v == q || std::abs(a) <= 1e-300) continue;
        apply(v, a);
      }
    } else {
      for (std::size_t v = 0; v < n_; ++v) {
        if (position_[v] != -1 || v == q) continue;
        const double a = dot_column(v, rho);
        if (a != 0.0) apply(v, a);
      }
    }
    const std::size_t leaving = basis_[r];
    if (!is_artificial(leaving)) {
      d_[leaving] = -step;
      weight_[leaving] = std::max(wq / (alpha_rq * alpha_rq), 1.0);
      track(leaving, true);
    }
    d_[q] = 0.0;
    track(q, false);
  }

  // Returns (leaving basis position or -1, step length).
  std::pair<long, double> ratio_test(const Vec& alpha, int phase, bool bland) const {
    const double ptol = opt_.pivot_tol;
    const double ftol = opt_.feasibility_tol;

    // Phase 2: basic artificials are fixed at zero and block any move. Entries
    // below kDriveOutTol are rounding noise (typically on redundant rows) and
    // must not be pivoted on.
    if (phase == 2) {
      long best = -1;
      double best_abs = std::max(ptol, kDriveOutTol * std::max(1.0, alpha.cwiseAbs().maxCoeff()));
      for (std::size_t p = 0; p < m_; ++p) {
        if (!is_artificial(basis_[p])) continue;
        const double a = std::abs(alpha[static_cast<Eigen::Index>(p)]);
        if (a > best_abs) {
          best_abs = a;
          best = static_cast<long>(p);
        }
      }
      if (best >= 0) return {best, 0.0};
    }

    if (bland) {
      double min_ratio = std::numeric_limits<double>::infinity();
      for (std::size_t p = 0; p < m_; ++p) {
        const double a = alpha[static_cast<Eigen::Index>(p)];
        if (a > ptol) min_ratio = std::min(min_ratio, std::max(0.0, x_[static_cast<Eigen::Index>(p)]) / a);
      }
      if (!std::isfinite(min_ratio)) return {-1, 0.0};
      long best = -1;
      for (std::size_t p = 0; p < m_; ++p) {
        const double a = alpha[static_cast<Eigen::Index>(p)];
        if (a <= ptol) continue;
        const double ratio = std::max(0.0, x_[static_cast<Eigen::Index>(p)]) / a;
        if (ratio <= min_ratio && (best < 0 || basis_[p] < basis_[best])) best = static_cast<long>(p);
      }
      return {best, min_ratio};
    }

    // Harris two-pass: relax bounds by ftol, then pick the largest pivot.
    double bound = std::numeric_limits<double>::infinity();
    for (std::size_t p = 0; p < m_; ++p) {
      const double a = alpha[static_cast<Eigen::Index>(p)];
      if (a > ptol) bound = std::min(bound, (x_[static_cast<Eigen::Index>(p)] + ftol) / a);
    }
    if (!std::isfinite(bound)) return {-1, 0.0};
    long best = -1;
    double best_a = 0.0;
    for (std::size_t p = 0; p < m_; ++p) {
      const double a = alpha[static_cast<Eigen::Index>(p)];
      if (a <= ptol) continue;
      if (x_[static_cast<Eigen::Index>(p)] / a <= bound && a > best_a) {
        best_a = a;
        best = static_cast<long>(p);
      }
    }
    return {best, std::max(0.0, x_[best] / best_a)};
  }

  LpSolution finish(LpStatus status) {
    LpSolution sol;
    sol.status = status;
    sol.pivots = pivots_;
    sol.primal.assign(n_, 0.0);
    for (std::size_t p = 0; p < m_; ++p) {
      const std::size_t v = basis_[p];
      if (is_artificial(v)) continue;
      double xv = x_[static_cast<Eigen::Index>(p)];
      if (xv < 0.0 && xv >= -opt_.feasibility_tol) xv = 0.0;
      sol.primal[v] = xv;
    }
    sol.objective = 0.0;
    for (std::size_t j = 0; j < n_; ++j) sol.objective += lp_.cost(j) * sol.primal[j];
    sol.basis.resize(m_);
    for (std::size_t p = 0; p < m_; ++p) {
      const std::size_t v = basis_[p];
      sol.basis[p] = is_artificial(v) ? -static_cast<int>(v - n_) - 1 : static_cast<int>(v);
    }
    if (status == LpStatus::kOptimal) {
      Vec cb(static_cast<Eigen::Index>(m_));
      for (std::size_t p = 0; p < m_; ++p) cb[static_cast<Eigen::Index>(p)] = cost(basis_[p], 2);
      const Vec y = btran(cb);
      sol.dual.resize(m_);
      for (std::size_t r = 0; r < m_; ++r) sol.dual[r] = sign_[r] * y[static_cast<Eigen::Index>(r)];
    }
    return sol;
  }

  const LinearProgram& lp_;
  const LpOptions& opt_;
  std::size_t m_;
  std::size_t n_;
  std::vector<double> sign_;
  Vec b_;
  double bmax_ = 0.0;
  std::vector<std::size_t> basis_;
  std::vector<long> position_;
  Vec x_;
  mutable Eigen::SparseLU<SpMat, Eigen::COLAMDOrdering<int>> lu_;
  std::vector<Eta> etas_;
  std::vector<std::size_t> good_basis_;
  std::vector<std::size_t> col_start_;
  std::vector<int> col_row_;
  std::vector<double> col_val_;
  std::vector<std::size_t> row_start_;
  std::vector<int> row_col_;
  std::vector<double> row_val_;
  std::vector<double> row_work_;
  std::vector<std::size_t> touched_;
  static constexpr std::size_t kNoSlot = static_cast<std::size_t>(-1);
  std::vector<std::size_t> candidates_;
  std::vector<std::size_t> candidate_slot_;
  std::vector<double> d_;       // reduced costs of structural variables
  std::vector<double> weight_;  // Devex reference weights
  std::size_t recoveries_ = 0;
  std::size_t pivots_ = 0;
};

LpSolution solve_without_rows(const LinearProgram& lp) {
  LpSolution sol;
  sol.primal.assign(lp.num_cols(), 0.0);
  sol.status = LpStatus::kOptimal;
  for (std::size_t j = 0; j < lp.num_cols(); ++j) {
    if (lp.cost(j) < 0.0) sol.status = LpStatus::kUnbounded;
  }
  return sol;
}

}  // namespace

LpSolution solve_lp(const LinearProgram& lp, const LpOptions& options) {
  if (lp.num_rows() == 0) return solve_without_rows(lp);
  lp.validate();
  Simplex simplex(lp, options);
  return simplex.run();
}

}  // namespace wbary::lp
