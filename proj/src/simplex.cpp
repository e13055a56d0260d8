#include "wnopt/simplex.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "wnopt/error.hpp"

namespace wnopt {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kRatioPivot = 1e-9;
constexpr std::size_t kDegenerateRunBeforeBland = 50;

class Tableau {
 public:
  Tableau(std::size_t rows, std::size_t cols) : m_(rows), n_(cols), data_(rows * cols, 0.0) {}

  double& at(std::size_t i, std::size_t j) { return data_[i * n_ + j]; }
  double at(std::size_t i, std::size_t j) const { return data_[i * n_ + j]; }
  double* row(std::size_t i) { return data_.data() + i * n_; }
  std::size_t rows() const { return m_; }
  std::size_t cols() const { return n_; }

 private:
  std::size_t m_;
  std::size_t n_;
  std::vector<double> data_;
};

enum class PhaseOutcome { Optimal, Unbounded };

class Solver {
 public:
  Solver(const LpProblem& lp, const SimplexTolerances& tol) : lp_(lp), tol_(tol) {}

  LpResult run() {
    LpResult result;
    if (!setup()) {
      result.status = LpStatus::Infeasible;
      return result;
    }

    if (artificial_count_ > 0) {
      std::vector<double> phase1(cols_, 0.0);
      for (std::size_t j = artificial_begin_; j < cols_; ++j) phase1[j] = 1.0;
      reset_reduced_costs(phase1);
      iterate(/*allow_artificial=*/true);
      double infeasibility = 0.0;
      for (std::size_t i = 0; i < rows_; ++i) {
        if (basis_[i] >= artificial_begin_) infeasibility += std::max(0.0, beta_[i]);
      }
      if (infeasibility > tol_.feasibility * (1.0 + rhs_scale_)) {
        result.status = LpStatus::Infeasible;
        result.iterations = iterations_;
        return result;
      }
      drive_out_artificials();
    }

    std::vector<double> phase2(cols_, 0.0);
    for (std::size_t j = 0; j < lp_.cost.size(); ++j) phase2[j] = lp_.cost[j];
    reset_reduced_costs(phase2);
    bland_ = false;
    degenerate_run_ = 0;
    if (iterate(/*allow_artificial=*/false) == PhaseOutcome::Unbounded) {
      result.status = LpStatus::Unbounded;
      result.iterations = iterations_;
      return result;
    }

    std::vector<double> shifted(cols_, 0.0);
    for (std::size_t j = 0; j < cols_; ++j) shifted[j] = at_upper_[j] ? upper_[j] : 0.0;
    for (std::size_t i = 0; i < rows_; ++i) shifted[basis_[i]] = beta_[i];
    const auto n = lp_.lower.size();
    result.x.resize(n);
    result.objective = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      double v = lp_.lower[j] + std::max(0.0, shifted[j]);
      if (std::isfinite(lp_.upper[j])) v = std::min(v, lp_.upper[j]);
      result.x[j] = v;
      result.objective += lp_.cost[j] * v;
    }
    result.status = LpStatus::Optimal;
    result.iterations = iterations_;
    return result;
  }

 private:
  // Returns false when the problem is trivially infeasible.
  bool setup() {
    const auto n = lp_.lower.size();
    if (lp_.upper.size() != n || lp_.cost.size() != n) {
      throw Error(ErrorCode::InvalidArgument, "LP bound and cost vectors differ in length");
    }
    for (std::size_t j = 0; j < n; ++j) {
      if (!std::isfinite(lp_.lower[j]) || std::isnan(lp_.upper[j]) || !std::isfinite(lp_.cost[j])) {
        throw Error(ErrorCode::InvalidArgument, "LP column " + std::to_string(j) + " has non-finite data");
      }
      if (lp_.upper[j] < lp_.lower[j] - tol_.feasibility) return false;
    }

    struct Normalized {
      std::vector<std::pair<std::size_t, double>> terms;
      bool equality;
      double slack_sign;  // +1 or -1 for inequalities
      double rhs;
    };
    std::vector<Normalized> rows;
    for (const auto& r : lp_.rows) {
      if (!std::isfinite(r.rhs)) throw Error(ErrorCode::InvalidArgument, "LP row has non-finite right-hand side");
      Normalized nr;
      nr.rhs = r.rhs;
      for (const auto& [j, a] : r.terms) {
        if (j >= n || !std::isfinite(a)) throw Error(ErrorCode::InvalidArgument, "LP row has an invalid term");
        if (a == 0.0) continue;
        nr.terms.push_back({j, a});
        nr.rhs -= a * lp_.lower[j];
      }
      double sign = r.sense == RowSense::GreaterEqual ? -1.0 : 1.0;
      nr.equality = r.sense == RowSense::Equal;
      if (nr.terms.empty()) {
        const double v = -nr.rhs * (r.sense == RowSense::GreaterEqual ? -1.0 : 1.0);
        const double slack = r.sense == RowSense::Equal ? std::fabs(nr.rhs) : std::max(0.0, v);
        if (slack > tol_.feasibility * (1.0 + std::fabs(r.rhs))) return false;
        continue;
      }
      for (auto& t : nr.terms) t.second *= sign;
      nr.rhs *= sign;
      nr.slack_sign = 1.0;
      if (nr.rhs < 0.0) {
        for (auto& t : nr.terms) t.second = -t.second;
        nr.rhs = -nr.rhs;
        nr.slack_sign = -1.0;
      }
      rows.push_back(std::move(nr));
    }

    rows_ = rows.size();
    std::size_t slacks = 0;
    for (const auto& r : rows) {
      if (!r.equality) ++slacks;
      if (r.equality || r.slack_sign < 0) ++artificial_count_;
    }
    artificial_begin_ = n + slacks;
    cols_ = artificial_begin_ + artificial_count_;
    tableau_ = Tableau(rows_, cols_);
    upper_.assign(cols_, kInf);
    for (std::size_t j = 0; j < n; ++j) upper_[j] = lp_.upper[j] - lp_.lower[j];
    at_upper_.assign(cols_, false);
    beta_.assign(rows_, 0.0);
    basis_.assign(rows_, 0);

    std::size_t slack = n;
    std::size_t artificial = artificial_begin_;
    for (std::size_t i = 0; i < rows_; ++i) {
      const auto& r = rows[i];
      for (const auto& [j, a] : r.terms) tableau_.at(i, j) += a;
      beta_[i] = r.rhs;
      rhs_scale_ = std::max(rhs_scale_, r.rhs);
      if (!r.equality) {
        tableau_.at(i, slack) = r.slack_sign;
        if (r.slack_sign > 0) basis_[i] = slack;
        ++slack;
      }
      if (r.equality || r.slack_sign < 0) {
        tableau_.at(i, artificial) = 1.0;
        basis_[i] = artificial;
        ++artificial;
      }
    }
    is_basic_.assign(cols_, false);
    for (auto b : basis_) is_basic_[b] = true;
    return true;
  }

  void reset_reduced_costs(const std::vector<double>& cost) {
    reduced_ = cost;
    for (std::size_t i = 0; i < rows_; ++i) {
      const double cb = cost[basis_[i]];
      if (cb == 0.0) continue;
      const double* row = tableau_.row(i);
      for (std::size_t j = 0; j < cols_; ++j) reduced_[j] -= cb * row[j];
    }
  }

  std::size_t iteration_cap() const { return 1000 + 200 * (rows_ + cols_); }

  PhaseOutcome iterate(bool allow_artificial) {
    const std::size_t limit = allow_artificial ? cols_ : artificial_begin_;
    while (true) {
      if (++iterations_ > iteration_cap()) {
        throw Error(ErrorCode::NumericalBreakdown, "simplex iteration limit reached");
      }
      // Pricing.
      std::size_t entering = cols_;
      double best = 0.0;
      for (std::size_t j = 0; j < limit; ++j) {
        if (is_basic_[j] || upper_[j] <= 0.0) continue;
        const double d = reduced_[j];
        const bool improves = at_upper_[j] ? d > tol_.optimality : d < -tol_.optimality;
        if (!improves) continue;
        if (bland_) {
          entering = j;
          break;
        }
        if (std::fabs(d) > best) {
          best = std::fabs(d);
          entering = j;
        }
      }
      if (entering == cols_) return PhaseOutcome::Optimal;

      const double dir = at_upper_[entering] ? -1.0 : 1.0;
      // Ratio test.
      std::size_t leave_row = rows_;
      double step = kInf;
      bool leave_to_upper = false;
      double leave_pivot = 0.0;
      for (std::size_t i = 0; i < rows_; ++i) {
        const double alpha = tableau_.at(i, entering);
        if (std::fabs(alpha) <= kRatioPivot) continue;
        const double g = dir * alpha;
        double bound;
        bool to_upper;
        if (g > 0) {
          bound = std::max(0.0, beta_[i]) / g;
          to_upper = false;
        } else {
          const double ub = upper_[basis_[i]];
          if (!std::isfinite(ub)) continue;
          bound = std::max(0.0, ub - beta_[i]) / -g;
          to_upper = true;
        }
        bool take = false;
        if (bound < step - 1e-12) {
          take = true;
        } else if (bound <= step + 1e-12 && leave_row < rows_) {
          take = bland_ ? basis_[i] < basis_[leave_row] : std::fabs(alpha) > std::fabs(leave_pivot);
        }
        if (take) {
          step = std::min(step, bound);
          leave_row = i;
          leave_to_upper = to_upper;
          leave_pivot = alpha;
        }
      }

      const double own = upper_[entering];
      if (!std::isfinite(step) && !std::isfinite(own)) return PhaseOutcome::Unbounded;

      if (own <= step) {
        // Bound flip: entering moves across its whole range without a basis change.
        for (std::size_t i = 0; i < rows_; ++i) beta_[i] -= dir * tableau_.at(i, entering) * own;
        at_upper_[entering] = !at_upper_[entering];
        note_step(own);
        continue;
      }

      if (std::fabs(leave_pivot) < tol_.pivot) {
        throw Error(ErrorCode::NumericalBreakdown, "pivot magnitude below tolerance");
      }
      const double start = at_upper_[entering] ? own : 0.0;
      for (std::size_t i = 0; i < rows_; ++i) {
        const double alpha = tableau_.at(i, entering);
        if (alpha != 0.0) beta_[i] -= dir * alpha * step;
      }
      const auto leaving = basis_[leave_row];
      beta_[leave_row] = start + dir * step;
      at_upper_[leaving] = leave_to_upper;
      at_upper_[entering] = false;
      pivot(leave_row, entering);
      note_step(step);
    }
  }

  void note_step(double step) {
    if (step <= 1e-12) {
      if (++degenerate_run_ > kDegenerateRunBeforeBland) bland_ = true;
    } else {
      degenerate_run_ = 0;
    }
  }

  void pivot(std::size_t r, std::size_t entering) {
    double* prow = tableau_.row(r);
    const double inv = 1.0 / prow[entering];
    for (std::size_t j = 0; j < cols_; ++j) prow[j] *= inv;
    prow[entering] = 1.0;
    nonzero_.clear();
    for (std::size_t j = 0; j < cols_; ++j) {
      if (prow[j] != 0.0) nonzero_.push_back(j);
    }
    for (std::size_t i = 0; i < rows_; ++i) {
      if (i == r) continue;
      double* row = tableau_.row(i);
      const double f = row[entering];
      if (f == 0.0) continue;
      for (auto j : nonzero_) row[j] -= f * prow[j];
      row[entering] = 0.0;
    }
    const double f = reduced_[entering];
    if (f != 0.0) {
      for (auto j : nonzero_) reduced_[j] -= f * prow[j];
      reduced_[entering] = 0.0;
    }
    is_basic_[basis_[r]] = false;
    basis_[r] = entering;
    is_basic_[entering] = true;
  }

  void drive_out_artificials() {
    for (std::size_t r = 0; r < rows_; ++r) {
      if (basis_[r] < artificial_begin_) continue;
      std::size_t best = cols_;
      double magnitude = kRatioPivot;
      for (std::size_t j = 0; j < artificial_begin_; ++j) {
        if (is_basic_[j] || upper_[j] <= 0.0) continue;
        const double a = std::fabs(tableau_.at(r, j));
        if (a > magnitude) {
          magnitude = a;
          best = j;
        }
      }
      if (best == cols_) continue;  // redundant row; the artificial stays basic at zero
      const double value = at_upper_[best] ? upper_[best] : 0.0;
      beta_[r] = value;
      at_upper_[best] = false;
      pivot(r, best);
    }
    for (std::size_t j = artificial_begin_; j < cols_; ++j) upper_[j] = 0.0;
  }

  const LpProblem& lp_;
  SimplexTolerances tol_;
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::size_t artificial_begin_ = 0;
  std::size_t artificial_count_ = 0;
  double rhs_scale_ = 0.0;
  Tableau tableau_{0, 0};
  std::vector<double> upper_;
  std::vector<bool> at_upper_;
  std::vector<bool> is_basic_;
  std::vector<double> beta_;
  std::vector<std::size_t> basis_;
  std::vector<double> reduced_;
  std::vector<std::size_t> nonzero_;
  std::size_t iterations_ = 0;
  bool bland_ = false;
  std::size_t degenerate_run_ = 0;
};

}  // namespace

LpResult simplex_lp(const LpProblem& lp, const SimplexTolerances& tol) {
  Solver solver(lp, tol);
  return solver.run();
}

}  // namespace wnopt
