#include <gtest/gtest.h>

#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <random>

#include "wnopt/error.hpp"
#include "wnopt/simplex.hpp"

using namespace wnopt;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

LpRow row(std::vector<std::pair<std::size_t, double>> terms, RowSense sense, double rhs) {
  return LpRow{std::move(terms), sense, rhs};
}

// Solves a square system by Gaussian elimination with partial pivoting.
std::optional<std::vector<double>> solve_square(std::vector<std::vector<double>> a, std::vector<double> b) {
  const std::size_t n = b.size();
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t p = c;
    for (std::size_t r = c + 1; r < n; ++r) {
      if (std::abs(a[r][c]) > std::abs(a[p][c])) p = r;
    }
    if (std::abs(a[p][c]) < 1e-10) return std::nullopt;
    std::swap(a[p], a[c]);
    std::swap(b[p], b[c]);
    for (std::size_t r = 0; r < n; ++r) {
      if (r == c) continue;
      const double f = a[r][c] / a[c][c];
      for (std::size_t k = c; k < n; ++k) a[r][k] -= f * a[c][k];
      b[r] -= f * b[c];
    }
  }
  std::vector<double> x(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = b[i] / a[i][i];
  return x;
}

bool feasible(const LpProblem& lp, const std::vector<double>& x, double tol) {
  for (std::size_t j = 0; j < x.size(); ++j) {
    if (x[j] < lp.lower[j] - tol || x[j] > lp.upper[j] + tol) return false;
  }
  for (const auto& r : lp.rows) {
    double lhs = 0.0;
    for (const auto& [j, a] : r.terms) lhs += a * x[j];
    if (r.sense == RowSense::LessEqual && lhs > r.rhs + tol) return false;
    if (r.sense == RowSense::GreaterEqual && lhs < r.rhs - tol) return false;
    if (r.sense == RowSense::Equal && std::abs(lhs - r.rhs) > tol) return false;
  }
  return true;
}

// Best objective over all basic solutions of a bounded LP; nullopt if none is feasible.
std::optional<double> enumerate_vertices(const LpProblem& lp) {
  const std::size_t n = lp.cost.size();
  std::vector<std::vector<double>> hyper;
  std::vector<double> rhs;
  for (std::size_t j = 0; j < n; ++j) {
    std::vector<double> e(n, 0.0);
    e[j] = 1.0;
    hyper.push_back(e);
    rhs.push_back(lp.lower[j]);
    hyper.push_back(e);
    rhs.push_back(lp.upper[j]);
  }
  for (const auto& r : lp.rows) {
    std::vector<double> a(n, 0.0);
    for (const auto& [j, v] : r.terms) a[j] += v;
    hyper.push_back(a);
    rhs.push_back(r.rhs);
  }
  std::optional<double> best;
  const std::size_t m = hyper.size();
  std::vector<std::size_t> pick(n);
  std::function<void(std::size_t, std::size_t)> rec = [&](std::size_t depth, std::size_t start) {
    if (depth == n) {
      std::vector<std::vector<double>> a;
      std::vector<double> b;
      for (auto i : pick) {
        a.push_back(hyper[i]);
        b.push_back(rhs[i]);
      }
      const auto x = solve_square(a, b);
      if (!x || !feasible(lp, *x, 1e-7)) return;
      double obj = 0.0;
      for (std::size_t j = 0; j < n; ++j) obj += lp.cost[j] * (*x)[j];
      if (!best || obj < *best) best = obj;
      return;
    }
    for (std::size_t i = start; i < m; ++i) {
      pick[depth] = i;
      rec(depth + 1, i + 1);
    }
  };
  rec(0, 0);
  return best;
}

}  // namespace

TEST(Simplex, TwoVariableTextbook) {
  // max 3x + 5y st x <= 4, 2y <= 12, 3x + 2y <= 18.
  LpProblem lp{{0, 0}, {kInf, kInf}, {-3, -5}, {}};
  lp.rows.push_back(row({{0, 1}}, RowSense::LessEqual, 4));
  lp.rows.push_back(row({{1, 2}}, RowSense::LessEqual, 12));
  lp.rows.push_back(row({{0, 3}, {1, 2}}, RowSense::LessEqual, 18));
  const auto r = simplex_lp(lp);
  ASSERT_EQ(r.status, LpStatus::Optimal);
  EXPECT_NEAR(r.objective, -36.0, 1e-9);
  EXPECT_NEAR(r.x[0], 2.0, 1e-9);
  EXPECT_NEAR(r.x[1], 6.0, 1e-9);
}

TEST(Simplex, EqualityAndGreaterRowsNeedPhaseOne) {
  // min x + y st x + y >= 2, x - y = 1, x,y in [0, 10].
  LpProblem lp{{0, 0}, {10, 10}, {1, 1}, {}};
  lp.rows.push_back(row({{0, 1}, {1, 1}}, RowSense::GreaterEqual, 2));
  lp.rows.push_back(row({{0, 1}, {1, -1}}, RowSense::Equal, 1));
  const auto r = simplex_lp(lp);
  ASSERT_EQ(r.status, LpStatus::Optimal);
  EXPECT_NEAR(r.x[0], 1.5, 1e-9);
  EXPECT_NEAR(r.x[1], 0.5, 1e-9);
}

TEST(Simplex, NonzeroLowerBounds) {
  LpProblem lp{{2, -3}, {5, 4}, {1, 1}, {}};
  const auto r = simplex_lp(lp);
  ASSERT_EQ(r.status, LpStatus::Optimal);
  EXPECT_NEAR(r.objective, -1.0, 1e-12);
}

TEST(Simplex, InfeasibleRows) {
  LpProblem lp{{0}, {kInf}, {1}, {}};
  lp.rows.push_back(row({{0, 1}}, RowSense::LessEqual, 1));
  lp.rows.push_back(row({{0, 1}}, RowSense::GreaterEqual, 2));
  EXPECT_EQ(simplex_lp(lp).status, LpStatus::Infeasible);
}

TEST(Simplex, UnboundedRay) {
  LpProblem lp{{0, 0}, {kInf, kInf}, {-1, 0}, {}};
  lp.rows.push_back(row({{0, 1}, {1, -1}}, RowSense::LessEqual, 1));
  EXPECT_EQ(simplex_lp(lp).status, LpStatus::Unbounded);
}

TEST(Simplex, DegenerateVertexTerminates) {
  // Several rows pass through the optimum (1, 1).
  LpProblem lp{{0, 0}, {kInf, kInf}, {-1, -1}, {}};
  lp.rows.push_back(row({{0, 1}}, RowSense::LessEqual, 1));
  lp.rows.push_back(row({{1, 1}}, RowSense::LessEqual, 1));
  lp.rows.push_back(row({{0, 1}, {1, 1}}, RowSense::LessEqual, 2));
  lp.rows.push_back(row({{0, 2}, {1, 1}}, RowSense::LessEqual, 3));
  lp.rows.push_back(row({{0, 1}, {1, 2}}, RowSense::LessEqual, 3));
  const auto r = simplex_lp(lp);
  ASSERT_EQ(r.status, LpStatus::Optimal);
  EXPECT_NEAR(r.objective, -2.0, 1e-9);
}

TEST(Simplex, NonFiniteDataRejected) {
  LpProblem nan_cost{{0}, {1}, {std::nan("")}, {}};
  LpProblem open_lower{{-kInf}, {1}, {1}, {}};
  LpProblem bad_rhs{{0}, {1}, {1}, {row({{0, 1}}, RowSense::LessEqual, kInf)}};
  LpProblem bad_index{{0}, {1}, {1}, {row({{3, 1}}, RowSense::LessEqual, 1)}};
  for (const auto* lp : {&nan_cost, &open_lower, &bad_rhs, &bad_index}) {
    try {
      simplex_lp(*lp);
      ADD_FAILURE();
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::InvalidArgument);
    }
  }
}

TEST(Simplex, MatchesVertexEnumerationOnRandomLps) {
  std::mt19937_64 rng(101);
  std::uniform_real_distribution<double> coef(-5.0, 5.0);
  std::uniform_int_distribution<int> small(-3, 3);
  int optimal = 0, infeasible = 0;
  for (int t = 0; t < 50; ++t) {
    const std::size_t n = 2 + t % 3;
    LpProblem lp;
    for (std::size_t j = 0; j < n; ++j) {
      lp.lower.push_back(small(rng));
      lp.upper.push_back(lp.lower.back() + 1 + std::abs(small(rng)) * 2);
      lp.cost.push_back(coef(rng));
    }
    const int rows = 2 + t % 4;
    for (int i = 0; i < rows; ++i) {
      LpRow r;
      for (std::size_t j = 0; j < n; ++j) {
        if (std::bernoulli_distribution(0.8)(rng)) r.terms.emplace_back(j, small(rng));
      }
      r.sense = static_cast<RowSense>(i % 3 == 2 && t % 2 == 0 ? 2 : i % 2);
      r.rhs = coef(rng);
      lp.rows.push_back(std::move(r));
    }
    const auto expected = enumerate_vertices(lp);
    const auto got = simplex_lp(lp);
    if (!expected) {
      EXPECT_EQ(got.status, LpStatus::Infeasible) << t;
      ++infeasible;
      continue;
    }
    ASSERT_EQ(got.status, LpStatus::Optimal) << t;
    EXPECT_NEAR(got.objective, *expected, 1e-7) << t;
    EXPECT_TRUE(feasible(lp, got.x, 1e-7)) << t;
    ++optimal;
  }
  EXPECT_GT(optimal, 20);
  EXPECT_GT(infeasible, 0);
}

TEST(Simplex, Deterministic) {
  LpProblem lp{{0, 0, 0}, {4, 4, 4}, {-1, -1, -1}, {}};
  lp.rows.push_back(row({{0, 1}, {1, 1}, {2, 1}}, RowSense::LessEqual, 5));
  const auto a = simplex_lp(lp), b = simplex_lp(lp);
  EXPECT_EQ(a.x, b.x);
  EXPECT_EQ(a.iterations, b.iterations);
}
