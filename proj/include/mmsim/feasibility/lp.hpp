#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "mmsim/errors.hpp"
#include "mmsim/tolerance.hpp"

namespace mmsim {

// A x = b, x >= 0. Rows of `a` all have `vars` entries.
struct LPProblem {
  std::size_t vars = 0;
  std::vector<std::vector<double>> a;
  std::vector<double> b;

  std::size_t add_row(std::vector<double> row, double rhs) {
    a.push_back(std::move(row));
    b.push_back(rhs);
    return a.size() - 1;
  }
  std::vector<double> zero_row() const { return std::vector<double>(vars, 0.0); }
};

enum class FeasibilityStatus { feasible, infeasible, undecided };

inline std::string to_string(FeasibilityStatus s) {
  switch (s) {
    case FeasibilityStatus::feasible: return "feasible";
    case FeasibilityStatus::infeasible: return "infeasible";
    case FeasibilityStatus::undecided: return "undecided";
  }
  return "undecided";
}

struct FeasibilityCert {
  FeasibilityStatus status = FeasibilityStatus::undecided;
  std::optional<std::vector<double>> solution;
  double residual = 0.0;
  std::size_t iterations = 0;

  bool feasible() const { return status == FeasibilityStatus::feasible; }
};

// max_i |(A x - b)_i|
inline double lp_residual(const LPProblem& p, const std::vector<double>& x) {
  double worst = 0.0;
  for (std::size_t i = 0; i < p.a.size(); ++i) {
    double acc = -p.b[i];
    for (std::size_t j = 0; j < p.vars; ++j) acc += p.a[i][j] * x[j];
    worst = std::max(worst, std::abs(acc));
  }
  return worst;
}

inline void validate(const LPProblem& p) {
  if (p.a.size() != p.b.size()) throw DimensionError("LP row count and rhs length differ");
  for (const auto& row : p.a) {
    if (row.size() != p.vars) throw DimensionError("LP row has wrong length");
    for (double v : row)
      if (!std::isfinite(v)) throw DimensionError("LP matrix has a non-finite entry");
  }
  for (double v : p.b)
    if (!std::isfinite(v)) throw DimensionError("LP rhs has a non-finite entry");
}

// Phase-1 simplex on a dense tableau with one artificial per row, minimising
// the artificial sum. Bland's rule: lowest-index improving column, ties in the
// ratio test go to the lowest-index basic variable.
inline FeasibilityCert lp_feasible(const LPProblem& p, const Tolerances& tol = {}) {
  validate(p);
  const std::size_t m = p.a.size(), n = p.vars;
  const std::size_t width = n + m + 1;  // rhs in the last column
  std::vector<std::vector<double>> t(m + 1, std::vector<double>(width, 0.0));
  std::vector<std::size_t> basis(m);
  for (std::size_t i = 0; i < m; ++i) {
    const double sign = p.b[i] < 0.0 ? -1.0 : 1.0;
    for (std::size_t j = 0; j < n; ++j) t[i][j] = sign * p.a[i][j];
    t[i][n + i] = 1.0;
    t[i][width - 1] = sign * p.b[i];
    basis[i] = n + i;
  }
  // reduced costs of the artificial objective; last entry is -objective
  std::vector<double>& cost = t[m];
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) cost[j] -= t[i][j];
  for (std::size_t i = 0; i < m; ++i) cost[width - 1] -= t[i][width - 1];

  double scale = 1.0;
  for (const auto& row : t)
    for (double v : row) scale = std::max(scale, std::abs(v));
  const double pivot_eps = 1e-12 * scale;

  FeasibilityCert cert;
  const std::size_t max_iter = 50 * (m + n) + 1000;
  for (;;) {
    std::size_t enter = width;
    for (std::size_t j = 0; j + 1 < width; ++j)
      if (cost[j] < -pivot_eps) {
        enter = j;
        break;
      }
    if (enter == width) break;
    if (++cert.iterations > max_iter) throw InternalError("simplex exceeded its iteration budget");

    std::size_t leave = m;
    double best = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      if (t[i][enter] <= pivot_eps) continue;
      const double ratio = t[i][width - 1] / t[i][enter];
      if (leave == m || ratio < best - 1e-14 * std::max(1.0, std::abs(best)) ||
          (std::abs(ratio - best) <= 1e-14 * std::max(1.0, std::abs(best)) && basis[i] < basis[leave])) {
        leave = i;
        best = ratio;
      }
    }
    if (leave == m) throw InternalError("phase-1 simplex reported an unbounded direction");

    const double piv = t[leave][enter];
    for (auto& v : t[leave]) v /= piv;
    for (std::size_t i = 0; i <= m; ++i) {
      if (i == leave) continue;
      const double factor = t[i][enter];
      if (factor == 0.0) continue;
      for (std::size_t j = 0; j < width; ++j) t[i][j] -= factor * t[leave][j];
    }
    basis[leave] = enter;
  }

  const double optimum = -cost[width - 1];
  std::vector<double> x(n, 0.0);
  for (std::size_t i = 0; i < m; ++i)
    if (basis[i] < n) x[basis[i]] = std::max(0.0, t[i][width - 1]);
  cert.residual = lp_residual(p, x);
  if (optimum <= tol.lp) {
    cert.status = FeasibilityStatus::feasible;
    cert.solution = std::move(x);
  } else {
    cert.status = FeasibilityStatus::infeasible;
    cert.residual = optimum;  // total artificial mass left at the optimum
  }
  return cert;
}

}  // namespace mmsim
