#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <vector>

#include "mmsim/densemat.hpp"
#include "mmsim/feasibility/lp.hpp"
#include "mmsim/qcore/condprob.hpp"
#include "mmsim/qcore/objects.hpp"

namespace mmsim {

namespace detail {

// Real coordinates of a Hermitian matrix: the diagonal, then real and
// imaginary parts above it. d^2 numbers in all.
inline std::vector<double> hermitian_coords(const CMat& h) {
  const std::size_t d = h.rows();
  std::vector<double> out;
  out.reserve(d * d);
  for (std::size_t i = 0; i < d; ++i) out.push_back(h(i, i).real());
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = i + 1; j < d; ++j) {
      out.push_back(h(i, j).real());
      out.push_back(h(i, j).imag());
    }
  return out;
}

inline double max_entry_gap(const Multimeter& a, const Multimeter& b) {
  double worst = 0.0;
  for (std::size_t y = 0; y < a.g(); ++y)
    for (std::size_t o = 0; o < a.k(); ++o) {
      const CMat gap = a.effect(o, y) - b.effect(o, y);
      for (std::size_t i = 0; i < gap.rows(); ++i)
        for (std::size_t j = 0; j < gap.cols(); ++j) worst = std::max(worst, std::abs(gap(i, j)));
    }
  return worst;
}

}  // namespace detail

// N_{b|y} = sum_x pi(x|y) sum_a nu(b|a,x,y) M_{a|x}
inline Multimeter simulate(const Multimeter& m, const CondProb& pi, const CondProb& nu) {
  const std::size_t r = pi.given().at(0), l = nu.outcomes();
  std::vector<POVM> povms;
  for (std::size_t y = 0; y < r; ++y) {
    std::vector<CMat> effects(l, CMat(m.d()));
    for (std::size_t x = 0; x < m.g(); ++x)
      for (std::size_t a = 0; a < m.k(); ++a)
        for (std::size_t b = 0; b < l; ++b) effects[b].add_scaled(m.effect(a, x), pi(x, {y}) * nu(b, {a, x, y}));
    povms.emplace_back(m.d(), std::move(effects));
  }
  return Multimeter(std::move(povms));
}

struct SimulationCert {
  FeasibilityCert lp;
  std::optional<CondProb> pi;  // g outcomes given y
  std::optional<CondProb> nu;  // l outcomes given (a, x, y)
  double simulation_residual = 0.0;  // max entrywise gap of the recovered simulation
  bool feasible() const { return lp.feasible(); }
};

// Variables q(b,a,x,y) = pi(x|y) nu(b|a,x,y) >= 0 and pi(x|y) >= 0.
inline SimulationCert is_classically_simulable(const Multimeter& target, const Multimeter& sim,
                                               const Tolerances& tol = {}) {
  if (target.d() != sim.d()) throw DimensionError("target and simulator act on different dimensions");
  const std::size_t r = target.g(), l = target.k(), g = sim.g(), k = sim.k(), d = sim.d();
  auto q_index = [&](std::size_t b, std::size_t a, std::size_t x, std::size_t y) { return ((y * g + x) * k + a) * l + b; };
  const std::size_t q_count = l * k * g * r;
  auto pi_index = [&](std::size_t x, std::size_t y) { return q_count + y * g + x; };

  LPProblem lp;
  lp.vars = q_count + g * r;
  for (std::size_t y = 0; y < r; ++y) {
    for (std::size_t x = 0; x < g; ++x)
      for (std::size_t a = 0; a < k; ++a) {
        auto row = lp.zero_row();
        for (std::size_t b = 0; b < l; ++b) row[q_index(b, a, x, y)] = 1.0;
        row[pi_index(x, y)] = -1.0;
        lp.add_row(std::move(row), 0.0);
      }
    auto norm = lp.zero_row();
    for (std::size_t x = 0; x < g; ++x) norm[pi_index(x, y)] = 1.0;
    lp.add_row(std::move(norm), 1.0);
  }
  std::vector<std::vector<double>> sim_coords(g * k);
  for (std::size_t x = 0; x < g; ++x)
    for (std::size_t a = 0; a < k; ++a) sim_coords[x * k + a] = detail::hermitian_coords(sim.effect(a, x));
  for (std::size_t y = 0; y < r; ++y)
    for (std::size_t b = 0; b < l; ++b) {
      const auto rhs = detail::hermitian_coords(target.effect(b, y));
      for (std::size_t c = 0; c < d * d; ++c) {
        auto row = lp.zero_row();
        for (std::size_t x = 0; x < g; ++x)
          for (std::size_t a = 0; a < k; ++a) row[q_index(b, a, x, y)] = sim_coords[x * k + a][c];
        lp.add_row(std::move(row), rhs[c]);
      }
    }

  SimulationCert cert;
  cert.lp = lp_feasible(lp, tol);
  if (!cert.lp.feasible()) return cert;

  const auto& sol = *cert.lp.solution;
  CondProb pi(g, {r});
  CondProb nu(l, {k, g, r});
  for (std::size_t y = 0; y < r; ++y) {
    double total = 0.0;
    for (std::size_t x = 0; x < g; ++x) total += sol[pi_index(x, y)];
    for (std::size_t x = 0; x < g; ++x) {
      const double weight = sol[pi_index(x, y)];
      pi(x, {y}) = weight / total;
      for (std::size_t a = 0; a < k; ++a) {
        double mass = 0.0;
        for (std::size_t b = 0; b < l; ++b) mass += sol[q_index(b, a, x, y)];
        for (std::size_t b = 0; b < l; ++b)
          nu(b, {a, x, y}) = weight > tol.lp && mass > 0.0 ? sol[q_index(b, a, x, y)] / mass : 1.0 / static_cast<double>(l);
      }
    }
  }
  cert.simulation_residual = detail::max_entry_gap(simulate(sim, pi, nu), target);
  if (!within(cert.simulation_residual, 1.0, tol.eq)) {
    // the LP point does not survive the substitution; no usable certificate
    cert.lp.status = FeasibilityStatus::undecided;
    cert.lp.residual = std::max(cert.lp.residual, cert.simulation_residual);
    return cert;
  }
  cert.pi = std::move(pi);
  cert.nu = std::move(nu);
  return cert;
}

struct PostprocessingCert {
  FeasibilityCert lp;
  std::optional<CondProb> mu;  // l outcomes given a
  double simulation_residual = 0.0;
  bool feasible() const { return lp.feasible(); }
};

// target = sum_a mu(.|a) source_a for a stochastic mu
inline PostprocessingCert is_postprocessing_of(const POVM& target, const POVM& source, const Tolerances& tol = {}) {
  if (target.d() != source.d()) throw DimensionError("POVMs act on different dimensions");
  const auto sim = is_classically_simulable(Multimeter({target}), Multimeter({source}), tol);
  PostprocessingCert cert;
  cert.lp = sim.lp;
  cert.simulation_residual = sim.simulation_residual;
  if (sim.nu) {
    CondProb mu(target.k(), {source.k()});
    for (std::size_t a = 0; a < source.k(); ++a)
      for (std::size_t b = 0; b < target.k(); ++b) mu(b, {a}) = (*sim.nu)(b, {a, 0, 0});
    cert.mu = std::move(mu);
  }
  return cert;
}

}  // namespace mmsim
