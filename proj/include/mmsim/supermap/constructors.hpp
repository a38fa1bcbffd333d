#pragma once

#include <cstddef>
#include <vector>

#include "mmsim/densemat.hpp"
#include "mmsim/qcore/choi.hpp"
#include "mmsim/qcore/condprob.hpp"
#include "mmsim/qcore/objects.hpp"
#include "mmsim/supermap/realization.hpp"
#include "mmsim/supermap/superchannel.hpp"

namespace mmsim {

// N_{b|y} = sum_x pi(x|y) sum_a nu(b|a,x,y) M_{a|x}
// pi: g outcomes given (r). nu: l outcomes given (k, g, r).
inline ClassicalRealization classical_simulation_realization(const CondProb& pi, const CondProb& nu, std::size_t d,
                                                             const Tolerances& tol = {}) {
  if (pi.given().size() != 1) throw DimensionError("pi must be conditioned on the output setting only");
  const std::size_t g = pi.outcomes(), r = pi.given()[0];
  if (nu.given().size() != 3 || nu.given()[1] != g || nu.given()[2] != r)
    throw DimensionError("nu must be conditioned on (a, x, y)");
  const std::size_t k = nu.given()[0], l = nu.outcomes();
  validate(pi, tol);
  validate(nu, tol);

  ClassicalRealization cr;
  cr.in = {g, k, d};
  cr.out = {r, l, d};
  cr.s = 1;
  const CPMap id = identity_channel(d);
  for (std::size_t y = 0; y < r; ++y) {
    std::vector<CPMap> branches;
    for (std::size_t x = 0; x < g; ++x) branches.push_back(scaled(id, pi(x, {y})));
    cr.lambda.emplace_back(d, d, std::move(branches));
  }
  cr.nu = CondProb(l, {k, g, r, 1});
  for (std::size_t a = 0; a < k; ++a)
    for (std::size_t x = 0; x < g; ++x)
      for (std::size_t y = 0; y < r; ++y)
        for (std::size_t b = 0; b < l; ++b) cr.nu(b, {a, x, y, 0}) = nu(b, {a, x, y});
  return cr;
}

inline Superchannel classical_simulation_map(const CondProb& pi, const CondProb& nu, std::size_t d,
                                             const Tolerances& tol = {}) {
  return from_classical_realization(classical_simulation_realization(pi, nu, d, tol), tol);
}

// N_{a|x} = sum_c Phi*_c(M_{a|(x,c)}). The input multimeter has g_out * C
// settings indexed x * C + c; phi is an instrument M_n -> M_d with C branches.
inline ClassicalRealization compression_realization(const Instrument& phi, std::size_t g_out, std::size_t k,
                                                    const Tolerances& tol = {}) {
  validate(phi, tol);
  const std::size_t c_count = phi.outcomes(), n = phi.din(), d = phi.dout();
  ClassicalRealization cr;
  cr.in = {g_out * c_count, k, d};
  cr.out = {g_out, k, n};
  cr.s = 1;
  const CPMap zero(n, d, CMat(n * d));
  for (std::size_t y = 0; y < g_out; ++y) {
    std::vector<CPMap> branches(g_out * c_count, zero);
    for (std::size_t c = 0; c < c_count; ++c) branches[y * c_count + c] = phi[c];
    cr.lambda.emplace_back(n, d, std::move(branches));
  }
  cr.nu = CondProb::deterministic(k, {k, g_out * c_count, g_out, 1}, [](const auto& cond) { return cond[0]; });
  return cr;
}

inline Superchannel compression_map(const Instrument& phi, std::size_t g_out, std::size_t k,
                                    const Tolerances& tol = {}) {
  return from_classical_realization(compression_realization(phi, g_out, k, tol), tol);
}

// Lambda*_{x,(kappa,lambda)|y} = p_kappa pi(x|y,lambda,kappa) Gamma*_{lambda|kappa}
// with ancilla index kappa * L + lambda.
// p: K outcomes, no conditions. gamma[kappa]: instrument M_n -> M_d with L
// branches. pi: g outcomes given (r, L, K). nu: l outcomes given (k, g, r, L, K).
inline ClassicalRealization compatibility_preserving_realization(const CondProb& p, const std::vector<Instrument>& gamma,
                                                                 const CondProb& pi, const CondProb& nu,
                                                                 const Tolerances& tol = {}) {
  const std::size_t kk = p.outcomes();
  if (!p.given().empty()) throw DimensionError("p must be unconditioned");
  if (gamma.size() != kk) throw DimensionError("need one instrument per value of kappa");
  const std::size_t ll = gamma[0].outcomes(), n = gamma[0].din(), d = gamma[0].dout();
  for (const auto& inst : gamma) {
    if (inst.outcomes() != ll || inst.din() != n || inst.dout() != d)
      throw DimensionError("instruments disagree in shape");
    validate(inst, tol);
  }
  if (pi.given().size() != 3 || pi.given()[1] != ll || pi.given()[2] != kk)
    throw DimensionError("pi must be conditioned on (y, lambda, kappa)");
  const std::size_t g = pi.outcomes(), r = pi.given()[0];
  if (nu.given().size() != 5 || nu.given()[1] != g || nu.given()[2] != r || nu.given()[3] != ll ||
      nu.given()[4] != kk)
    throw DimensionError("nu must be conditioned on (a, x, y, lambda, kappa)");
  const std::size_t k = nu.given()[0], l = nu.outcomes();
  validate(p, tol);
  validate(pi, tol);
  validate(nu, tol);

  ClassicalRealization cr;
  cr.in = {g, k, d};
  cr.out = {r, l, n};
  cr.s = kk * ll;
  for (std::size_t y = 0; y < r; ++y) {
    std::vector<CPMap> branches;
    for (std::size_t x = 0; x < g; ++x)
      for (std::size_t kap = 0; kap < kk; ++kap)
        for (std::size_t lam = 0; lam < ll; ++lam)
          branches.push_back(scaled(gamma[kap][lam], p(kap, {}) * pi(x, {y, lam, kap})));
    cr.lambda.emplace_back(n, d, std::move(branches));
  }
  cr.nu = CondProb(l, {k, g, r, cr.s});
  for (std::size_t a = 0; a < k; ++a)
    for (std::size_t x = 0; x < g; ++x)
      for (std::size_t y = 0; y < r; ++y)
        for (std::size_t kap = 0; kap < kk; ++kap)
          for (std::size_t lam = 0; lam < ll; ++lam)
            for (std::size_t b = 0; b < l; ++b) cr.nu(b, {a, x, y, kap * ll + lam}) = nu(b, {a, x, y, lam, kap});
  return cr;
}

inline Superchannel compatibility_preserving_map(const CondProb& p, const std::vector<Instrument>& gamma,
                                                 const CondProb& pi, const CondProb& nu, const Tolerances& tol = {}) {
  return from_classical_realization(compatibility_preserving_realization(p, gamma, pi, nu, tol), tol);
}

// Discards the input multimeter and prepares `target`:
// Lambda_{x,z|y}(rho) = [x == 0] Tr[rho N_{z|y}] 1/d, nu(b|...,z) = [b == z].
inline ClassicalRealization trash_and_prepare_realization(const Multimeter& target, const SlotDims& in,
                                                          const Tolerances& tol = {}) {
  validate(target, tol);
  const std::size_t r = target.g(), l = target.k(), n = target.d();
  const std::size_t d = in.d;
  ClassicalRealization cr;
  cr.in = in;
  cr.out = {r, l, n};
  cr.s = l;
  const CMat mixed = CMat::identity(d) * (1.0 / static_cast<double>(d));
  const CPMap zero(n, d, CMat(n * d));
  for (std::size_t y = 0; y < r; ++y) {
    std::vector<CPMap> branches(in.g * l, zero);
    for (std::size_t z = 0; z < l; ++z)
      branches[z] = CPMap(n, d, kron(mixed, target.effect(z, y).transpose()));
    cr.lambda.emplace_back(n, d, std::move(branches));
  }
  cr.nu = CondProb::deterministic(l, {in.k, in.g, r, l}, [](const auto& cond) { return cond[3]; });
  return cr;
}

inline Superchannel trash_and_prepare_map(const Multimeter& target, const SlotDims& in, const Tolerances& tol = {}) {
  return from_classical_realization(trash_and_prepare_realization(target, in, tol), tol);
}

// Single-setting map N_b = sum_a Tr[M_a]/d B_{b|a}, built from its action
//   Psi(W) = sum_{a,b} Tr[W_a]/d |b><b| (x) B_{b|a}^T
// with W_a the a-th diagonal block of W.
inline Superchannel quantum_ancilla_example_map(const std::vector<POVM>& ancilla_povms, std::size_t d,
                                                const Tolerances& tol = {}) {
  const std::size_t k = ancilla_povms.size();
  if (k == 0) throw DimensionError("need one POVM per input outcome");
  const std::size_t l = ancilla_povms[0].k(), n = ancilla_povms[0].d();
  for (const auto& p : ancilla_povms) {
    if (p.k() != l || p.d() != n) throw DimensionError("ancilla POVMs disagree in shape");
    validate(p, tol);
  }
  const SlotDims in{1, k, d}, out{1, l, n};
  const double inv_d = 1.0 / static_cast<double>(d);
  auto action = [&](const CMat& w) {
    CMat img(out.size());
    for (std::size_t a = 0; a < k; ++a) {
      Complex tr = 0.0;
      for (std::size_t al = 0; al < d; ++al) tr += w(multimeter_index(a, al, 0, d, 1), multimeter_index(a, al, 0, d, 1));
      if (tr == Complex(0.0)) continue;
      for (std::size_t b = 0; b < l; ++b) {
        const CMat& e = ancilla_povms[a][b];
        for (std::size_t p = 0; p < n; ++p)
          for (std::size_t q = 0; q < n; ++q)
            img(multimeter_index(b, p, 0, n, 1), multimeter_index(b, q, 0, n, 1)) += tr * inv_d * e(q, p);
      }
    }
    return img;
  };
  return Superchannel(in, out, CPMap(in.size(), out.size(), choi_of_map(action, in.size(), out.size())), true);
}

}  // namespace mmsim
