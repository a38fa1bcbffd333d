#pragma once

#include <concepts>
#include <cstddef>
#include <string>
#include <vector>

#include "mmsim/densemat.hpp"
#include "mmsim/qcore/condprob.hpp"
#include "mmsim/qcore/objects.hpp"

namespace mmsim {

template <class F>
concept MatrixMap = std::invocable<const F&, const CMat&> &&
                    std::convertible_to<std::invoke_result_t<const F&, const CMat&>, CMat>;

// Choi matrix of a linear map given by its action; J[(p,i),(q,j)] = Phi(|i><j|)[p,q].
template <MatrixMap F>
CMat choi_of_map(const F& phi, std::size_t din, std::size_t dout) {
  CMat j(din * dout);
  for (std::size_t i = 0; i < din; ++i)
    for (std::size_t k = 0; k < din; ++k) {
      const CMat img = phi(CMat::unit(din, i, k));
      if (img.rows() != dout || img.cols() != dout)
        throw DimensionError("choi_of_map: image has the wrong size");
      for (std::size_t p = 0; p < dout; ++p)
        for (std::size_t q = 0; q < dout; ++q) j(p * din + i, q * din + k) = img(p, q);
    }
  j.set_factor_dims({dout, din});
  return j;
}

// Phi(X) = Tr_in[(1 (x) X^T) J]
inline CMat map_of_choi(const CPMap& m, const CMat& x) {
  const std::size_t din = m.din(), dout = m.dout();
  if (x.rows() != din || x.cols() != din) throw DimensionError("map_of_choi: input has the wrong size");
  const CMat& j = m.choi();
  CMat out(dout);
  for (std::size_t i = 0; i < din; ++i)
    for (std::size_t k = 0; k < din; ++k) {
      const Complex w = x(i, k);
      if (w == Complex(0.0)) continue;
      for (std::size_t p = 0; p < dout; ++p)
        for (std::size_t q = 0; q < dout; ++q) out(p, q) += w * j(p * din + i, q * din + k);
    }
  return out;
}

// Heisenberg picture: Tr[Phi*(A) D] = Tr[A Phi(D)] for all D.
inline CMat dual_apply(const CPMap& m, const CMat& a) {
  const std::size_t din = m.din(), dout = m.dout();
  if (a.rows() != dout || a.cols() != dout) throw DimensionError("dual_apply: input has the wrong size");
  const CMat& j = m.choi();
  CMat out(din);
  for (std::size_t p = 0; p < dout; ++p)
    for (std::size_t q = 0; q < dout; ++q) {
      const Complex w = a(q, p);
      if (w == Complex(0.0)) continue;
      for (std::size_t i = 0; i < din; ++i)
        for (std::size_t k = 0; k < din; ++k) out(k, i) += w * j(p * din + i, q * din + k);
    }
  return out;
}

// Builds the map M_din -> M_dout whose dual is `dual` : M_dout -> M_din.
template <MatrixMap F>
CPMap cpmap_from_dual(const F& dual, std::size_t din, std::size_t dout) {
  CMat j(din * dout);
  for (std::size_t p = 0; p < dout; ++p)
    for (std::size_t q = 0; q < dout; ++q) {
      const CMat img = dual(CMat::unit(dout, q, p));
      if (img.rows() != din || img.cols() != din)
        throw DimensionError("cpmap_from_dual: image has the wrong size");
      for (std::size_t i = 0; i < din; ++i)
        for (std::size_t k = 0; k < din; ++k) j(p * din + i, q * din + k) = img(k, i);
    }
  return CPMap(din, dout, std::move(j));
}

template <MatrixMap F>
CPMap cpmap_of(const F& phi, std::size_t din, std::size_t dout) {
  return CPMap(din, dout, choi_of_map(phi, din, dout));
}

// Phi(X) = sum_k K X K^dagger with each K of shape dout x din.
inline CPMap cpmap_from_kraus(const std::vector<CMat>& kraus, std::size_t din, std::size_t dout) {
  CMat j(din * dout);
  for (const auto& k : kraus) {
    if (k.rows() != dout || k.cols() != din) throw DimensionError("Kraus operator has the wrong shape");
    for (std::size_t p = 0; p < dout; ++p)
      for (std::size_t i = 0; i < din; ++i) {
        const Complex kpi = k(p, i);
        if (kpi == Complex(0.0)) continue;
        for (std::size_t q = 0; q < dout; ++q)
          for (std::size_t l = 0; l < din; ++l) j(p * din + i, q * din + l) += kpi * std::conj(k(q, l));
      }
  }
  return CPMap(din, dout, std::move(j));
}

inline CPMap identity_channel(std::size_t d) { return cpmap_from_kraus({CMat::identity(d)}, d, d); }

inline CPMap scaled(const CPMap& m, double w) { return CPMap(m.din(), m.dout(), m.choi() * w); }

inline CPMap sum_of(const std::vector<CPMap>& maps) {
  if (maps.empty()) throw DimensionError("sum_of: no maps");
  CMat j = maps[0].choi();
  for (std::size_t i = 1; i < maps.size(); ++i) {
    if (maps[i].din() != maps[0].din() || maps[i].dout() != maps[0].dout())
      throw DimensionError("sum_of: maps disagree on dims");
    j += maps[i].choi();
  }
  return CPMap(maps[0].din(), maps[0].dout(), std::move(j));
}

inline CPMap channel_of(const Instrument& inst) { return sum_of(inst.branches()); }

// ---- multimeters as block-diagonal Choi matrices ----------------------------

inline std::size_t multimeter_index(std::size_t a, std::size_t alpha, std::size_t x, std::size_t d,
                                    std::size_t g) {
  return (a * d + alpha) * g + x;
}

// J = sum_{x,a} |a><a| (x) M_{a|x}^T (x) |x><x| on C^k (x) C^d (x) C^g.
inline CMat multimeter_choi(const Multimeter& m) {
  const std::size_t k = m.k(), d = m.d(), g = m.g();
  CMat j(k * d * g);
  for (std::size_t x = 0; x < g; ++x)
    for (std::size_t a = 0; a < k; ++a) {
      const CMat& e = m.effect(a, x);
      for (std::size_t al = 0; al < d; ++al)
        for (std::size_t be = 0; be < d; ++be)
          j(multimeter_index(a, al, x, d, g), multimeter_index(a, be, x, d, g)) = e(be, al);
    }
  j.set_factor_dims({k, d, g});
  return j;
}

// Inverse of multimeter_choi. Rejects mass outside the (a, x) diagonal blocks,
// then checks normalisation and positivity of the decoded effects.
inline Multimeter multimeter_of_choi(const CMat& j, std::size_t k, std::size_t d, std::size_t g,
                                     const Tolerances& tol = {}) {
  if (!j.is_square() || j.rows() != k * d * g)
    throw DimensionError("multimeter_of_choi: size is not k*d*g");
  double off_mass = 0.0;
  for (std::size_t r = 0; r < j.rows(); ++r)
    for (std::size_t c = 0; c < j.cols(); ++c) {
      const std::size_t ra = r / (d * g), rx = r % g;
      const std::size_t ca = c / (d * g), cx = c % g;
      if (ra != ca || rx != cx) off_mass += std::norm(j(r, c));
    }
  if (!within(std::sqrt(off_mass), j.frobenius_norm(), tol.eq))
    throw NotMultimeterChoiError("matrix has weight outside the multimeter block pattern");

  std::vector<POVM> povms;
  for (std::size_t x = 0; x < g; ++x) {
    std::vector<CMat> effects;
    for (std::size_t a = 0; a < k; ++a) {
      CMat e(d);
      for (std::size_t al = 0; al < d; ++al)
        for (std::size_t be = 0; be < d; ++be)
          e(be, al) = j(multimeter_index(a, al, x, d, g), multimeter_index(a, be, x, d, g));
      effects.push_back(std::move(e));
    }
    povms.emplace_back(d, std::move(effects));
  }
  Multimeter m(std::move(povms));
  validate(m, tol);
  return m;
}

// Outcome distribution of setting x on state rho.
inline std::vector<double> multimeter_apply(const Multimeter& m, const CMat& rho, std::size_t x,
                                            const Tolerances& tol = {}) {
  if (x >= m.g()) throw DimensionError("setting index out of range");
  if (rho.rows() != m.d() || rho.cols() != m.d()) throw DimensionError("state has the wrong size");
  validate_state(rho, tol);
  std::vector<double> probs;
  for (std::size_t a = 0; a < m.k(); ++a) probs.push_back(std::real(hs_inner(m.effect(a, x), rho)));
  return probs;
}

// N_b = sum_a mu(b|a) M_a
inline POVM postprocess_povm(const POVM& m, const CondProb& mu, const Tolerances& tol = {}) {
  if (mu.given().size() != 1 || mu.given()[0] != m.k())
    throw DimensionError("postprocessing must be conditioned on the POVM outcome");
  validate(mu, tol);
  std::vector<CMat> out(mu.outcomes(), CMat(m.d()));
  for (std::size_t b = 0; b < mu.outcomes(); ++b)
    for (std::size_t a = 0; a < m.k(); ++a) out[b].add_scaled(m[a], mu(b, {a}));
  return POVM(m.d(), std::move(out));
}

inline double multimeter_distance(const Multimeter& a, const Multimeter& b) {
  if (a.g() != b.g() || a.k() != b.k() || a.d() != b.d()) throw DimensionError("multimeters differ in shape");
  double s = 0.0;
  for (std::size_t x = 0; x < a.g(); ++x)
    for (std::size_t o = 0; o < a.k(); ++o) {
      const double n = distance(a.effect(o, x), b.effect(o, x));
      s += n * n;
    }
  return std::sqrt(s);
}

}  // namespace mmsim
