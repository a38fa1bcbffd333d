#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include "mmsim/densemat.hpp"
#include "mmsim/qcore/choi.hpp"
#include "mmsim/qcore/objects.hpp"

namespace mmsim {

// Minimal dilation read off the spectral decomposition of the Choi matrix,
// zero-padded up to s_min ancilla levels if asked.
inline StinespringDilation stinespring(const CPMap& m, std::size_t s_min = 1, const Tolerances& tol = {}) {
  const auto eig = eigh(m.choi(), tol.herm);
  const std::size_t n = eig.values.size();
  const double top = n == 0 ? 0.0 : eig.values.back();
  if (n > 0 && eig.values.front() < -tol.psd * std::max(1.0, m.choi().frobenius_norm()))
    throw NotPSDError("stinespring: Choi matrix is not positive semidefinite");

  std::size_t rank = 0;
  if (top > 0.0)
    for (std::size_t i = n; i-- > 0;) {
      if (eig.values[i] <= tol.rank * top) break;
      ++rank;
    }

  StinespringDilation dil;
  dil.din = m.din();
  dil.dout = m.dout();
  dil.support = rank;
  dil.s = std::max<std::size_t>({rank, s_min, 1});
  dil.v = CMat(dil.dout * dil.s, dil.din);
  for (std::size_t c = 0; c < rank; ++c) {
    const std::size_t col = n - 1 - c;
    const double w = std::sqrt(eig.values[col]);
    for (std::size_t p = 0; p < dil.dout; ++p)
      for (std::size_t i = 0; i < dil.din; ++i)
        dil.v(p * dil.s + c, i) = w * eig.vectors(p * dil.din + i, col);
  }
  return dil;
}

// V^dagger (A (x) Q) V for A on the output space and Q on the ancilla.
inline CMat dilation_compress(const StinespringDilation& dil, const CMat& a, const CMat& q) {
  return dil.v.adjoint() * (kron(a, q) * dil.v);
}

inline CMat dilation_dual(const StinespringDilation& dil, const CMat& a) {
  return dilation_compress(dil, a, CMat::identity(dil.s));
}

namespace detail {

// Rows of V belonging to output basis vector alpha: an s x din block.
inline CMat dilation_slice(const StinespringDilation& dil, std::size_t alpha) {
  CMat out(dil.s, dil.din);
  for (std::size_t c = 0; c < dil.s; ++c)
    for (std::size_t i = 0; i < dil.din; ++i) out(c, i) = dil.v(alpha * dil.s + c, i);
  return out;
}

}  // namespace detail

// Given CP maps summing to the dilated map, finds the ancilla POVM {Q_b} with
// part_b*(A) = V^dagger (A (x) Q_b) V. The normal equations of the least-squares
// problem factor as G (x) conj(G) with G = Tr_out V V^dagger, so the
// minimum-norm solution is G^+ R_b G^+. Levels outside the support of G get an
// equal share of the complement so the result is a full POVM.
inline POVM radon_nikodym(const std::vector<CPMap>& parts, const StinespringDilation& dil,
                          const Tolerances& tol = {}) {
  if (parts.empty()) throw DimensionError("radon_nikodym: no parts");
  for (const auto& p : parts)
    if (p.din() != dil.din || p.dout() != dil.dout)
      throw DimensionError("radon_nikodym: part dims differ from the dilation");

  const std::size_t s = dil.s, dout = dil.dout;
  std::vector<CMat> slice;
  for (std::size_t al = 0; al < dout; ++al) slice.push_back(detail::dilation_slice(dil, al));

  CMat gram(s);
  for (std::size_t al = 0; al < dout; ++al) gram += slice[al] * slice[al].adjoint();
  gram = hermitian_part(gram);
  const auto geig = eigh(gram, tol.herm);
  const double top = geig.values.empty() ? 0.0 : std::max(0.0, geig.values.back());
  const double cut = tol.rank * top;
  const auto keep = [&](double x) { return top > 0.0 && x > cut; };
  const CMat gram_pinv = spectral_apply(geig, [&](double x) { return keep(x) ? 1.0 / x : 0.0; });
  const CMat support = spectral_apply(geig, [&](double x) { return keep(x) ? 1.0 : 0.0; });
  const CMat complement = (CMat::identity(s) - support) * (1.0 / static_cast<double>(parts.size()));

  std::vector<CMat> effects;
  double residual = 0.0, reference = 0.0;
  for (const auto& part : parts) {
    std::vector<CMat> images(dout * dout);
    CMat rhs(s);
    for (std::size_t al = 0; al < dout; ++al)
      for (std::size_t be = 0; be < dout; ++be) {
        images[al * dout + be] = dual_apply(part, CMat::unit(dout, al, be));
        rhs += slice[al] * images[al * dout + be] * slice[be].adjoint();
      }
    CMat q = hermitian_part(gram_pinv * rhs * gram_pinv);
    q = project_psd(q, tol.herm) + complement;

    for (std::size_t al = 0; al < dout; ++al)
      for (std::size_t be = 0; be < dout; ++be) {
        const CMat& target = images[al * dout + be];
        const CMat rebuilt = slice[al].adjoint() * q * slice[be];
        const double r = distance(rebuilt, target), t = target.frobenius_norm();
        residual += r * r;
        reference += t * t;
      }
    effects.push_back(std::move(q));
  }
  if (!within(std::sqrt(residual), std::sqrt(reference), tol.rn))
    throw DecompositionError("Radon-Nikodym reconstruction residual " + std::to_string(std::sqrt(residual)) +
                             " exceeds tolerance");

  CMat total(s);
  for (const auto& e : effects) total += e;
  if (!within(distance(total, CMat::identity(s)), std::sqrt(static_cast<double>(s)), tol.rn))
    throw DecompositionError("Radon-Nikodym derivatives do not sum to the identity");
  return POVM(s, std::move(effects));
}

}  // namespace mmsim
