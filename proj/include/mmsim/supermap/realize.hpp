#pragma once

#include <algorithm>
#include <cstddef>
#include <string>
#include <vector>

#include "mmsim/densemat.hpp"
#include "mmsim/qcore/choi.hpp"
#include "mmsim/qcore/dilation.hpp"
#include "mmsim/supermap/realization.hpp"
#include "mmsim/supermap/superchannel.hpp"

namespace mmsim {

namespace detail {

// The map M_n -> M_d whose dual sends Z in M_d to the (b, y) output block of
// psi(|a><a| (x) Z (x) |x><x|). Read straight off the Choi matrix.
inline CPMap component_map(const Superchannel& psi, std::size_t b, std::size_t x, std::size_t a, std::size_t y) {
  const SlotDims& in = psi.in();
  const SlotDims& out = psi.out();
  const std::size_t din = in.size();
  const CMat& j = psi.choi();
  const std::size_t n = out.d, d = in.d;
  CMat c(n * d);
  for (std::size_t p = 0; p < d; ++p)
    for (std::size_t q = 0; q < d; ++q) {
      // dual(|q><p|) evaluated at matrix entry (jj, ii) fills c[(p,ii),(q,jj)]
      const std::size_t u = multimeter_index(a, q, x, d, in.g);
      const std::size_t v = multimeter_index(a, p, x, d, in.g);
      for (std::size_t ii = 0; ii < n; ++ii)
        for (std::size_t jj = 0; jj < n; ++jj) {
          const std::size_t row = multimeter_index(b, jj, y, n, out.g);
          const std::size_t col = multimeter_index(b, ii, y, n, out.g);
          c(p * n + ii, q * n + jj) = j(row * din + u, col * din + v);
        }
    }
  return CPMap(n, d, std::move(c));
}

}  // namespace detail

struct RealizeReport {
  GeneralRealization realization;
  double roundtrip_residual = 0.0;  // worst spanning-set discrepancy
};

// Reads a quantum-ancilla realisation off a multimeter superchannel: split psi
// into components indexed by (b, x, a, y), dilate the b-marginals with a
// common ancilla size, take Radon-Nikodym derivatives for the b-dependence,
// then undo the transposes that the Choi encoding introduces. The result is
// checked by rebuilding the superchannel.
inline RealizeReport realize_with_report(const Superchannel& input, const Tolerances& tol = {}) {
  const Superchannel psi = certify(input, tol);
  const SlotDims in = psi.in(), out = psi.out();
  const double check_tol = tol.eq * static_cast<double>(in.size());

  // parts[y][x][a][b]
  std::vector<std::vector<std::vector<std::vector<CPMap>>>> parts(out.g);
  std::vector<std::vector<CPMap>> marginal(out.g);
  for (std::size_t y = 0; y < out.g; ++y) {
    parts[y].resize(in.g);
    CMat unital(out.d);
    for (std::size_t x = 0; x < in.g; ++x) {
      parts[y][x].resize(in.k);
      std::vector<CMat> sums;
      for (std::size_t a = 0; a < in.k; ++a) {
        CMat sum(out.d * in.d);
        for (std::size_t b = 0; b < out.k; ++b) {
          parts[y][x][a].push_back(detail::component_map(psi, b, x, a, y));
          sum += parts[y][x][a].back().choi();
        }
        sums.push_back(std::move(sum));
      }
      CMat mean(out.d * in.d);
      for (const auto& s : sums) mean += s;
      mean *= 1.0 / static_cast<double>(in.k);
      for (std::size_t a = 0; a < in.k; ++a)
        if (!within(distance(sums[a], mean), mean.frobenius_norm(), check_tol))
          throw RealizationError("b-marginal depends on the input outcome a (x=" + std::to_string(x) +
                                 ", y=" + std::to_string(y) + ")");
      marginal[y].emplace_back(out.d, in.d, hermitian_part(mean));
      unital += dual_apply(marginal[y].back(), CMat::identity(in.d));
    }
    if (!within(distance(unital, CMat::identity(out.d)), std::sqrt(static_cast<double>(out.d)), check_tol))
      throw RealizationError("setting marginals for y=" + std::to_string(y) + " are not unital");
  }

  std::size_t s = 1;
  for (std::size_t y = 0; y < out.g; ++y)
    for (std::size_t x = 0; x < in.g; ++x) s = std::max(s, stinespring(marginal[y][x], 1, tol).s);

  GeneralRealization r;
  r.in = in;
  r.out = out;
  r.s = s;
  r.lambda.resize(out.g);
  r.b.resize(out.g);
  for (std::size_t y = 0; y < out.g; ++y)
    for (std::size_t x = 0; x < in.g; ++x) {
      const auto dil = stinespring(marginal[y][x], s, tol);
      // Lambda*(X) = (V^dag X^T V)^T = conj(V)^dag X conj(V)
      r.lambda[y].push_back(cpmap_from_kraus({dil.v.conj()}, out.d, in.d * s));
      std::vector<POVM> per_a;
      for (std::size_t a = 0; a < in.k; ++a) {
        const POVM q = radon_nikodym(parts[y][x][a], dil, tol);
        std::vector<CMat> effects;
        for (const auto& e : q.effects()) effects.push_back(e.transpose());
        per_a.emplace_back(s, std::move(effects));
      }
      r.b[y].push_back(std::move(per_a));
    }

  RealizeReport rep;
  // The pieces are only accurate to the Radon-Nikodym tolerance.
  Tolerances loose = tol;
  loose.eq = std::max(tol.eq, tol.rn);
  const Superchannel rebuilt = from_general_realization(r, loose);
  rep.roundtrip_residual = action_distance(rebuilt, psi, tol);
  if (!within(rep.roundtrip_residual, 1.0, check_tol))
    throw RealizationError("rebuilt superchannel differs from the input by " +
                           std::to_string(rep.roundtrip_residual));
  rep.realization = std::move(r);
  return rep;
}

inline GeneralRealization realize(const Superchannel& psi, const Tolerances& tol = {}) {
  return realize_with_report(psi, tol).realization;
}

}  // namespace mmsim
