#pragma once

#include <algorithm>
#include <cstddef>

#include "mmsim/qcore/choi.hpp"
#include "mmsim/qcore/objects.hpp"

namespace mmsim {

// Largest Frobenius gap of N_{a|x} - sum_c Phi*_c(M_{a|x*C+c}).
// phi: M_n -> M_d with C branches; target on C^n, source on C^d.
inline double compression_residual(const Multimeter& target, const Multimeter& source, const Instrument& phi) {
  const std::size_t c_count = phi.outcomes();
  if (source.g() != target.g() * c_count) throw DimensionError("source needs g * C settings");
  if (source.k() != target.k()) throw DimensionError("source and target differ in outcome count");
  if (phi.din() != target.d() || phi.dout() != source.d()) throw DimensionError("instrument does not map target to source");
  double worst = 0.0;
  for (std::size_t x = 0; x < target.g(); ++x)
    for (std::size_t a = 0; a < target.k(); ++a) {
      CMat sum(target.d());
      for (std::size_t c = 0; c < c_count; ++c) sum += dual_apply(phi[c], source.effect(a, x * c_count + c));
      worst = std::max(worst, distance(sum, target.effect(a, x)));
    }
  return worst;
}

inline bool verify_compression(const Multimeter& target, const Multimeter& source, const Instrument& phi,
                               const Tolerances& tol = {}) {
  return within(compression_residual(target, source, phi), 1.0, tol.eq);
}

}  // namespace mmsim
