#pragma once

#include <algorithm>
#include <cstddef>

namespace mmsim {

// Numerical thresholds shared by every decision procedure. Equality checks are
// Frobenius-norm based and relative to max(1, norm of the reference).
struct Tolerances {
  double eq = 1e-8;
  double herm = 1e-9;
  double psd = 1e-9;
  double rank = 1e-10;  // relative to the largest eigenvalue
  double rn = 1e-7;     // Radon-Nikodym reconstruction residual
  double lp = 1e-9;
  double compat = 1e-7;
  std::size_t compat_max_iter = 20000;
  std::size_t cap = 1'000'000;  // spanning-set and vertex enumeration limit
};

inline bool within(double residual, double reference_norm, double tol) {
  return residual <= tol * std::max(1.0, reference_norm);
}

}  // namespace mmsim
