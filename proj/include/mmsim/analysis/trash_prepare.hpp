#pragma once

#include <cmath>
#include <cstddef>
#include <optional>
#include <vector>

#include "mmsim/analysis/triviality.hpp"
#include "mmsim/qcore/choi.hpp"
#include "mmsim/supermap/realization.hpp"
#include "mmsim/supermap/superchannel.hpp"

namespace mmsim {

struct TAPResult {
  bool holds = false;
  std::optional<Multimeter> prepared;       // image of the uniform multimeter
  std::optional<std::size_t> witness_index;  // spanning element whose image differs
  double max_deviation = 0.0;
};

// Exact: psi is constant on multimeters iff it is constant on an affinely
// spanning set.
inline TAPResult is_trash_and_prepare(const Superchannel& psi, const Tolerances& tol = {}) {
  TAPResult res;
  const auto inputs = affine_spanning_multimeters(psi.in().g, psi.in().k, psi.in().d, tol);
  const Multimeter base = apply(psi, inputs[0], tol);
  for (std::size_t i = 1; i < inputs.size(); ++i) {
    const double dev = multimeter_distance(apply(psi, inputs[i], tol), base);
    res.max_deviation = std::max(res.max_deviation, dev);
    if (!res.witness_index && !within(dev, 1.0, tol.eq)) res.witness_index = i;
  }
  res.holds = !res.witness_index.has_value();
  res.prepared = base;
  return res;
}

// nu_bar(b|a,x,y,l) = (1/k) sum_a' nu(b|a',x,y,l)
inline CondProb averaged_nu(const ClassicalRealization& r) {
  CondProb out = r.nu;
  const std::size_t k = r.in.k;
  for (std::size_t x = 0; x < r.in.g; ++x)
    for (std::size_t y = 0; y < r.out.g; ++y)
      for (std::size_t anc = 0; anc < r.s; ++anc)
        for (std::size_t b = 0; b < r.out.k; ++b) {
          double mean = 0.0;
          for (std::size_t a = 0; a < k; ++a) mean += r.nu(b, {a, x, y, anc});
          mean /= static_cast<double>(k);
          for (std::size_t a = 0; a < k; ++a) out(b, {a, x, y, anc}) = mean;
        }
  return out;
}

struct StructuralTAPResult {
  bool holds = false;
  double deviation = 0.0;  // worst spanning-set gap between r and its averaged version
  // s = 1 only: nu ignores a on every branch that is not identically zero.
  std::optional<bool> direct_criterion;
};

// psi is trash-and-prepare iff replacing nu by its a-average leaves the
// induced map unchanged.
inline StructuralTAPResult is_trash_and_prepare_structural(const ClassicalRealization& r, const Tolerances& tol = {}) {
  validate(r, tol);
  ClassicalRealization avg = r;
  avg.nu = averaged_nu(r);
  StructuralTAPResult res;
  for (const auto& m : affine_spanning_multimeters(r.in.g, r.in.k, r.in.d, tol))
    res.deviation = std::max(res.deviation, multimeter_distance(realization_output(avg, m), realization_output(r, m)));
  res.holds = within(res.deviation, 1.0, tol.eq);

  if (r.s == 1) {
    bool direct = true;
    for (std::size_t y = 0; y < r.out.g && direct; ++y)
      for (std::size_t x = 0; x < r.in.g && direct; ++x) {
        if (r.branch(x, 0, y).choi().frobenius_norm() <= tol.eq) continue;
        direct = detail::nu_independent_of_a(r, x, y, 0, tol.eq);
      }
    res.direct_criterion = direct;
  }
  return res;
}

}  // namespace mmsim
