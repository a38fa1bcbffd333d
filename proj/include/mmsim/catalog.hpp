#pragma once

#include <cmath>
#include <vector>

#include "mmsim/densemat.hpp"
#include "mmsim/qcore/choi.hpp"
#include "mmsim/qcore/condprob.hpp"
#include "mmsim/supermap/constructors.hpp"
#include "mmsim/supermap/realization.hpp"

// Small named instances used by the CLI example suite and the tests.
namespace mmsim::catalog {

inline CMat hadamard() {
  const double h = 1.0 / std::sqrt(2.0);
  return CMat::from_rows({{h, h}, {h, -h}});
}

inline POVM computational_basis(std::size_t d) {
  std::vector<CMat> e;
  for (std::size_t i = 0; i < d; ++i) e.push_back(CMat::unit(d, i, i));
  return POVM(d, std::move(e));
}

inline POVM hadamard_basis() {
  const CMat h = hadamard();
  return POVM(2, {h * CMat::unit(2, 0, 0) * h, h * CMat::unit(2, 1, 1) * h});
}

// Z and X measurements on a qubit: the standard incompatible pair.
inline Multimeter basis_and_hadamard() { return Multimeter({computational_basis(2), hadamard_basis()}); }

// One input setting, two output settings: N_{b|y} = H^y M_b H^y on a qubit.
inline ClassicalRealization hadamard_realization() {
  ClassicalRealization r;
  r.in = {1, 2, 2};
  r.out = {2, 2, 2};
  r.s = 1;
  r.lambda.emplace_back(2, 2, std::vector<CPMap>{identity_channel(2)});
  r.lambda.emplace_back(2, 2, std::vector<CPMap>{cpmap_from_kraus({hadamard()}, 2, 2)});
  r.nu = CondProb::deterministic(2, {2, 1, 2, 1}, [](const auto& c) { return c[0]; });
  return r;
}

// Lueders instrument for the binary POVM (E, 1-E) followed by the
// postprocessing nu(0|a, lambda=0) = p for a = 0 and q for a = 1, and
// nu(0|a, lambda=1) = 0. On a single binary input (F, 1-F) the output effect
// is q E + (p - q) sqrt(E) F sqrt(E).
inline ClassicalRealization lueders_realization(double p, double q, const CMat& e) {
  const std::size_t d = e.rows();
  const CMat root = psd_sqrt(e);
  const CMat root_rest = psd_sqrt(CMat::identity(d) - e);
  const Instrument gamma(d, d, {cpmap_from_kraus({root}, d, d), cpmap_from_kraus({root_rest}, d, d)});
  CondProb weight(1, {});
  weight(0, {}) = 1.0;
  CondProb pi(1, {1, 2, 1});
  pi(0, {0, 0, 0}) = 1.0;
  pi(0, {0, 1, 0}) = 1.0;
  CondProb nu(2, {2, 1, 1, 2, 1});
  const double zero_prob[2][2] = {{p, 0.0}, {q, 0.0}};  // [a][lambda]
  for (std::size_t a = 0; a < 2; ++a)
    for (std::size_t lam = 0; lam < 2; ++lam) {
      nu(0, {a, 0, 0, lam, 0}) = zero_prob[a][lam];
      nu(1, {a, 0, 0, lam, 0}) = 1.0 - zero_prob[a][lam];
    }
  return compatibility_preserving_realization(weight, {gamma}, pi, nu);
}

inline CMat lueders_default_effect() { return CMat::diagonal({1.0, 0.5}); }

// Two input settings measured after a computational-basis instrument that
// picks the setting: N_b = sum_x <x|M_{b|x}|x> |x><x|. Not triviality-preserving.
inline ClassicalRealization dephasing_realization() {
  ClassicalRealization r;
  r.in = {2, 2, 2};
  r.out = {1, 2, 2};
  r.s = 1;
  r.lambda.emplace_back(2, 2, std::vector<CPMap>{cpmap_from_kraus({CMat::unit(2, 0, 0)}, 2, 2),
                                                 cpmap_from_kraus({CMat::unit(2, 1, 1)}, 2, 2)});
  r.nu = CondProb::deterministic(2, {2, 2, 1, 1}, [](const auto& c) { return c[0]; });
  return r;
}

}  // namespace mmsim::catalog
