#pragma once

// Random realisations shared by the unit tests and the acceptance runner.

#include <algorithm>
#include <cmath>
#include <vector>

#include "mmsim/random.hpp"
#include "mmsim/supermap/realization.hpp"

namespace fixtures {

using namespace mmsim;

inline GeneralRealization random_general_realization(RandomSource& rng, SlotDims in, SlotDims out, std::size_t s) {
  GeneralRealization r;
  r.in = in;
  r.out = out;
  r.s = s;
  r.lambda.resize(out.g);
  r.b.resize(out.g);
  for (std::size_t y = 0; y < out.g; ++y) {
    const Instrument inst = rng.instrument(out.d, in.d * s, in.g, 1 + rng.index(2));
    r.lambda[y] = inst.branches();
    for (std::size_t x = 0; x < in.g; ++x) {
      std::vector<POVM> per_a;
      for (std::size_t a = 0; a < in.k; ++a) per_a.push_back(rng.povm(s, out.k));
      r.b[y].push_back(std::move(per_a));
    }
  }
  return r;
}

inline ClassicalRealization random_classical_realization(RandomSource& rng, SlotDims in, SlotDims out, std::size_t s) {
  ClassicalRealization r;
  r.in = in;
  r.out = out;
  r.s = s;
  for (std::size_t y = 0; y < out.g; ++y) r.lambda.push_back(rng.instrument(out.d, in.d, in.g * s, 1 + rng.index(2)));
  r.nu = rng.cond_prob(out.k, {in.k, in.g, out.g, s});
  return r;
}

// ---- s = 1 realisations for the triviality-preserving deciders -------------
//
// Each mode targets a different branch of the structural argument:
//   0  Lambda = pi * channel everywhere (holds)
//   1  generic instrument and postprocessing (fails)
//   2  generic instrument, nu ignores a and x (holds through pooling)
//   3  channels on some settings, pooled generic branches on the rest (holds)
//   4  generic instrument, nu ignores a but not x (fails through pooling)
//   5  like 3 but one a-dependent setting gets a generic branch (fails)
inline constexpr int kTpModes = 6;

inline ClassicalRealization tp_mode_realization(RandomSource& rng, int mode, SlotDims in, SlotDims out) {
  ClassicalRealization r;
  r.in = in;
  r.out = out;
  r.s = 1;
  const std::size_t g = in.g;
  const std::size_t split = g >= 2 ? 1 + rng.index(g - 1) : g;  // settings [0, split) depend on a
  for (std::size_t y = 0; y < out.g; ++y) {
    std::vector<CPMap> branches;
    if (mode == 0) {
      const auto pi = rng.distribution(g);
      for (std::size_t x = 0; x < g; ++x) branches.push_back(scaled(rng.channel(out.d, in.d), pi[x]));
    } else if (mode == 1 || mode == 2 || mode == 4) {
      branches = rng.instrument(out.d, in.d, g).branches();
    } else {
      const auto pi = rng.distribution(split + 1);
      for (std::size_t x = 0; x < split; ++x) branches.push_back(scaled(rng.channel(out.d, in.d), pi[x]));
      if (mode == 5) branches[0] = rng.instrument(out.d, in.d, 2)[0];
      if (split < g) {
        const auto rest = rng.instrument(out.d, in.d, g - split).branches();
        for (const auto& b : rest) branches.push_back(scaled(b, pi[split]));
      } else {
        for (auto& b : branches) b = scaled(b, 1.0 / (1.0 - pi[split]));
      }
      if (mode == 5) {
        // renormalise so the branches still form an instrument
        CMat total(out.d * in.d);
        for (const auto& b : branches) total += b.choi();
        const CMat traced = partial_trace(total, {in.d, out.d}, {1});
        const CMat inv_sqrt = spectral_apply(eigh(hermitian_part(traced)), [](double v) { return 1.0 / std::sqrt(v); });
        const CMat side = kron(CMat::identity(in.d), inv_sqrt);
        for (auto& b : branches) b = CPMap(out.d, in.d, hermitian_part(side * b.choi() * side));
      }
    }
    r.lambda.emplace_back(out.d, in.d, std::move(branches));
  }

  r.nu = rng.cond_prob(out.k, {in.k, g, out.g, 1});
  auto flatten_over_a = [&](std::size_t x, std::size_t y, const std::vector<double>& w) {
    for (std::size_t a = 0; a < in.k; ++a)
      for (std::size_t b = 0; b < out.k; ++b) r.nu(b, {a, x, y, 0}) = w[b];
  };
  for (std::size_t y = 0; y < out.g; ++y) {
    const auto shared = rng.distribution(out.k);
    for (std::size_t x = 0; x < g; ++x) {
      if (mode == 2) flatten_over_a(x, y, shared);
      if (mode == 4) flatten_over_a(x, y, rng.distribution(out.k));
      if ((mode == 3 || mode == 5) && x >= split) flatten_over_a(x, y, shared);
    }
  }
  return r;
}

// ---- classical realisations for the trash-and-prepare deciders --------------
//
//   0  nu ignores a (holds)
//   1  generic (fails)
//   2  s >= 2: two identical branches whose a-dependence cancels (holds)
//   3  a-dependence only on branches that are identically zero (holds)
//   4  nu ignores a except on one live branch (fails)
inline constexpr int kTapModes = 5;

inline ClassicalRealization tap_mode_realization(RandomSource& rng, int mode, SlotDims in, SlotDims out,
                                                 std::size_t s) {
  if (mode == 2 && s < 2) s = 2;
  if (mode == 3 && in.g < 2) in.g = 2;
  ClassicalRealization r;
  r.in = in;
  r.out = out;
  r.s = s;
  for (std::size_t y = 0; y < out.g; ++y) {
    std::vector<CPMap> branches;
    if (mode == 3) {
      const CPMap zero(out.d, in.d, CMat(out.d * in.d));
      branches.assign(s, zero);  // setting 0 never fires
      const Instrument live = rng.instrument(out.d, in.d, (in.g - 1) * s);
      for (const auto& b : live.branches()) branches.push_back(b);
    } else {
      branches = rng.instrument(out.d, in.d, in.g * s).branches();
    }
    if (mode == 2)
      for (std::size_t x = 0; x < in.g; ++x) {
        const CMat half = (branches[x * s].choi() + branches[x * s + 1].choi()) * 0.5;
        branches[x * s] = CPMap(out.d, in.d, half);
        branches[x * s + 1] = CPMap(out.d, in.d, half);
      }
    r.lambda.emplace_back(out.d, in.d, std::move(branches));
  }

  r.nu = rng.cond_prob(out.k, {in.k, in.g, out.g, s});
  if (mode == 1) return r;
  for (std::size_t x = 0; x < in.g; ++x)
    for (std::size_t y = 0; y < out.g; ++y)
      for (std::size_t anc = 0; anc < s; ++anc) {
        if (mode == 3 && x == 0) continue;
        const auto w = rng.distribution(out.k);
        for (std::size_t a = 0; a < in.k; ++a)
          for (std::size_t b = 0; b < out.k; ++b) r.nu(b, {a, x, y, anc}) = w[b];
      }
  if (mode == 2)
    for (std::size_t x = 0; x < in.g; ++x)
      for (std::size_t y = 0; y < out.g; ++y) {
        // nu(.|a,lambda=0) = w + delta_a, nu(.|a,lambda=1) = w - delta_a
        std::vector<double> w(out.k);
        for (std::size_t b = 0; b < out.k; ++b) w[b] = r.nu(b, {0, x, y, 0});
        const double floor = *std::min_element(w.begin(), w.end());
        for (std::size_t a = 0; a < in.k; ++a) {
          std::vector<double> delta(out.k);
          double mean = 0.0;
          for (auto& v : delta) mean += (v = rng.uniform() - 0.5);
          mean /= static_cast<double>(out.k);
          for (std::size_t b = 0; b < out.k; ++b) {
            const double shift = 0.9 * floor * (delta[b] - mean);
            r.nu(b, {a, x, y, 0}) = w[b] + shift;
            r.nu(b, {a, x, y, 1}) = w[b] - shift;
          }
        }
      }
  if (mode == 4) {
    const std::size_t x = rng.index(in.g), y = rng.index(out.g), anc = rng.index(s);
    const std::size_t a = in.k - 1;
    const auto w = rng.distribution(out.k);
    for (std::size_t b = 0; b < out.k; ++b) r.nu(b, {a, x, y, anc}) = 0.5 * (r.nu(b, {a, x, y, anc}) + w[b]);
  }
  return r;
}

inline Multimeter random_output_probe(RandomSource& rng, const SlotDims& in) { return rng.multimeter(in.g, in.k, in.d); }

}  // namespace fixtures
