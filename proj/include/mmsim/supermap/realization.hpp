#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "mmsim/densemat.hpp"
#include "mmsim/qcore/choi.hpp"
#include "mmsim/qcore/condprob.hpp"
#include "mmsim/qcore/objects.hpp"
#include "mmsim/supermap/superchannel.hpp"

namespace mmsim {

// Quantum-ancilla realisation
//   N_{b|y} = sum_{x,a} Lambda*_{x|y}(M_{a|x} (x) B_{b|a,x,y}).
// lambda[y][x] is stored in the Schroedinger direction, M_n -> M_{d s} with the
// output ordered (d, s); the Heisenberg map Lambda* is its dual. For each y the
// maps lambda[y][*] form an instrument. b[y][x][a] is a POVM on C^s with l
// outcomes.
struct GeneralRealization {
  SlotDims in;
  SlotDims out;
  std::size_t s = 1;
  std::vector<std::vector<CPMap>> lambda;
  std::vector<std::vector<std::vector<POVM>>> b;
};

// Classical-ancilla realisation
//   N_{b|y} = sum_{x,a,l} nu(b | a,x,y,l) Lambda*_{x,l|y}(M_{a|x}).
// lambda[y] is an instrument M_n -> M_d with g*s branches, branch x*s + l.
// nu has l outcomes and is conditioned on (a, x, y, l) with alphabet sizes
// (k, g, r, s).
struct ClassicalRealization {
  SlotDims in;
  SlotDims out;
  std::size_t s = 1;
  std::vector<Instrument> lambda;
  CondProb nu;

  const CPMap& branch(std::size_t x, std::size_t anc, std::size_t y) const { return lambda.at(y)[x * s + anc]; }
};

inline void validate(const GeneralRealization& r, const Tolerances& tol = {}) {
  const auto fail = [](const std::string& what) { throw RealizationError("general realisation: " + what); };
  if (r.s == 0) fail("ancilla dimension is zero");
  if (r.lambda.size() != r.out.g || r.b.size() != r.out.g) fail("expected one entry per output setting");
  for (std::size_t y = 0; y < r.out.g; ++y) {
    if (r.lambda[y].size() != r.in.g || r.b[y].size() != r.in.g) fail("expected one entry per input setting");
    std::vector<CPMap> branches;
    for (std::size_t x = 0; x < r.in.g; ++x) {
      const CPMap& m = r.lambda[y][x];
      if (m.din() != r.out.d || m.dout() != r.in.d * r.s) fail("instrument branch has the wrong dims");
      branches.push_back(m);
      if (r.b[y][x].size() != r.in.k) fail("expected one ancilla POVM per input outcome");
      for (const auto& povm : r.b[y][x]) {
        if (povm.d() != r.s || povm.k() != r.out.k) fail("ancilla POVM has the wrong shape");
        try {
          validate(povm, tol);
        } catch (const Error& e) {
          fail(std::string("ancilla POVM invalid: ") + e.what());
        }
      }
    }
    try {
      validate(Instrument(r.out.d, r.in.d * r.s, branches), tol);
    } catch (const Error& e) {
      fail("maps for output setting " + std::to_string(y) + " are not an instrument: " + e.what());
    }
  }
}

inline void validate(const ClassicalRealization& r, const Tolerances& tol = {}) {
  const auto fail = [](const std::string& what) { throw RealizationError("classical realisation: " + what); };
  if (r.s == 0) fail("ancilla alphabet is empty");
  if (r.lambda.size() != r.out.g) fail("expected one instrument per output setting");
  for (std::size_t y = 0; y < r.out.g; ++y) {
    const Instrument& inst = r.lambda[y];
    if (inst.din() != r.out.d || inst.dout() != r.in.d || inst.outcomes() != r.in.g * r.s)
      fail("instrument " + std::to_string(y) + " has the wrong shape");
    try {
      validate(inst, tol);
    } catch (const Error& e) {
      fail("instrument " + std::to_string(y) + " invalid: " + e.what());
    }
  }
  if (r.nu.outcomes() != r.out.k || r.nu.given() != std::vector<std::size_t>{r.in.k, r.in.g, r.out.g, r.s})
    fail("postprocessing has the wrong shape");
  try {
    validate(r.nu, tol);
  } catch (const Error& e) {
    fail(std::string("postprocessing invalid: ") + e.what());
  }
}

// Lambda_{x|y}(rho) = sum_l Lambda_{x,l|y}(rho) (x) |l><l|, B_{b|a,x,y} = sum_l nu |l><l|.
inline GeneralRealization classical_as_general(const ClassicalRealization& r) {
  GeneralRealization g;
  g.in = r.in;
  g.out = r.out;
  g.s = r.s;
  const std::size_t n = r.out.d, d = r.in.d, s = r.s;
  g.lambda.resize(r.out.g);
  g.b.resize(r.out.g);
  for (std::size_t y = 0; y < r.out.g; ++y)
    for (std::size_t x = 0; x < r.in.g; ++x) {
      CMat j(n * d * s);
      for (std::size_t anc = 0; anc < s; ++anc) {
        const CMat& part = r.branch(x, anc, y).choi();
        for (std::size_t p = 0; p < d; ++p)
          for (std::size_t i = 0; i < n; ++i)
            for (std::size_t q = 0; q < d; ++q)
              for (std::size_t k = 0; k < n; ++k)
                j(((p * s + anc) * n) + i, ((q * s + anc) * n) + k) = part(p * n + i, q * n + k);
      }
      g.lambda[y].emplace_back(n, d * s, std::move(j));

      std::vector<POVM> per_a;
      for (std::size_t a = 0; a < r.in.k; ++a) {
        std::vector<CMat> effects;
        for (std::size_t b = 0; b < r.out.k; ++b) {
          std::vector<double> diag(s);
          for (std::size_t anc = 0; anc < s; ++anc) diag[anc] = r.nu(b, {a, x, y, anc});
          effects.push_back(CMat::diagonal(diag));
        }
        per_a.emplace_back(s, std::move(effects));
      }
      g.b[y].push_back(std::move(per_a));
    }
  return g;
}

// Builds the superchannel
//   Psi(W) = sum_{x,a,y,b} |b><b| (x) [Lambda*_{x|y}(W_{ax}^T (x) B_{b|a,x,y})]^T (x) |y><y|
// where W_{ax} is the (a, x) diagonal block of W. On a multimeter Choi matrix
// this produces the Choi matrix of N; off the block pattern it is zero.
inline Superchannel from_general_realization(const GeneralRealization& r, const Tolerances& tol = {}) {
  validate(r, tol);
  const SlotDims& in = r.in;
  const SlotDims& out = r.out;
  const std::size_t din = in.size(), dout = out.size();
  CMat j(din * dout);
  for (std::size_t y = 0; y < out.g; ++y)
    for (std::size_t x = 0; x < in.g; ++x)
      for (std::size_t a = 0; a < in.k; ++a)
        for (std::size_t b = 0; b < out.k; ++b) {
          const CMat& anc = r.b[y][x][a][b];
          for (std::size_t al = 0; al < in.d; ++al)
            for (std::size_t be = 0; be < in.d; ++be) {
              // image of |al><be| in the (a, x) block, before the outer transpose
              const CMat img = dual_apply(r.lambda[y][x], kron(CMat::unit(in.d, be, al), anc));
              const std::size_t u = multimeter_index(a, al, x, in.d, in.g);
              const std::size_t v = multimeter_index(a, be, x, in.d, in.g);
              for (std::size_t p = 0; p < out.d; ++p)
                for (std::size_t q = 0; q < out.d; ++q) {
                  const std::size_t row = multimeter_index(b, p, y, out.d, out.g);
                  const std::size_t col = multimeter_index(b, q, y, out.d, out.g);
                  j(row * din + u, col * din + v) += img(q, p);
                }
            }
        }
  return Superchannel(in, out, CPMap(din, dout, std::move(j)), true);
}

inline Superchannel from_classical_realization(const ClassicalRealization& r, const Tolerances& tol = {}) {
  validate(r, tol);
  return from_general_realization(classical_as_general(r), tol);
}

// N_{b|y} evaluated straight from the realisation formula, without building
// the superchannel.
inline Multimeter realization_output(const GeneralRealization& r, const Multimeter& m) {
  if (dims_of(m) != r.in) throw DimensionError("multimeter does not fit the realisation");
  std::vector<POVM> povms;
  for (std::size_t y = 0; y < r.out.g; ++y) {
    std::vector<CMat> effects(r.out.k, CMat(r.out.d));
    for (std::size_t x = 0; x < r.in.g; ++x)
      for (std::size_t a = 0; a < r.in.k; ++a)
        for (std::size_t b = 0; b < r.out.k; ++b)
          effects[b] += dual_apply(r.lambda[y][x], kron(m.effect(a, x), r.b[y][x][a][b]));
    povms.emplace_back(r.out.d, std::move(effects));
  }
  return Multimeter(std::move(povms));
}

inline Multimeter realization_output(const ClassicalRealization& r, const Multimeter& m) {
  if (dims_of(m) != r.in) throw DimensionError("multimeter does not fit the realisation");
  std::vector<POVM> povms;
  for (std::size_t y = 0; y < r.out.g; ++y) {
    std::vector<CMat> effects(r.out.k, CMat(r.out.d));
    for (std::size_t x = 0; x < r.in.g; ++x)
      for (std::size_t anc = 0; anc < r.s; ++anc)
        for (std::size_t a = 0; a < r.in.k; ++a) {
          const CMat img = dual_apply(r.branch(x, anc, y), m.effect(a, x));
          for (std::size_t b = 0; b < r.out.k; ++b) effects[b].add_scaled(img, r.nu(b, {a, x, y, anc}));
        }
    povms.emplace_back(r.out.d, std::move(effects));
  }
  return Multimeter(std::move(povms));
}

}  // namespace mmsim
