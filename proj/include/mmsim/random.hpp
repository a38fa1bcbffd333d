#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "mmsim/densemat.hpp"
#include "mmsim/qcore/choi.hpp"
#include "mmsim/qcore/condprob.hpp"
#include "mmsim/qcore/objects.hpp"

namespace mmsim {

// Seeded source of random test objects. Everything is reproducible from the
// 64-bit seed on a given standard library.
class RandomSource {
 public:
  explicit RandomSource(std::uint64_t seed) : eng_(seed) {}

  std::mt19937_64& engine() { return eng_; }

  double uniform() { return std::uniform_real_distribution<double>(0.0, 1.0)(eng_); }
  double normal() { return std::normal_distribution<double>(0.0, 1.0)(eng_); }
  std::size_t index(std::size_t n) { return std::uniform_int_distribution<std::size_t>(0, n - 1)(eng_); }
  std::size_t between(std::size_t lo, std::size_t hi) {
    return std::uniform_int_distribution<std::size_t>(lo, hi)(eng_);
  }

  CMat ginibre(std::size_t rows, std::size_t cols) {
    CMat out(rows, cols);
    for (auto& v : out.data()) v = Complex(normal(), normal());
    return out;
  }

  // Random PSD matrix of the given rank (rank == 0 means full).
  CMat psd(std::size_t dim, std::size_t rank = 0) {
    const CMat g = ginibre(dim, rank == 0 ? dim : rank);
    return hermitian_part(g * g.adjoint());
  }

  CMat density(std::size_t dim, std::size_t rank = 0) {
    CMat p = psd(dim, rank);
    const double t = p.trace().real();
    return p * (1.0 / t);
  }

  CMat hermitian(std::size_t dim) { return hermitian_part(ginibre(dim, dim)); }

  // Gram-Schmidt on a Ginibre matrix.
  CMat unitary(std::size_t dim) {
    CMat a = ginibre(dim, dim);
    for (std::size_t c = 0; c < dim; ++c) {
      for (std::size_t prev = 0; prev < c; ++prev) {
        Complex ip = 0.0;
        for (std::size_t r = 0; r < dim; ++r) ip += std::conj(a(r, prev)) * a(r, c);
        for (std::size_t r = 0; r < dim; ++r) a(r, c) -= ip * a(r, prev);
      }
      double nrm = 0.0;
      for (std::size_t r = 0; r < dim; ++r) nrm += std::norm(a(r, c));
      nrm = std::sqrt(nrm);
      for (std::size_t r = 0; r < dim; ++r) a(r, c) /= nrm;
    }
    return a;
  }

  POVM povm(std::size_t d, std::size_t k) {
    std::vector<CMat> raw;
    CMat total(d);
    for (std::size_t a = 0; a < k; ++a) {
      raw.push_back(psd(d));
      total += raw.back();
    }
    const CMat inv_sqrt = spectral_apply(eigh(total), [](double x) { return 1.0 / std::sqrt(x); });
    for (auto& e : raw) e = hermitian_part(inv_sqrt * e * inv_sqrt);
    return POVM(d, std::move(raw));
  }

  Multimeter multimeter(std::size_t g, std::size_t k, std::size_t d) {
    std::vector<POVM> povms;
    for (std::size_t x = 0; x < g; ++x) povms.push_back(povm(d, k));
    return Multimeter(std::move(povms));
  }

  CPMap cp_map(std::size_t din, std::size_t dout, std::size_t kraus_rank = 0) {
    const std::size_t n = din * dout;
    return CPMap(din, dout, psd(n, kraus_rank));
  }

  // Branches jointly rescaled so they sum to a channel.
  Instrument instrument(std::size_t din, std::size_t dout, std::size_t outcomes, std::size_t kraus_rank = 0) {
    // The summed input marginal must be invertible.
    if (kraus_rank != 0 && kraus_rank * outcomes * dout < din)
      kraus_rank = (din + outcomes * dout - 1) / (outcomes * dout);
    std::vector<CMat> chois;
    CMat total(din * dout);
    for (std::size_t j = 0; j < outcomes; ++j) {
      chois.push_back(psd(din * dout, kraus_rank));
      total += chois.back();
    }
    const CMat traced = partial_trace(total, {dout, din}, {1});
    const CMat inv_sqrt = spectral_apply(eigh(hermitian_part(traced)), [](double x) { return 1.0 / std::sqrt(x); });
    const CMat side = kron(CMat::identity(dout), inv_sqrt);
    std::vector<CPMap> branches;
    for (auto& j : chois) branches.emplace_back(din, dout, hermitian_part(side * j * side));
    return Instrument(din, dout, std::move(branches));
  }

  CPMap channel(std::size_t din, std::size_t dout, std::size_t kraus_rank = 0) {
    return instrument(din, dout, 1, kraus_rank)[0];
  }

  std::vector<double> distribution(std::size_t n) {
    std::vector<double> p(n);
    double s = 0.0;
    for (auto& v : p) {
      v = -std::log(1.0 - uniform());
      s += v;
    }
    for (auto& v : p) v /= s;
    return p;
  }

  CondProb cond_prob(std::size_t outcomes, std::vector<std::size_t> given) {
    CondProb out(outcomes, std::move(given));
    for (std::size_t s = 0; s < out.slices(); ++s) {
      const auto p = distribution(outcomes);
      for (std::size_t b = 0; b < outcomes; ++b) out.values()[s * outcomes + b] = p[b];
    }
    return out;
  }

 private:
  std::mt19937_64 eng_;
};

}  // namespace mmsim
