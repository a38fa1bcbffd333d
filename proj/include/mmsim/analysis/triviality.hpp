#pragma once

#include <cmath>
#include <cstddef>
#include <iterator>
#include <optional>
#include <string>
#include <vector>

#include "mmsim/densemat.hpp"
#include "mmsim/qcore/choi.hpp"
#include "mmsim/supermap/realization.hpp"
#include "mmsim/supermap/superchannel.hpp"

namespace mmsim {

inline bool is_trivial_effect(const CMat& e, const Tolerances& tol = {}) {
  const double scale = e.trace().real() / static_cast<double>(e.rows());
  return within(distance(e, CMat::identity(e.rows()) * scale), e.frobenius_norm(), tol.eq);
}

// Every effect is a multiple of the identity.
inline bool is_trivial_multimeter(const Multimeter& m, const Tolerances& tol = {}) {
  for (const auto& povm : m.povms())
    for (const auto& e : povm.effects())
      if (!is_trivial_effect(e, tol)) return false;
  return true;
}

// Deterministic trivial multimeter M_{a|x} = [a == alpha_x] 1.
inline Multimeter trivial_vertex(const std::vector<std::size_t>& alpha, std::size_t k, std::size_t d) {
  std::vector<POVM> povms;
  for (auto ax : alpha) {
    if (ax >= k) throw DimensionError("vertex label out of range");
    std::vector<CMat> effects(k, CMat(d));
    effects[ax] = CMat::identity(d);
    povms.emplace_back(d, std::move(effects));
  }
  return Multimeter(std::move(povms));
}

// Range over the k^g labels alpha in [k]^g, first setting varying slowest.
class TrivialVertices {
 public:
  class iterator {
   public:
    using iterator_category = std::input_iterator_tag;
    using value_type = std::vector<std::size_t>;
    using difference_type = std::ptrdiff_t;
    using pointer = const value_type*;
    using reference = const value_type&;

    iterator() = default;
    iterator(std::size_t g, std::size_t k, bool done) : alpha_(g, 0), k_(k), done_(done) {}

    reference operator*() const { return alpha_; }
    pointer operator->() const { return &alpha_; }
    iterator& operator++() {
      std::size_t i = alpha_.size();
      while (i-- > 0) {
        if (++alpha_[i] < k_) return *this;
        alpha_[i] = 0;
      }
      done_ = true;
      return *this;
    }
    iterator operator++(int) {
      iterator old = *this;
      ++*this;
      return old;
    }
    friend bool operator==(const iterator& a, const iterator& b) {
      if (a.done_ || b.done_) return a.done_ == b.done_;
      return a.alpha_ == b.alpha_;
    }

   private:
    std::vector<std::size_t> alpha_;
    std::size_t k_ = 0;
    bool done_ = true;
  };

  TrivialVertices(std::size_t g, std::size_t k, std::size_t cap = Tolerances{}.cap) : g_(g), k_(k) {
    if (g == 0 || k == 0) throw DimensionError("empty multimeter shape");
    double count = std::pow(static_cast<double>(k), static_cast<double>(g));
    if (count > static_cast<double>(cap))
      throw CapError("k^g = " + std::to_string(count) + " vertices exceeds the cap");
  }

  iterator begin() const { return iterator(g_, k_, false); }
  iterator end() const { return iterator(g_, k_, true); }

 private:
  std::size_t g_, k_;
};

inline TrivialVertices extremal_trivial_multimeters(std::size_t g, std::size_t k, std::size_t cap = Tolerances{}.cap) {
  return TrivialVertices(g, k, cap);
}

struct TPResult {
  bool holds = false;
  std::optional<std::vector<std::size_t>> witness_vertex;
  std::optional<Multimeter> witness_output;
};

// Exact by convexity: trivial multimeters are the convex hull of the k^g
// deterministic vertices and triviality is a linear condition.
inline TPResult is_triviality_preserving(const Superchannel& psi, const Tolerances& tol = {}) {
  TPResult res;
  for (const auto& alpha : extremal_trivial_multimeters(psi.in().g, psi.in().k, tol.cap)) {
    Multimeter img = apply(psi, trivial_vertex(alpha, psi.in().k, psi.in().d), tol);
    if (!is_trivial_multimeter(img, tol)) {
      res.witness_vertex = alpha;
      res.witness_output = std::move(img);
      return res;
    }
  }
  res.holds = true;
  return res;
}

namespace detail {

// x is in the "equal" class for y when nu(.|a,x,y,0) does not depend on a.
inline bool nu_independent_of_a(const ClassicalRealization& r, std::size_t x, std::size_t y, std::size_t anc,
                                double tol) {
  for (std::size_t b = 0; b < r.out.k; ++b) {
    const double ref = r.nu(b, {0, x, y, anc});
    for (std::size_t a = 1; a < r.in.k; ++a)
      if (std::abs(r.nu(b, {a, x, y, anc}) - ref) > tol) return false;
  }
  return true;
}

inline bool proportional_to_identity(const CMat& m, const Tolerances& tol) { return is_trivial_effect(m, tol); }

// Lambda~(D) = Tr[D]/n Lambda(1_n); Choi Lambda(1_n)/n (x) 1_n.
inline CPMap trace_averaged(const CPMap& m) {
  const std::size_t n = m.din();
  const CMat img = map_of_choi(m, CMat::identity(n)) * (1.0 / static_cast<double>(n));
  return CPMap(n, m.dout(), kron(img, CMat::identity(n)));
}

inline void require_single_ancilla(const ClassicalRealization& r) {
  if (r.s != 1) throw DimensionError("structural triviality check needs a realisation with s = 1");
}

}  // namespace detail

// Replaces Lambda*_{x|y} by its trace average Z -> Tr[Lambda*_{x|y}(Z)]/n 1 for
// every x whose postprocessing ignores a. Throws InternalError if that changes
// the induced superchannel, which can only happen when psi is not
// triviality-preserving.
inline ClassicalRealization canonical_tp_realization(const ClassicalRealization& r, const Tolerances& tol = {}) {
  detail::require_single_ancilla(r);
  validate(r, tol);
  ClassicalRealization out = r;
  for (std::size_t y = 0; y < r.out.g; ++y) {
    std::vector<CPMap> branches = r.lambda[y].branches();
    for (std::size_t x = 0; x < r.in.g; ++x)
      if (detail::nu_independent_of_a(r, x, y, 0, tol.eq)) branches[x] = detail::trace_averaged(branches[x]);
    out.lambda[y] = Instrument(r.out.d, r.in.d, std::move(branches));
  }
  double worst = 0.0;
  for (const auto& m : affine_spanning_multimeters(r.in.g, r.in.k, r.in.d, tol))
    worst = std::max(worst, multimeter_distance(realization_output(out, m), realization_output(r, m)));
  if (!within(worst, 1.0, tol.eq * static_cast<double>(r.in.size())))
    throw InternalError("canonical realisation changes the induced superchannel by " + std::to_string(worst));
  return out;
}

struct StructuralTPResult {
  bool holds = false;
  std::string reason;
  CondProb pi;                             // pi(x|y); set when holds
  std::vector<std::vector<CPMap>> channels;  // channels[y][x], M_n -> M_d; set when holds
};

// For s = 1: psi is triviality-preserving iff (after canonicalisation)
// Lambda*_{x|y}(1) is proportional to 1 for every x, y. Then
// Lambda_{x|y} = pi(x|y) Phi_{x,y} with channels Phi and psi is a classical
// simulation in disguise.
inline StructuralTPResult is_triviality_preserving_structural(const ClassicalRealization& r,
                                                              const Tolerances& tol = {}) {
  detail::require_single_ancilla(r);
  validate(r, tol);
  StructuralTPResult res;
  const std::size_t n = r.out.d, d = r.in.d;
  const CMat id_d = CMat::identity(d);

  for (std::size_t y = 0; y < r.out.g; ++y) {
    std::vector<CMat> pooled(r.out.k, CMat(n));
    for (std::size_t x = 0; x < r.in.g; ++x) {
      const CMat unit_img = dual_apply(r.lambda[y][x], id_d);
      if (detail::nu_independent_of_a(r, x, y, 0, tol.eq)) {
        for (std::size_t b = 0; b < r.out.k; ++b) pooled[b].add_scaled(unit_img, r.nu(b, {0, x, y, 0}));
      } else if (!detail::proportional_to_identity(unit_img, tol)) {
        res.reason = "Lambda*(1) not proportional to 1 for x=" + std::to_string(x) + ", y=" + std::to_string(y) +
                     " while nu depends on a";
        return res;
      }
    }
    for (std::size_t b = 0; b < r.out.k; ++b)
      if (!detail::proportional_to_identity(pooled[b], tol)) {
        res.reason = "a-independent settings pool to a non-trivial effect for b=" + std::to_string(b) +
                     ", y=" + std::to_string(y);
        return res;
      }
  }

  const ClassicalRealization canon = canonical_tp_realization(r, tol);
  res.pi = CondProb(r.in.g, {r.out.g});
  res.channels.resize(r.out.g);
  const CPMap depolarizing(n, d, kron(CMat::identity(d) * (1.0 / static_cast<double>(d)), CMat::identity(n)));
  for (std::size_t y = 0; y < r.out.g; ++y) {
    double total = 0.0;
    std::vector<double> weights;
    for (std::size_t x = 0; x < r.in.g; ++x) {
      const CMat unit_img = dual_apply(canon.lambda[y][x], id_d);
      if (!detail::proportional_to_identity(unit_img, tol))
        throw InternalError("canonical realisation is not proportional on the identity");
      weights.push_back(std::max(0.0, unit_img.trace().real() / static_cast<double>(n)));
      total += weights.back();
    }
    for (std::size_t x = 0; x < r.in.g; ++x) {
      res.pi(x, {y}) = weights[x] / total;
      if (weights[x] > tol.eq)
        res.channels[y].push_back(scaled(canon.lambda[y][x], 1.0 / weights[x]));
      else
        res.channels[y].push_back(depolarizing);
    }
  }
  res.holds = true;
  return res;
}

// A compression map is triviality-preserving iff every branch of its
// compressing instrument is a scaled channel, i.e. Phi*_c(1) is a multiple of 1.
inline bool compression_instrument_factorizes(const Instrument& phi, const Tolerances& tol = {}) {
  const CMat unit = CMat::identity(phi.dout());
  for (const auto& branch : phi.branches())
    if (!is_trivial_effect(dual_apply(branch, unit), tol)) return false;
  return true;
}

}  // namespace mmsim
