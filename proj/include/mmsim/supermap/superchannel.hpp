#pragma once

#include <cstddef>
#include <sstream>
#include <string>
#include <vector>

#include "mmsim/densemat.hpp"
#include "mmsim/qcore/choi.hpp"
#include "mmsim/qcore/objects.hpp"

namespace mmsim {

// Shape of a multimeter slot: g settings, k outcomes, dimension d.
struct SlotDims {
  std::size_t g = 0;
  std::size_t k = 0;
  std::size_t d = 0;

  std::size_t size() const { return k * d * g; }
  friend bool operator==(const SlotDims&, const SlotDims&) = default;
};

inline SlotDims dims_of(const Multimeter& m) { return {m.g(), m.k(), m.d()}; }

inline std::string to_string(const SlotDims& s) {
  std::ostringstream os;
  os << "(g=" << s.g << ", k=" << s.k << ", d=" << s.d << ")";
  return os.str();
}

// Linear CP map on multimeter Choi matrices, M_{k d g} -> M_{l n r}. `certified`
// records that the map is known to send multimeters to multimeters, either
// because it was built from a realisation or because verification passed.
class Superchannel {
 public:
  Superchannel() = default;
  Superchannel(SlotDims in, SlotDims out, CPMap map, bool certified = false)
      : in_(in), out_(out), map_(std::move(map)), certified_(certified) {
    if (map_.din() != in_.size() || map_.dout() != out_.size())
      throw DimensionError("superchannel map dims do not match its slots");
  }

  const SlotDims& in() const { return in_; }
  const SlotDims& out() const { return out_; }
  const CPMap& map() const { return map_; }
  const CMat& choi() const { return map_.choi(); }
  bool certified() const { return certified_; }

  Superchannel as_certified() const { return Superchannel(in_, out_, map_, true); }

 private:
  SlotDims in_{};
  SlotDims out_{};
  CPMap map_;
  bool certified_ = false;
};

inline Multimeter apply(const Superchannel& psi, const Multimeter& m, const Tolerances& tol = {}) {
  if (dims_of(m) != psi.in())
    throw DimensionError("multimeter " + to_string(dims_of(m)) + " does not fit slot " + to_string(psi.in()));
  const CMat out = map_of_choi(psi.map(), multimeter_choi(m));
  return multimeter_of_choi(out, psi.out().k, psi.out().d, psi.out().g, tol);
}

// Hermitian operator basis of M_d with operator norm at most one: diagonal
// units, then symmetric and antisymmetric off-diagonal pairs.
inline std::vector<CMat> hermitian_basis(std::size_t d) {
  std::vector<CMat> out;
  for (std::size_t i = 0; i < d; ++i) out.push_back(CMat::unit(d, i, i));
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = i + 1; j < d; ++j) {
      CMat sym(d), asym(d);
      sym(i, j) = sym(j, i) = 1.0;
      asym(i, j) = Complex(0.0, 1.0);
      asym(j, i) = Complex(0.0, -1.0);
      out.push_back(std::move(sym));
      out.push_back(std::move(asym));
    }
  return out;
}

inline std::size_t affine_spanning_count(std::size_t g, std::size_t k, std::size_t d) {
  return 1 + g * (k - 1) * d * d;
}

// Multimeters whose affine hull contains every multimeter of the given shape:
// the uniform multimeter 1/k, plus for each setting x, outcome a < k-1 and
// basis element G the perturbation M_{a|x} += G/(2k), M_{k-1|x} -= G/(2k).
inline std::vector<Multimeter> affine_spanning_multimeters(std::size_t g, std::size_t k, std::size_t d,
                                                           const Tolerances& tol = {}) {
  if (g == 0 || k == 0 || d == 0) throw DimensionError("empty multimeter shape");
  const std::size_t count = affine_spanning_count(g, k, d);
  if (count > tol.cap) throw CapError("affine spanning set has " + std::to_string(count) + " elements");

  const double kd = static_cast<double>(k);
  const CMat base = CMat::identity(d) * (1.0 / kd);
  const POVM uniform(d, std::vector<CMat>(k, base));
  std::vector<Multimeter> out;
  out.emplace_back(std::vector<POVM>(g, uniform));

  const auto basis = hermitian_basis(d);
  const double eps = 1.0 / (2.0 * kd);
  for (std::size_t x = 0; x < g; ++x)
    for (std::size_t a = 0; a + 1 < k; ++a)
      for (const auto& gj : basis) {
        std::vector<CMat> effects(k, base);
        effects[a] += gj * eps;
        effects[k - 1] -= gj * eps;
        std::vector<POVM> povms(g, uniform);
        povms[x] = POVM(d, std::move(effects));
        out.emplace_back(std::move(povms));
      }
  return out;
}

struct VerificationReport {
  bool completely_positive = false;
  double min_eigenvalue = 0.0;
  std::size_t inputs_checked = 0;
  std::vector<std::string> failures;  // one line per spanning element that failed

  bool ok() const { return completely_positive && failures.empty(); }
};

// Positivity of the Choi matrix plus a decode of the image of every element
// of the affine spanning set.
inline VerificationReport verify_multimeter_superchannel(const Superchannel& psi, const Tolerances& tol = {}) {
  VerificationReport rep;
  const CMat& j = psi.choi();
  if (!is_hermitian(j, tol.herm)) {
    rep.failures.push_back("Choi matrix is not Hermitian");
    return rep;
  }
  rep.min_eigenvalue = min_eigenvalue(j, tol.herm);
  rep.completely_positive = rep.min_eigenvalue >= -tol.psd * std::max(1.0, j.frobenius_norm());

  const auto inputs = affine_spanning_multimeters(psi.in().g, psi.in().k, psi.in().d, tol);
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    try {
      (void)apply(psi, inputs[i], tol);
    } catch (const Error& e) {
      rep.failures.push_back("spanning element " + std::to_string(i) + ": " + e.what());
    }
    ++rep.inputs_checked;
  }
  return rep;
}

inline Superchannel certify(const Superchannel& psi, const Tolerances& tol = {}) {
  if (psi.certified()) return psi;
  const auto rep = verify_multimeter_superchannel(psi, tol);
  if (!rep.ok()) {
    std::string why = rep.completely_positive ? "" : "Choi matrix is not PSD (min eigenvalue " +
                                                          std::to_string(rep.min_eigenvalue) + ")";
    if (!rep.failures.empty()) why += (why.empty() ? "" : "; ") + rep.failures.front();
    throw NotSuperchannelError("not a multimeter superchannel: " + why);
  }
  return psi.as_certified();
}

// Largest distance between the images of the affine spanning set under two
// superchannels of the same shape. Zero iff they act identically on
// multimeters.
inline double action_distance(const Superchannel& a, const Superchannel& b, const Tolerances& tol = {}) {
  if (a.in() != b.in() || a.out() != b.out()) throw DimensionError("superchannels differ in shape");
  double worst = 0.0;
  for (const auto& m : affine_spanning_multimeters(a.in().g, a.in().k, a.in().d, tol)) {
    const CMat ja = map_of_choi(a.map(), multimeter_choi(m));
    const CMat jb = map_of_choi(b.map(), multimeter_choi(m));
    worst = std::max(worst, distance(ja, jb));
  }
  return worst;
}

// Choi matrix of psi composed with the orthogonal projection onto the linear
// span of multimeter Choi matrices. Two superchannels that act identically on
// every multimeter have the same action Choi, whatever they do off that span.
inline CMat action_choi(const Superchannel& psi, const Tolerances& tol = {}) {
  const auto spanning = affine_spanning_multimeters(psi.in().g, psi.in().k, psi.in().d, tol);
  std::vector<CMat> basis;
  for (const auto& m : spanning) {
    CMat v = multimeter_choi(m);
    for (const auto& b : basis) v.add_scaled(b, -hs_inner(b, v));
    for (const auto& b : basis) v.add_scaled(b, -hs_inner(b, v));
    const double nrm = v.frobenius_norm();
    if (nrm > 1e-10) basis.push_back(v * (1.0 / nrm));
  }
  const std::size_t din = psi.in().size(), dout = psi.out().size();
  CMat j(din * dout);
  for (const auto& b : basis) {
    const CMat img = map_of_choi(psi.map(), b);
    for (std::size_t u = 0; u < din; ++u)
      for (std::size_t v = 0; v < din; ++v) {
        const Complex w = std::conj(b(u, v));
        if (w == Complex(0.0)) continue;
        for (std::size_t p = 0; p < dout; ++p)
          for (std::size_t q = 0; q < dout; ++q) j(p * din + u, q * din + v) += w * img(p, q);
      }
  }
  j.set_factor_dims({dout, din});
  return j;
}

}  // namespace mmsim
