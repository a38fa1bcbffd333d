#pragma once

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "mmsim/densemat.hpp"
#include "mmsim/errors.hpp"
#include "mmsim/tolerance.hpp"

namespace mmsim {

// Constructors only check shapes. Numerical invariants (positivity,
// normalisation) are checked by the validate() overloads so callers can pick
// their tolerances.

class POVM {
 public:
  POVM() = default;
  POVM(std::size_t d, std::vector<CMat> effects) : d_(d), effects_(std::move(effects)) {
    if (effects_.empty()) throw DimensionError("POVM needs at least one outcome");
    for (const auto& e : effects_)
      if (e.rows() != d_ || e.cols() != d_) throw DimensionError("POVM effect has the wrong size");
  }

  std::size_t d() const { return d_; }
  std::size_t k() const { return effects_.size(); }
  const CMat& operator[](std::size_t a) const { return effects_.at(a); }
  const std::vector<CMat>& effects() const { return effects_; }

 private:
  std::size_t d_ = 0;
  std::vector<CMat> effects_;
};

// g POVMs on C^d, each with k outcomes. Indexed effect(a, x).
class Multimeter {
 public:
  Multimeter() = default;
  explicit Multimeter(std::vector<POVM> povms) : povms_(std::move(povms)) {
    if (povms_.empty()) throw DimensionError("multimeter needs at least one setting");
    for (const auto& p : povms_)
      if (p.d() != povms_[0].d() || p.k() != povms_[0].k())
        throw DimensionError("multimeter settings disagree on d or k");
  }

  std::size_t d() const { return povms_.empty() ? 0 : povms_[0].d(); }
  std::size_t k() const { return povms_.empty() ? 0 : povms_[0].k(); }
  std::size_t g() const { return povms_.size(); }
  const POVM& operator[](std::size_t x) const { return povms_.at(x); }
  const CMat& effect(std::size_t a, std::size_t x) const { return povms_.at(x)[a]; }
  const std::vector<POVM>& povms() const { return povms_; }

 private:
  std::vector<POVM> povms_;
};

// Completely positive map M_din -> M_dout stored by its Choi matrix
// J = sum_ij Phi(|i><j|) (x) |i><j|, output factor first.
class CPMap {
 public:
  CPMap() = default;
  CPMap(std::size_t din, std::size_t dout, CMat choi) : din_(din), dout_(dout), choi_(std::move(choi)) {
    if (choi_.rows() != din * dout || choi_.cols() != din * dout)
      throw DimensionError("Choi matrix size does not match din * dout");
    choi_.set_factor_dims({dout, din});
  }

  std::size_t din() const { return din_; }
  std::size_t dout() const { return dout_; }
  const CMat& choi() const { return choi_; }

 private:
  std::size_t din_ = 0;
  std::size_t dout_ = 0;
  CMat choi_;
};

class Instrument {
 public:
  Instrument() = default;
  Instrument(std::size_t din, std::size_t dout, std::vector<CPMap> branches)
      : din_(din), dout_(dout), branches_(std::move(branches)) {
    if (branches_.empty()) throw DimensionError("instrument needs at least one branch");
    for (const auto& b : branches_)
      if (b.din() != din_ || b.dout() != dout_) throw DimensionError("instrument branch has wrong dims");
  }

  std::size_t din() const { return din_; }
  std::size_t dout() const { return dout_; }
  std::size_t outcomes() const { return branches_.size(); }
  const CPMap& operator[](std::size_t j) const { return branches_.at(j); }
  const std::vector<CPMap>& branches() const { return branches_; }

 private:
  std::size_t din_ = 0;
  std::size_t dout_ = 0;
  std::vector<CPMap> branches_;
};

// Phi*(A) = V^dagger (A (x) 1_s) V with V : C^din -> C^dout (x) C^s, stored as a
// (dout*s) x din matrix. `support` is the number of leading ancilla levels
// that carry weight; the rest is padding.
struct StinespringDilation {
  std::size_t din = 0;
  std::size_t dout = 0;
  std::size_t s = 0;
  std::size_t support = 0;
  CMat v;
};

// ---- validation -----------------------------------------------------------

inline void validate_effect_positivity(const CMat& e, const Tolerances& tol, const std::string& what) {
  if (!is_hermitian(e, tol.herm)) throw HermiticityError(what + " is not Hermitian");
  if (min_eigenvalue(e, tol.herm) < -tol.psd * std::max(1.0, e.frobenius_norm()))
    throw NotPSDError(what + " is not positive semidefinite");
}

inline void validate(const POVM& p, const Tolerances& tol = {}) {
  CMat sum(p.d());
  for (const auto& e : p.effects()) sum += e;
  if (!approx_equal(sum, CMat::identity(p.d()), tol.eq))
    throw NormalizationError("POVM effects do not sum to the identity");
  for (std::size_t a = 0; a < p.k(); ++a)
    validate_effect_positivity(p[a], tol, "POVM effect " + std::to_string(a));
}

inline void validate(const Multimeter& m, const Tolerances& tol = {}) {
  for (const auto& p : m.povms()) validate(p, tol);
}

inline bool is_cp(const CPMap& m, const Tolerances& tol = {}) { return is_psd(m.choi(), tol); }

inline CMat output_traced(const CPMap& m) {
  return partial_trace(m.choi(), {m.dout(), m.din()}, {1});
}

inline bool is_trace_preserving(const CPMap& m, const Tolerances& tol = {}) {
  return approx_equal(output_traced(m), CMat::identity(m.din()), tol.eq);
}

// Tr_out J <= 1
inline bool is_trace_nonincreasing(const CPMap& m, const Tolerances& tol = {}) {
  const CMat gap = CMat::identity(m.din()) - output_traced(m);
  return min_eigenvalue(gap, tol.herm) >= -tol.psd * std::max(1.0, gap.frobenius_norm());
}

inline void validate(const CPMap& m, const Tolerances& tol = {}) {
  if (!is_hermitian(m.choi(), tol.herm)) throw HermiticityError("Choi matrix is not Hermitian");
  if (!is_cp(m, tol)) throw NotPSDError("Choi matrix is not positive semidefinite");
}

inline void validate(const Instrument& inst, const Tolerances& tol = {}) {
  CMat total(inst.din() * inst.dout());
  for (const auto& b : inst.branches()) {
    validate(b, tol);
    total += b.choi();
  }
  const CPMap sum(inst.din(), inst.dout(), total);
  if (!is_trace_preserving(sum, tol))
    throw NormalizationError("instrument branches do not sum to a channel");
}

inline void validate_state(const CMat& rho, const Tolerances& tol = {}) {
  if (!rho.is_square()) throw StateError("state is not square");
  if (!is_hermitian(rho, tol.herm)) throw StateError("state is not Hermitian");
  if (std::abs(rho.trace() - Complex(1.0)) > tol.eq) throw StateError("state does not have unit trace");
  if (min_eigenvalue(rho, tol.herm) < -tol.psd) throw StateError("state is not positive semidefinite");
}

}  // namespace mmsim
