#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <initializer_list>
#include <numeric>
#include <string>
#include <vector>

#include "mmsim/errors.hpp"
#include "mmsim/tolerance.hpp"

namespace mmsim {

// Conditional distribution p(outcome | c_1, ..., c_m) over finite alphabets.
// Storage is row-major over the conditioning indices with the outcome index
// innermost, so every conditioning slice is contiguous.
class CondProb {
 public:
  CondProb() = default;
  CondProb(std::size_t outcomes, std::vector<std::size_t> given)
      : outcomes_(outcomes), given_(std::move(given)) {
    if (outcomes_ == 0) throw DimensionError("CondProb: zero outcomes");
    for (auto g : given_)
      if (g == 0) throw DimensionError("CondProb: empty conditioning alphabet");
    p_.assign(slices() * outcomes_, 0.0);
  }

  static CondProb uniform(std::size_t outcomes, std::vector<std::size_t> given) {
    CondProb out(outcomes, std::move(given));
    for (auto& v : out.p_) v = 1.0 / static_cast<double>(outcomes);
    return out;
  }

  // p(b | c) = 1 if b == choose(c) else 0.
  static CondProb deterministic(std::size_t outcomes, std::vector<std::size_t> given,
                                const std::function<std::size_t(const std::vector<std::size_t>&)>& choose) {
    CondProb out(outcomes, std::move(given));
    for (std::size_t s = 0; s < out.slices(); ++s) {
      const std::size_t b = choose(out.unflatten(s));
      if (b >= outcomes) throw DimensionError("CondProb::deterministic: outcome out of range");
      out.p_[s * outcomes + b] = 1.0;
    }
    return out;
  }

  std::size_t outcomes() const { return outcomes_; }
  const std::vector<std::size_t>& given() const { return given_; }
  std::size_t slices() const {
    return std::accumulate(given_.begin(), given_.end(), std::size_t{1}, std::multiplies<>());
  }

  std::size_t flatten(const std::vector<std::size_t>& cond) const {
    if (cond.size() != given_.size()) throw DimensionError("CondProb: wrong number of conditions");
    std::size_t idx = 0;
    for (std::size_t i = 0; i < cond.size(); ++i) {
      if (cond[i] >= given_[i]) throw DimensionError("CondProb: condition out of range");
      idx = idx * given_[i] + cond[i];
    }
    return idx;
  }

  std::vector<std::size_t> unflatten(std::size_t slice) const {
    std::vector<std::size_t> cond(given_.size());
    for (std::size_t i = given_.size(); i-- > 0;) {
      cond[i] = slice % given_[i];
      slice /= given_[i];
    }
    return cond;
  }

  double& operator()(std::size_t outcome, std::initializer_list<std::size_t> cond) {
    return p_[index(outcome, cond)];
  }
  double operator()(std::size_t outcome, std::initializer_list<std::size_t> cond) const {
    return p_[index(outcome, cond)];
  }
  double& at(std::size_t outcome, const std::vector<std::size_t>& cond) {
    return p_[flatten(cond) * outcomes_ + check_outcome(outcome)];
  }
  double at(std::size_t outcome, const std::vector<std::size_t>& cond) const {
    return p_[flatten(cond) * outcomes_ + check_outcome(outcome)];
  }

  std::vector<double>& values() { return p_; }
  const std::vector<double>& values() const { return p_; }

 private:
  std::size_t check_outcome(std::size_t outcome) const {
    if (outcome >= outcomes_) throw DimensionError("CondProb: outcome out of range");
    return outcome;
  }
  std::size_t index(std::size_t outcome, std::initializer_list<std::size_t> cond) const {
    return flatten(std::vector<std::size_t>(cond)) * outcomes_ + check_outcome(outcome);
  }

  std::size_t outcomes_ = 0;
  std::vector<std::size_t> given_;
  std::vector<double> p_;
};

// Every slice must be a probability vector.
inline void validate(const CondProb& p, const Tolerances& tol = {}) {
  const auto& v = p.values();
  for (std::size_t s = 0; s < p.slices(); ++s) {
    double sum = 0.0;
    for (std::size_t b = 0; b < p.outcomes(); ++b) {
      const double x = v[s * p.outcomes() + b];
      if (!std::isfinite(x) || x < -tol.eq)
        throw NormalizationError("conditional probability has a negative entry");
      sum += x;
    }
    if (std::abs(sum - 1.0) > tol.eq)
      throw NormalizationError("conditional probability slice " + std::to_string(s) +
                               " sums to " + std::to_string(sum));
  }
}

}  // namespace mmsim
