#pragma once

#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "mmsim/densemat.hpp"
#include "mmsim/errors.hpp"
#include "mmsim/feasibility/lp.hpp"
#include "mmsim/qcore/objects.hpp"

namespace mmsim {

// Joint outcome lambda = sum_x lambda_x k^x; returns lambda_x.
inline std::size_t joint_label_digit(std::size_t lambda, std::size_t x, std::size_t k) {
  for (std::size_t i = 0; i < x; ++i) lambda /= k;
  return lambda % k;
}

inline std::size_t joint_outcome_count(std::size_t g, std::size_t k, std::size_t cap) {
  const double count = std::pow(static_cast<double>(k), static_cast<double>(g));
  if (count > static_cast<double>(cap)) throw CapError("k^g = " + std::to_string(count) + " joint outcomes exceeds the cap");
  return static_cast<std::size_t>(count);
}

// Marginals sum_{lambda: lambda_x = a} G_lambda as a g-setting multimeter.
inline Multimeter joint_marginals(const std::vector<CMat>& joint, std::size_t g, std::size_t k) {
  const std::size_t d = joint.at(0).rows();
  std::vector<POVM> povms;
  for (std::size_t x = 0; x < g; ++x) {
    std::vector<CMat> effects(k, CMat(d));
    for (std::size_t lam = 0; lam < joint.size(); ++lam) effects[joint_label_digit(lam, x, k)] += joint[lam];
    povms.emplace_back(d, std::move(effects));
  }
  return Multimeter(std::move(povms));
}

struct JointMeasurementCert {
  FeasibilityCert cert;  // residual: worst Frobenius gap of a marginal
  std::optional<POVM> joint;  // k^g outcomes, labelled as in joint_label_digit
};

// Dykstra's alternating projections between the product of PSD cones and the
// affine set of families with the prescribed marginals. Only feasibility is
// certified; a run that stalls above tolerance is reported as undecided.
inline JointMeasurementCert joint_measurement_feasibility(const Multimeter& e, const Tolerances& tol = {}) {
  const std::size_t g = e.g(), k = e.k(), d = e.d();
  const std::size_t count = joint_outcome_count(g, k, tol.cap);
  const std::size_t rows = g * k;

  // Gram matrix of the marginal operator, shared by every matrix entry
  CMat gram(rows);
  for (std::size_t lam = 0; lam < count; ++lam)
    for (std::size_t x = 0; x < g; ++x)
      for (std::size_t x2 = 0; x2 < g; ++x2)
        gram(x * k + joint_label_digit(lam, x, k), x2 * k + joint_label_digit(lam, x2, k)) += 1.0;
  const CMat gram_pinv = psd_pinv(gram, 1e-12);

  auto marginal_gaps = [&](const std::vector<CMat>& fam) {
    std::vector<CMat> gaps;
    const Multimeter marg = joint_marginals(fam, g, k);
    for (std::size_t x = 0; x < g; ++x)
      for (std::size_t a = 0; a < k; ++a) gaps.push_back(marg.effect(a, x) - e.effect(a, x));
    return gaps;
  };
  auto project_affine = [&](std::vector<CMat> fam) {
    const auto gaps = marginal_gaps(fam);
    std::vector<CMat> coeff(rows, CMat(d));
    for (std::size_t i = 0; i < rows; ++i)
      for (std::size_t j = 0; j < rows; ++j)
        if (gram_pinv(i, j) != Complex(0.0)) coeff[i].add_scaled(gaps[j], gram_pinv(i, j).real());
    for (std::size_t lam = 0; lam < count; ++lam)
      for (std::size_t x = 0; x < g; ++x) fam[lam] -= coeff[x * k + joint_label_digit(lam, x, k)];
    return fam;
  };
  auto worst_gap = [&](const std::vector<CMat>& fam) {
    double worst = 0.0;
    for (const auto& gap : marginal_gaps(fam)) worst = std::max(worst, gap.frobenius_norm());
    return worst;
  };

  std::vector<CMat> point(count, CMat(d)), affine_corr(count, CMat(d)), cone_corr(count, CMat(d));
  JointMeasurementCert out;
  out.cert.status = FeasibilityStatus::undecided;
  for (std::size_t it = 1; it <= tol.compat_max_iter; ++it) {
    std::vector<CMat> shifted(count);
    for (std::size_t lam = 0; lam < count; ++lam) shifted[lam] = point[lam] + affine_corr[lam];
    const auto on_affine = project_affine(shifted);
    for (std::size_t lam = 0; lam < count; ++lam) {
      affine_corr[lam] = shifted[lam] - on_affine[lam];
      const CMat pre = on_affine[lam] + cone_corr[lam];
      point[lam] = project_psd(hermitian_part(pre));
      cone_corr[lam] = pre - point[lam];
    }
    out.cert.iterations = it;
    out.cert.residual = worst_gap(point);
    if (out.cert.residual < tol.compat) {
      out.cert.status = FeasibilityStatus::feasible;
      break;
    }
  }
  if (out.cert.feasible()) out.joint = POVM(d, point);
  return out;
}

}  // namespace mmsim
