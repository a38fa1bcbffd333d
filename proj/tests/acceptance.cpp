// Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any fails.
#include <chrono>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "fixtures.hpp"
#include "mmsim/analysis/classify.hpp"
#include "mmsim/catalog.hpp"
#include "mmsim/examples.hpp"
#include "mmsim/feasibility/joint.hpp"
#include "mmsim/feasibility/simulability.hpp"
#include "mmsim/qcore/dilation.hpp"
#include "mmsim/supermap/constructors.hpp"
#include "mmsim/supermap/realize.hpp"

using namespace mmsim;

namespace {

// Pinned thresholds, one per criterion.
constexpr double kChoiRoundTrip = 1e-10;
constexpr double kDilation = 1e-7;
constexpr double kRealize = 1e-8;
constexpr double kSimulationExact = 1e-9;
constexpr double kCompatFeasible = 1e-7;
constexpr std::size_t kCompatIterations = 20000;
constexpr double kCompatInfeasible = 1e-4;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string sci(double v) { return examples::fmt(v); }

// 1. Choi matrix -> map -> Choi matrix
Outcome choi_round_trip() {
  RandomSource rng(1001);
  double worst = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t din = rng.between(1, 4), dout = rng.between(1, 4);
    const CPMap m = rng.cp_map(din, dout, rng.between(1, din * dout));
    const CMat back = choi_of_map([&](const CMat& x) { return map_of_choi(m, x); }, din, dout);
    worst = std::max(worst, distance(back, m.choi()));
  }
  return {worst < kChoiRoundTrip, "50 maps, worst Frobenius gap " + sci(worst) + " (< " + sci(kChoiRoundTrip) + ")"};
}

// 2. branch duals rebuilt from a dilation of the sum and the derivative POVM
Outcome dilation_and_derivatives() {
  RandomSource rng(1002);
  double worst = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t din = rng.between(1, 4), dout = rng.between(1, 4), outcomes = rng.between(1, 4);
    const Instrument inst = rng.instrument(din, dout, outcomes, rng.between(1, 2));
    const auto dil = stinespring(channel_of(inst));
    const POVM derivative = radon_nikodym(inst.branches(), dil);
    for (std::size_t b = 0; b < outcomes; ++b)
      for (std::size_t i = 0; i < dout; ++i)
        for (std::size_t j = 0; j < dout; ++j) {
          const CMat unit = CMat::unit(dout, i, j);
          worst = std::max(worst, distance(dilation_compress(dil, unit, derivative[b]), dual_apply(inst[b], unit)));
        }
  }
  return {worst < kDilation, "50 instruments, worst gap on matrix units " + sci(worst) + " (< " + sci(kDilation) + ")"};
}

double spanning_gap(const Superchannel& a, const Superchannel& b) {
  double worst = 0.0;
  for (const auto& m : affine_spanning_multimeters(a.in().g, a.in().k, a.in().d))
    worst = std::max(worst, multimeter_distance(apply(a, m), apply(b, m)));
  return worst;
}

// 3. realize -> from_general_realization
Outcome realization_round_trip() {
  RandomSource rng(1003);
  double worst = 0.0;
  const Tolerances loose{.eq = 1e-7};
  for (int trial = 0; trial < 20; ++trial) {
    const SlotDims in{rng.between(1, 2), 2, 2}, out{rng.between(1, 2), rng.between(2, 3), 2};
    const std::size_t s = rng.between(1, 2);
    const Superchannel built = trial % 2 ? from_general_realization(fixtures::random_general_realization(rng, in, out, s))
                                         : from_classical_realization(fixtures::random_classical_realization(rng, in, out, s));
    // drop the construction so realize starts from the Choi matrix alone
    const Superchannel psi(in, out, built.map());
    const auto rebuilt = from_general_realization(realize(psi), loose);
    worst = std::max(worst, spanning_gap(rebuilt, psi));
  }
  return {worst < kRealize, "20 superchannels, worst gap on the spanning set " + sci(worst) + " (< " + sci(kRealize) + ")"};
}

SlotDims random_shape(RandomSource& rng) { return {rng.between(1, 3), rng.between(2, 3), rng.between(2, 3)}; }

// 4. structural triviality check against the vertex enumeration
Outcome tp_agreement() {
  RandomSource rng(1004);
  int disagreements = 0, holds = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const SlotDims in = random_shape(rng), out{rng.between(1, 2), rng.between(2, 3), rng.between(2, 3)};
    const auto r = fixtures::tp_mode_realization(rng, trial % fixtures::kTpModes, in, out);
    const bool brute = is_triviality_preserving(from_classical_realization(r)).holds;
    disagreements += brute != is_triviality_preserving_structural(r).holds;
    holds += brute;
  }
  return {disagreements == 0,
          "100 realizations (" + std::to_string(holds) + " tp), " + std::to_string(disagreements) + " disagreements"};
}

// 5. structural trash-and-prepare check against the spanning-set test
Outcome tap_agreement() {
  RandomSource rng(1005);
  int disagreements = 0, holds = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const SlotDims in = random_shape(rng), out{rng.between(1, 2), rng.between(2, 3), 2};
    const auto r = fixtures::tap_mode_realization(rng, trial % fixtures::kTapModes, in, out, rng.between(1, 3));
    const bool brute = is_trash_and_prepare(from_classical_realization(r)).holds;
    disagreements += brute != is_trash_and_prepare_structural(r).holds;
    holds += brute;
  }
  return {disagreements == 0,
          "100 realizations (" + std::to_string(holds) + " tap), " + std::to_string(disagreements) + " disagreements"};
}

bool independent_of_outcome(const CondProb& nu) {
  const auto& g = nu.given();
  for (std::size_t x = 0; x < g[1]; ++x)
    for (std::size_t y = 0; y < g[2]; ++y)
      for (std::size_t a = 1; a < g[0]; ++a)
        for (std::size_t b = 0; b < nu.outcomes(); ++b)
          if (std::abs(nu(b, {a, x, y}) - nu(b, {0, x, y})) > Tolerances{}.eq) return false;
  return true;
}

// 6. consequences for classical simulations and compressions
Outcome family_properties() {
  RandomSource rng(1006);
  int cs_tp = 0, c_tap = 0, c_factor = 0, cs_tap = 0;
  for (int trial = 0; trial < 50; ++trial) {
    const SlotDims in = random_shape(rng);
    const std::size_t r = rng.between(1, 2), l = rng.between(2, 3);
    const auto pi = rng.cond_prob(in.g, {r});
    CondProb nu = rng.cond_prob(l, {in.k, in.g, r});
    if (trial % 2 == 0)
      for (std::size_t a = 1; a < in.k; ++a)
        for (std::size_t x = 0; x < in.g; ++x)
          for (std::size_t y = 0; y < r; ++y)
            for (std::size_t b = 0; b < l; ++b) nu(b, {a, x, y}) = nu(b, {0, x, y});
    const auto cs = classical_simulation_map(pi, nu, in.d);
    cs_tp += is_triviality_preserving(cs).holds;
    cs_tap += is_trash_and_prepare(cs).holds == independent_of_outcome(nu);

    const std::size_t n = rng.between(1, 3), d = rng.between(2, 3), branches = rng.between(1, 3);
    Instrument phi = rng.instrument(n, d, branches);
    if (trial % 2 == 0) {
      const CPMap shared = rng.channel(n, d);
      std::vector<CPMap> parts;
      for (double w : rng.distribution(branches)) parts.push_back(scaled(shared, w));
      phi = Instrument(n, d, std::move(parts));
    }
    const std::size_t k = rng.between(2, 3);
    const auto comp = compression_map(phi, 1, k);
    c_tap += !is_trash_and_prepare(comp).holds;
    c_factor += compression_instrument_factorizes(phi) == is_triviality_preserving(comp).holds;
  }
  const bool pass = cs_tp == 50 && c_tap == 50 && c_factor == 50 && cs_tap == 50;
  return {pass, "cs->tp " + std::to_string(cs_tp) + "/50, c->not tap " + std::to_string(c_tap) +
                    "/50, c factorization " + std::to_string(c_factor) + "/50, cs tap iff a-independent " +
                    std::to_string(cs_tap) + "/50"};
}

// 7. worked instances
Outcome example_suite() {
  int passed = 0;
  std::string failed;
  for (const auto& [name, run] : examples::registry()) {
    const auto rep = run(examples::Options{});
    if (rep.all_pass())
      ++passed;
    else
      failed += " " + name;
  }
  const auto total = examples::registry().size();
  return {passed == static_cast<int>(total),
          std::to_string(passed) + "/" + std::to_string(total) + " examples match" + (failed.empty() ? "" : ", failing:" + failed)};
}

struct RegionCase {
  std::string name;
  Superchannel psi;
  ConstructionHints hints;
  bool tp, tap, ttap;
  std::function<bool(const ClassReport&)> extra;  // region-specific evidence, may be empty
};

bool not_jointly_measurable(const Multimeter& m) {
  const auto res = joint_measurement_feasibility(m);
  return !res.cert.feasible() && res.cert.residual > kCompatInfeasible;
}

std::vector<RegionCase> region_cases() {
  RandomSource rng(1008);
  std::vector<RegionCase> cases;

  // classical simulation with outcome-independent postprocessing lands in ttap
  {
    const auto pi = rng.cond_prob(2, {2});
    CondProb nu(2, {2, 2, 2});
    for (std::size_t y = 0; y < 2; ++y) {
      const auto w = rng.distribution(2);
      for (std::size_t a = 0; a < 2; ++a)
        for (std::size_t x = 0; x < 2; ++x)
          for (std::size_t b = 0; b < 2; ++b) nu(b, {a, x, y}) = w[b];
    }
    cases.push_back({"cs with outcome-independent nu", classical_simulation_map(pi, nu, 2),
                     {.classical_simulation = true}, true, true, true, {}});
  }

  // a trivial target on a smaller system, prepared by a compatibility-preserving map
  {
    const std::size_t g = 2, k = 2, d = 3, n = 2, l = 3, r = 2;
    CondProb p(1, {});
    p(0, {}) = 1.0;
    const auto pi = CondProb::deterministic(g, {r, g, 1}, [](const auto& c) { return c[1]; });
    const auto q = rng.cond_prob(l, {r});
    CondProb nu(l, {k, g, r, g, 1});
    for (std::size_t s = 0; s < nu.slices(); ++s) {
      const std::size_t y = (s / g) % r;
      for (std::size_t b = 0; b < l; ++b) nu.values()[s * l + b] = q(b, {y});
    }
    cases.push_back({"cp preparing a trivial multimeter",
                     compatibility_preserving_map(p, {rng.instrument(n, d, g)}, pi, nu),
                     {.compatibility_preserving = true}, true, true, true, {}});
  }

  // compression by a weighted identity is a mixture of settings
  {
    const auto w = rng.distribution(2);
    const auto comp = compression_map(Instrument(2, 2, {scaled(identity_channel(2), w[0]), scaled(identity_channel(2), w[1])}), 1, 2);
    CondProb pi(2, {1});
    pi(0, {0}) = w[0];
    pi(1, {0}) = w[1];
    const auto mixture = classical_simulation_map(pi, CondProb::deterministic(2, {2, 2, 1}, [](const auto& c) { return c[0]; }), 2);
    cases.push_back({"compression by weighted identity (also cs)", comp, {.compression = true}, true, false, false,
                     [=](const ClassReport&) { return action_distance(comp, mixture) < kRealize; }});
  }

  // compression through one shared channel into a smaller system
  {
    const CPMap shared = rng.channel(2, 3);
    const auto w = rng.distribution(2);
    cases.push_back({"compression through a shared channel",
                     compression_map(Instrument(2, 3, {scaled(shared, w[0]), scaled(shared, w[1])}), 1, 2),
                     {.compression = true}, true, false, false, {}});
  }

  cases.push_back({"generic compression", compression_map(rng.instrument(2, 2, 2), 1, 2), {.compression = true},
                   false, false, false, {}});

  // K = L = 1, n != d, l != k, outcome-dependent postprocessing
  {
    CondProb p(1, {});
    p(0, {}) = 1.0;
    const auto pi = rng.cond_prob(2, {1, 1, 1});
    const auto nu = rng.cond_prob(3, {2, 2, 1, 1, 1});
    cases.push_back({"cp with a single channel", compatibility_preserving_map(p, {Instrument(2, 3, {rng.channel(2, 3)})}, pi, nu),
                     {.compatibility_preserving = true}, true, false, false, {}});
  }

  // copies of one non-trivial POVM, prepared through a measure-and-prepare instrument
  {
    const std::size_t g = 2, k = 2, d = 2, n = 2, l = 2, r = 2;
    POVM target = rng.povm(n, l);
    while (is_trivial_multimeter(Multimeter({target}))) target = rng.povm(n, l);
    const CMat sigma = rng.density(d);
    std::vector<CPMap> branches;
    for (std::size_t b = 0; b < l; ++b) branches.emplace_back(n, d, kron(sigma, target[b].transpose()));
    CondProb p(1, {});
    p(0, {}) = 1.0;
    const auto pi = CondProb::deterministic(g, {r, l, 1}, [](const auto&) { return std::size_t{0}; });
    const auto nu = CondProb::deterministic(l, {k, g, r, l, 1}, [](const auto& c) { return c[3]; });
    const auto psi = compatibility_preserving_map(p, {Instrument(n, d, std::move(branches))}, pi, nu);
    cases.push_back({"cp trash-and-prepare of copies", psi, {.compatibility_preserving = true}, false, true, false,
                     [=](const ClassReport& rep) {
                       return multimeter_distance(*rep.tap_detail.prepared, Multimeter({target, target})) < kRealize;
                     }});
  }

  cases.push_back({"trash-and-prepare of an incompatible pair", trash_and_prepare_map(catalog::basis_and_hadamard(), {1, 2, 2}),
                   {}, false, true, false,
                   [](const ClassReport& rep) { return not_jointly_measurable(*rep.tap_detail.prepared); }});

  {
    const auto had = from_classical_realization(catalog::hadamard_realization());
    cases.push_back({"Hadamard pair (tp, not cp)", had, {}, true, false, false, [=](const ClassReport&) {
                       return not_jointly_measurable(apply(had, Multimeter({catalog::computational_basis(2)})));
                     }});
  }

  {
    const auto lue = from_classical_realization(catalog::lueders_realization(0.9, 0.2, catalog::lueders_default_effect()));
    const Multimeter unit({POVM(2, {CMat::identity(2), CMat(2)})});
    cases.push_back({"Lueders (cp, not tp, not c)", lue, {.compatibility_preserving = true}, false, false, false,
                     [=](const ClassReport&) {
                       // a compression of POVMs is unital, this image is not
                       return distance(apply(lue, unit).effect(0, 0), CMat::identity(2)) > 1e-3;
                     }});
  }
  return cases;
}

// 8. membership pattern of the constructed instances
Outcome region_pattern() {
  int violations = 0;
  std::string failed;
  const auto cases = region_cases();
  for (const auto& c : cases) {
    bool ok = false;
    try {
      const auto rep = classify(c.psi, c.hints);
      ok = rep.tp == c.tp && rep.tap == c.tap && rep.ttap == c.ttap && rep.ttap == (rep.tp && rep.tap);
      if (ok && c.extra) ok = c.extra(rep);
    } catch (const Error& e) {
      failed += std::string(" [") + e.what() + "]";
    }
    if (!ok) {
      ++violations;
      failed += " " + c.name + ";";
    }
  }
  return {violations == 0, std::to_string(cases.size()) + " instances, " + std::to_string(violations) + " violations" + failed};
}

// 9. LP and alternating-projection engines
Outcome feasibility_engines() {
  RandomSource rng(1009);
  const auto m = rng.multimeter(2, 3, 2);
  const auto self = is_classically_simulable(m, m);
  std::vector<CMat> mixed;
  for (std::size_t a = 0; a < 3; ++a) mixed.push_back((m.effect(a, 0) + m.effect(a, 1)) * 0.5);
  const auto mix = is_classically_simulable(Multimeter({POVM(2, mixed)}), m);
  const Multimeter trivial({POVM(2, {CMat::identity(2) * 0.3, CMat::identity(2) * 0.7})});
  const auto none = is_classically_simulable(Multimeter({catalog::computational_basis(2)}), trivial);
  const bool lp_ok = self.feasible() && self.simulation_residual < kSimulationExact && mix.feasible() &&
                     mix.simulation_residual < kSimulationExact && none.lp.status == FeasibilityStatus::infeasible;

  const POVM first(2, {CMat::diagonal({0.9, 0.2}), CMat::diagonal({0.1, 0.8})});
  const POVM second(2, {CMat::diagonal({0.6, 0.3}), CMat::diagonal({0.4, 0.7})});
  const auto commuting = joint_measurement_feasibility(Multimeter({first, second}));
  const auto zx = joint_measurement_feasibility(catalog::basis_and_hadamard());
  const bool compat_ok = commuting.cert.feasible() && commuting.cert.residual < kCompatFeasible &&
                         commuting.cert.iterations < kCompatIterations && !zx.cert.feasible() &&
                         zx.cert.residual > kCompatInfeasible && zx.cert.iterations == Tolerances{}.compat_max_iter;
  return {lp_ok && compat_ok,
          "self " + sci(self.simulation_residual) + ", mixture " + sci(mix.simulation_residual) + ", trivial->basis " +
              to_string(none.lp.status) + "; commuting " + sci(commuting.cert.residual) + " in " +
              std::to_string(commuting.cert.iterations) + " it, Z/X " + to_string(zx.cert.status) + " residual " +
              sci(zx.cert.residual) + " after " + std::to_string(zx.cert.iterations) + " it"};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"Choi round trip", choi_round_trip},
      {"dilation and derivative POVM", dilation_and_derivatives},
      {"realization round trip", realization_round_trip},
      {"triviality-preservation oracle agreement", tp_agreement},
      {"trash-and-prepare oracle agreement", tap_agreement},
      {"simulation and compression properties", family_properties},
      {"worked examples", example_suite},
      {"inclusion pattern", region_pattern},
      {"feasibility engines", feasibility_engines},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto start = std::chrono::steady_clock::now();
    Outcome res;
    try {
      res = criteria[i].second();
    } catch (const std::exception& e) {
      res = {false, std::string("threw: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    failures += !res.pass;
    std::printf("%s %zu %s: %s [%.1fs]\n", res.pass ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(),
                res.detail.c_str(), secs);
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
