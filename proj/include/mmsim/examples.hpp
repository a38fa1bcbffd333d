#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "mmsim/analysis/classify.hpp"
#include "mmsim/catalog.hpp"
#include "mmsim/feasibility/joint.hpp"
#include "mmsim/io/json.hpp"
#include "mmsim/random.hpp"
#include "mmsim/supermap/constructors.hpp"
#include "mmsim/supermap/realize.hpp"

// Worked instances with known verdicts. Each runner rebuilds the instance,
// recomputes the verdicts and lists them next to the expected ones.
namespace mmsim::examples {

struct Check {
  std::string name;
  std::string expected;
  std::string observed;
  bool pass = false;
};

struct Report {
  explicit Report(std::string n) : name(std::move(n)) {}

  std::string name;
  std::vector<Check> checks;
  io::Json details = io::Json::object();
  std::vector<std::pair<std::string, io::Artifact>> artifacts;  // file stem -> artifact

  bool all_pass() const {
    for (const auto& c : checks)
      if (!c.pass) return false;
    return !checks.empty();
  }
  void expect(std::string name, bool expected, bool observed) {
    checks.push_back({std::move(name), expected ? "true" : "false", observed ? "true" : "false", expected == observed});
  }
  void expect_value(std::string name, std::string expected, std::string observed, bool pass) {
    checks.push_back({std::move(name), std::move(expected), std::move(observed), pass});
  }
};

struct Options {
  std::uint64_t seed = 1;
  Tolerances tol{};
  // Lueders example parameters
  double p = 1.0;
  double q = 0.0;
  CMat effect = catalog::lueders_default_effect();
};

inline std::string fmt(double v) {
  std::ostringstream os;
  os.precision(3);
  os << std::scientific << v;
  return os.str();
}

// Z/X pair out of a Hadamard conjugation; the outputs are incompatible.
inline Report hadamard(const Options& opt) {
  Report rep{"hadamard"};
  const auto psi = from_classical_realization(catalog::hadamard_realization(), opt.tol);
  const auto cls = classify(psi, {}, opt.tol);
  rep.expect("triviality-preserving", true, cls.tp);
  rep.expect("trash-and-prepare", false, cls.tap);

  const Multimeter basis({catalog::computational_basis(2)});
  const auto out = apply(psi, basis, opt.tol);
  const double second_gap = multimeter_distance(Multimeter({out[1]}), Multimeter({catalog::hadamard_basis()}));
  rep.expect_value("second output setting is the Hadamard basis", "< " + fmt(opt.tol.eq), fmt(second_gap),
                   within(second_gap, 1.0, opt.tol.eq));
  const auto compat = joint_measurement_feasibility(out, opt.tol);
  rep.expect_value("output pair jointly measurable", "not feasible (residual > 1e-4)",
                   to_string(compat.cert.status) + " (residual " + fmt(compat.cert.residual) + ")",
                   !compat.cert.feasible() && compat.cert.residual > 1e-4);
  rep.details = {{"region", region_label(cls)},
                 {"compat_status", to_string(compat.cert.status)},
                 {"compat_residual", compat.cert.residual},
                 {"compat_iterations", compat.cert.iterations}};
  rep.artifacts.push_back({"superchannel", {psi, std::string("classical_simulation")}});
  rep.artifacts.push_back({"output", {out, std::nullopt}});
  return rep;
}

// Lueders instrument of (E, 1-E) followed by an a-dependent postprocessing on
// one branch. Needs p != q and E not a multiple of 1.
inline Report lueders(const Options& opt) {
  if (opt.p == opt.q) throw DimensionError("lueders example needs p != q");
  if (opt.p < 0.0 || opt.p > 1.0 || opt.q < 0.0 || opt.q > 1.0) throw DimensionError("p and q must lie in [0, 1]");
  if (is_trivial_effect(opt.effect, opt.tol)) throw DimensionError("lueders example needs E not proportional to 1");
  Report rep{"lueders"};
  const std::size_t d = opt.effect.rows();
  const auto real = catalog::lueders_realization(opt.p, opt.q, opt.effect);
  const auto psi = from_classical_realization(real, opt.tol);
  const auto cls = classify(psi, {.compatibility_preserving = true}, opt.tol);
  rep.expect("triviality-preserving", false, cls.tp);
  rep.expect("trash-and-prepare", false, cls.tap);

  // N^1: image of the POVM (1, 0); a single-channel compression would give 1
  const Multimeter unit_input({POVM(d, {CMat::identity(d), CMat(d)})});
  const CMat n_unit = apply(psi, unit_input, opt.tol).effect(0, 0);
  const double unit_gap = distance(n_unit, CMat::identity(d));
  rep.expect_value("N^1 differs from 1 (so not a compression)", "> " + fmt(opt.tol.eq), fmt(unit_gap),
                   !within(unit_gap, 1.0, opt.tol.eq));

  // closed form q E + (p - q) sqrt(E) F sqrt(E) on a random F
  RandomSource rng(opt.seed);
  const POVM f = rng.povm(d, 2);
  const CMat root = psd_sqrt(opt.effect);
  const CMat expected = opt.effect * opt.q + root * f[0] * root * (opt.p - opt.q);
  const double formula_gap = distance(apply(psi, Multimeter({f}), opt.tol).effect(0, 0), expected);
  rep.expect_value("N^F = qE + (p-q) sqrt(E) F sqrt(E)", "< " + fmt(opt.tol.eq), fmt(formula_gap),
                   within(formula_gap, 1.0, opt.tol.eq));
  rep.details = {{"region", region_label(cls)}, {"p", opt.p}, {"q", opt.q}};
  rep.artifacts.push_back({"superchannel", {psi, std::string("compatibility_preserving")}});
  rep.artifacts.push_back({"realization", {real, std::nullopt}});
  return rep;
}

// Trash-and-prepare onto a non-trivial POVM, which needs a classical ancilla
// of size l.
inline Report tap_classical(const Options& opt) {
  Report rep{"tap-classical"};
  RandomSource rng(opt.seed);
  POVM target = rng.povm(2, 2);
  while (is_trivial_multimeter(Multimeter({target}), opt.tol)) target = rng.povm(2, 2);
  const SlotDims in{1, 2, 2};
  const auto real = trash_and_prepare_realization(Multimeter({target}), in, opt.tol);
  const auto psi = from_classical_realization(real, opt.tol);

  double worst = 0.0;
  for (int i = 0; i < 10; ++i)
    worst = std::max(worst, multimeter_distance(apply(psi, rng.multimeter(in.g, in.k, in.d), opt.tol), Multimeter({target})));
  rep.expect_value("output constant over 10 random inputs", "< " + fmt(opt.tol.eq), fmt(worst),
                   within(worst, 1.0, opt.tol.eq));
  const auto cls = classify(psi, {}, opt.tol);
  rep.expect("trash-and-prepare", true, cls.tap);
  rep.expect("triviality-preserving", false, cls.tp);

  bool realized = false;
  std::string note;
  try {
    const auto rr = realize_with_report(psi, opt.tol);
    validate(rr.realization, opt.tol);
    realized = true;
    note = "s=" + std::to_string(rr.realization.s) + ", residual " + fmt(rr.roundtrip_residual);
    rep.artifacts.push_back({"realized", {rr.realization, std::nullopt}});
  } catch (const Error& e) {
    note = e.what();
  }
  rep.expect_value("realize returns a valid realization", "valid", realized ? "valid (" + note + ")" : note, realized);
  rep.details = {{"region", region_label(cls)}, {"classical_ancilla", real.s}};
  rep.artifacts.push_back({"superchannel", {psi, std::string("trash_and_prepare")}});
  rep.artifacts.push_back({"realization", {real, std::nullopt}});
  return rep;
}

// N_b = sum_a Tr[M_a]/d B_{b|a} with B = {Z basis, X basis}: any realisation
// needs a quantum ancilla.
inline Report quantum_ancilla(const Options& opt) {
  Report rep{"quantum-ancilla"};
  const std::size_t d = 2;
  const std::vector<POVM> ancilla = {catalog::computational_basis(2), catalog::hadamard_basis()};
  const auto psi = quantum_ancilla_example_map(ancilla, d, opt.tol);

  RandomSource rng(opt.seed);
  const POVM m = rng.povm(d, 2);
  std::vector<CMat> expected(2, CMat(2));
  for (std::size_t a = 0; a < 2; ++a)
    for (std::size_t b = 0; b < 2; ++b) expected[b].add_scaled(ancilla[a][b], m[a].trace().real() / static_cast<double>(d));
  const double gap = multimeter_distance(apply(psi, Multimeter({m}), opt.tol), Multimeter({POVM(2, expected)}));
  rep.expect_value("N_b = sum_a Tr[M_a]/d B_{b|a}", "< " + fmt(opt.tol.eq), fmt(gap), within(gap, 1.0, opt.tol.eq));

  std::size_t s = 0;
  std::string note;
  try {
    const auto rr = realize_with_report(psi, opt.tol);
    s = rr.realization.s;
    note = "s=" + std::to_string(s) + ", residual " + fmt(rr.roundtrip_residual);
    rep.artifacts.push_back({"realized", {rr.realization, std::nullopt}});
  } catch (const Error& e) {
    note = e.what();
  }
  rep.expect_value("realize needs a quantum ancilla", "s >= 2", note, s >= 2);
  rep.expect("ancilla POVMs jointly measurable", false,
             joint_measurement_feasibility(Multimeter(ancilla), opt.tol).cert.feasible());
  rep.details = {{"ancilla_dimension", s}};
  rep.artifacts.push_back({"superchannel", {psi, std::string("quantum_ancilla")}});
  return rep;
}

// Preparing a trivial POVM p_b 1: any instrument Lambda with nu(b|a,x) = p_b
// realises the same map.
inline Report tap_not_unique(const Options& opt) {
  Report rep{"tap-not-unique"};
  RandomSource rng(opt.seed);
  const SlotDims in{2, 2, 2}, out{1, 3, 2};
  const auto weights = rng.distribution(out.k);
  CondProb nu(out.k, {in.k, in.g, out.g, 1});
  for (std::size_t s = 0; s < nu.slices(); ++s)
    for (std::size_t b = 0; b < out.k; ++b) nu.values()[s * out.k + b] = weights[b];

  auto build = [&](const Instrument& lambda) {
    ClassicalRealization r;
    r.in = in;
    r.out = out;
    r.s = 1;
    r.lambda = {lambda};
    r.nu = nu;
    return r;
  };
  const auto first = build(rng.instrument(out.d, in.d, in.g, 2));
  const auto second = build(rng.instrument(out.d, in.d, in.g, 1));
  const auto psi_first = from_classical_realization(first, opt.tol);
  const auto psi_second = from_classical_realization(second, opt.tol);

  double lambda_gap = 0.0;
  for (std::size_t x = 0; x < in.g; ++x)
    lambda_gap = std::max(lambda_gap, distance(first.branch(x, 0, 0).choi(), second.branch(x, 0, 0).choi()));
  rep.expect_value("instruments differ", "> 1e-3", fmt(lambda_gap), lambda_gap > 1e-3);
  const double choi_gap = distance(action_choi(psi_first, opt.tol), action_choi(psi_second, opt.tol));
  rep.expect_value("induced superchannel Choi (on multimeters) agrees", "< 1e-9", fmt(choi_gap), choi_gap < 1e-9);
  const auto cls = classify(psi_first, {}, opt.tol);
  rep.expect("trash-and-prepare", true, cls.tap);
  rep.expect("prepared multimeter trivial", true, cls.ttap);
  rep.details = {{"raw_choi_distance", distance(psi_first.choi(), psi_second.choi())},
                 {"action_choi_distance", choi_gap},
                 {"weights", weights}};
  rep.artifacts.push_back({"realization_a", {first, std::nullopt}});
  rep.artifacts.push_back({"realization_b", {second, std::nullopt}});
  return rep;
}

inline const std::map<std::string, std::function<Report(const Options&)>>& registry() {
  static const std::map<std::string, std::function<Report(const Options&)>> table = {
      {"hadamard", hadamard},
      {"lueders", lueders},
      {"tap-classical", tap_classical},
      {"quantum-ancilla", quantum_ancilla},
      {"tap-not-unique", tap_not_unique},
  };
  return table;
}

}  // namespace mmsim::examples
