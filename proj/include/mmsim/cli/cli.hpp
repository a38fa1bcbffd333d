#pragma once

#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <iomanip>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "mmsim/analysis/classify.hpp"
#include "mmsim/examples.hpp"
#include "mmsim/feasibility/joint.hpp"
#include "mmsim/feasibility/simulability.hpp"
#include "mmsim/io/json.hpp"
#include "mmsim/random.hpp"
#include "mmsim/supermap/realize.hpp"

// Command-line front end. Exit codes: 0 the property holds / the operation
// succeeded, 1 it does not hold or an input violates an invariant, 2 usage,
// I/O, parse or internal errors.
namespace mmsim::cli {

using io::Json;

inline constexpr int kOk = 0;
inline constexpr int kNo = 1;
inline constexpr int kError = 2;

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// MMSIM_TOLERANCE overrides the equality tolerance.
inline Tolerances tolerances_from_env() {
  Tolerances tol;
  if (const char* raw = std::getenv("MMSIM_TOLERANCE"); raw && *raw) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(raw, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != std::string(raw).size() || !std::isfinite(v) || v <= 0.0)
      throw UsageError(std::string("MMSIM_TOLERANCE must be a positive number, got \"") + raw + "\"");
    tol.eq = v;
  }
  return tol;
}

namespace detail {

inline Json multimeter_json(const Multimeter& m) { return io::to_json({m, std::nullopt}); }

inline Multimeter as_multimeter(const io::Artifact& a, const std::string& what) {
  if (const auto* m = std::get_if<Multimeter>(&a.value)) return *m;
  if (const auto* p = std::get_if<POVM>(&a.value)) return Multimeter({*p});
  throw UsageError(what + " must be a multimeter or povm artifact, got " + io::kind_of(a.value));
}

struct LoadedMap {
  Superchannel psi;
  std::optional<ClassicalRealization> classical;
  ConstructionHints hints;
};

inline ConstructionHints hints_from(const std::optional<std::string>& provenance) {
  ConstructionHints h;
  if (!provenance) return h;
  h.classical_simulation = *provenance == "classical_simulation";
  h.compression = *provenance == "compression";
  h.compatibility_preserving = *provenance == "compatibility_preserving";
  return h;
}

inline LoadedMap load_map(const std::string& path, const Tolerances& tol) {
  const auto art = io::read_file(path);
  LoadedMap out;
  if (const auto* psi = std::get_if<Superchannel>(&art.value)) {
    out.psi = certify(Superchannel(psi->in(), psi->out(), psi->map()), tol);
    out.hints = hints_from(art.provenance);
  } else if (const auto* cr = std::get_if<ClassicalRealization>(&art.value)) {
    out.psi = from_classical_realization(*cr, tol);
    out.classical = *cr;
  } else if (const auto* gr = std::get_if<GeneralRealization>(&art.value)) {
    out.psi = from_general_realization(*gr, tol);
  } else {
    throw UsageError(path + " must hold a superchannel or a realization, got " + io::kind_of(art.value));
  }
  return out;
}

// Short name of the invariant an mmsim::Error reports.
inline std::string violation_kind(const Error& e) {
  if (dynamic_cast<const NormalizationError*>(&e)) return "normalization";
  if (dynamic_cast<const NotPSDError*>(&e)) return "positivity";
  if (dynamic_cast<const HermiticityError*>(&e)) return "hermiticity";
  if (dynamic_cast<const DimensionError*>(&e)) return "dimension";
  if (dynamic_cast<const StateError*>(&e)) return "state";
  if (dynamic_cast<const NotMultimeterChoiError*>(&e)) return "multimeter-structure";
  if (dynamic_cast<const NotSuperchannelError*>(&e)) return "superchannel";
  if (dynamic_cast<const RealizationError*>(&e)) return "realization";
  return "invariant";
}

inline void emit(std::ostream& out, const Json& j) { out << io::dump(j); }

inline CMat parse_real_matrix(const std::string& text) {
  std::vector<std::vector<double>> rows;
  std::stringstream all(text);
  std::string row_text;
  while (std::getline(all, row_text, ';')) {
    std::vector<double> row;
    std::stringstream rs(row_text);
    std::string cell;
    while (std::getline(rs, cell, ',')) {
      std::size_t used = 0;
      double v = 0.0;
      try {
        v = std::stod(cell, &used);
      } catch (const std::exception&) {
        throw UsageError("cannot parse matrix entry \"" + cell + "\"");
      }
      row.push_back(v);
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty() || rows[0].empty()) throw UsageError("empty matrix");
  if (rows.size() == 1) {
    std::vector<double> diag = rows[0];
    return CMat::diagonal(diag);
  }
  CMat m(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != rows.size()) throw UsageError("matrix must be square");
    for (std::size_t j = 0; j < rows.size(); ++j) m(i, j) = rows[i][j];
  }
  return m;
}

}  // namespace detail

// ---- subcommands ------------------------------------------------------------

inline int cmd_validate(const std::string& path, const Tolerances& tol, std::ostream& out) {
  const auto art = io::read_file(path);
  Json rep{{"command", "validate"}, {"file", path}, {"kind", io::kind_of(art.value)}, {"tolerances", io::encode(tol)}};
  try {
    io::validate_artifact(art, tol);
    rep["valid"] = true;
    detail::emit(out, rep);
    return kOk;
  } catch (const Error& e) {
    rep["valid"] = false;
    rep["violation"] = detail::violation_kind(e);
    rep["message"] = e.what();
    detail::emit(out, rep);
    return kNo;
  }
}

inline int cmd_apply(const std::string& psi_path, const std::string& m_path, const std::string& out_path,
                     const Tolerances& tol, std::ostream& out) {
  const auto psi = detail::load_map(psi_path, tol).psi;
  const auto art = io::read_file(m_path);
  const Multimeter m = detail::as_multimeter(art, m_path);
  validate(m, tol);
  const Multimeter image = apply(psi, m, tol);
  if (out_path.empty()) {
    detail::emit(out, detail::multimeter_json(image));
  } else {
    io::write_file(out_path, {image, std::nullopt});
    detail::emit(out, {{"command", "apply"}, {"output", out_path}, {"dims", io::encode(dims_of(image))},
                       {"tolerances", io::encode(tol)}});
  }
  return kOk;
}

inline int cmd_realize(const std::string& psi_path, const std::string& out_path, const Tolerances& tol,
                       std::ostream& out) {
  const auto psi = detail::load_map(psi_path, tol).psi;
  Json rep{{"command", "realize"}, {"tolerances", io::encode(tol)}};
  try {
    const auto rr = realize_with_report(psi, tol);
    rep["verdict"] = true;
    rep["s"] = rr.realization.s;
    rep["roundtrip_residual"] = rr.roundtrip_residual;
    if (out_path.empty()) {
      rep["realization"] = io::to_json({rr.realization, std::nullopt});
    } else {
      io::write_file(out_path, {rr.realization, std::nullopt});
      rep["output"] = out_path;
    }
    detail::emit(out, rep);
    return kOk;
  } catch (const RealizationError& e) {
    rep["verdict"] = false;
    rep["error"] = e.what();
    detail::emit(out, rep);
    return kNo;
  } catch (const DecompositionError& e) {
    rep["verdict"] = false;
    rep["error"] = e.what();
    detail::emit(out, rep);
    return kNo;
  }
}

inline int cmd_check(const std::string& property, const std::string& path, const Tolerances& tol, std::ostream& out) {
  const auto loaded = detail::load_map(path, tol);
  Json rep{{"command", "check"}, {"property", property}, {"tolerances", io::encode(tol)}};
  bool verdict = false;
  if (property == "tp") {
    const auto res = is_triviality_preserving(loaded.psi, tol);
    verdict = res.holds;
    if (res.witness_vertex) {
      rep["witness_vertex"] = *res.witness_vertex;
      rep["witness_output"] = detail::multimeter_json(*res.witness_output);
    }
    if (loaded.classical && loaded.classical->s == 1) {
      const auto st = is_triviality_preserving_structural(*loaded.classical, tol);
      rep["structural"] = {{"verdict", st.holds}, {"reason", st.reason}};
      if (st.holds) rep["structural"]["pi"] = io::encode(st.pi);
    }
  } else if (property == "tap") {
    const auto res = is_trash_and_prepare(loaded.psi, tol);
    verdict = res.holds;
    rep["max_deviation"] = res.max_deviation;
    if (res.holds) rep["prepared"] = detail::multimeter_json(*res.prepared);
    if (res.witness_index) rep["witness_index"] = *res.witness_index;
    if (loaded.classical) {
      const auto st = is_trash_and_prepare_structural(*loaded.classical, tol);
      rep["structural"] = {{"verdict", st.holds}, {"deviation", st.deviation}};
      if (st.direct_criterion) rep["structural"]["direct_criterion"] = *st.direct_criterion;
    }
  } else if (property == "classify") {
    const auto cls = classify(loaded.psi, loaded.hints, tol);
    verdict = true;
    rep["tp"] = cls.tp;
    rep["tap"] = cls.tap;
    rep["ttap"] = cls.ttap;
    auto flag = [](const std::optional<bool>& f) { return f ? Json(*f) : Json(nullptr); };
    rep["cs"] = flag(cls.cs);
    rep["c"] = flag(cls.c);
    rep["cp"] = flag(cls.cp);
    rep["region"] = region_label(cls);
  } else {
    throw UsageError("unknown property \"" + property + "\" (expected tp, tap or classify)");
  }
  rep["verdict"] = verdict;
  detail::emit(out, rep);
  return verdict ? kOk : kNo;
}

inline int cmd_compat(const std::string& path, const Tolerances& tol, std::ostream& out) {
  const Multimeter m = detail::as_multimeter(io::read_file(path), path);
  validate(m, tol);
  const auto cert = joint_measurement_feasibility(m, tol);
  Json rep{{"command", "compat"},
           {"status", to_string(cert.cert.status)},
           {"residual", cert.cert.residual},
           {"iterations", cert.cert.iterations},
           {"tolerances", io::encode(tol)}};
  if (cert.joint) rep["joint"] = io::to_json({*cert.joint, std::nullopt});
  detail::emit(out, rep);
  return cert.cert.feasible() ? kOk : kNo;
}

inline int cmd_classical_sim(const std::string& target_path, const std::string& sim_path, const Tolerances& tol,
                             std::ostream& out) {
  const Multimeter target = detail::as_multimeter(io::read_file(target_path), target_path);
  const Multimeter sim = detail::as_multimeter(io::read_file(sim_path), sim_path);
  validate(target, tol);
  validate(sim, tol);
  const auto cert = is_classically_simulable(target, sim, tol);
  Json rep{{"command", "classical-sim"},
           {"status", to_string(cert.lp.status)},
           {"lp_residual", cert.lp.residual},
           {"iterations", cert.lp.iterations},
           {"tolerances", io::encode(tol)}};
  if (cert.pi) {
    rep["simulation_residual"] = cert.simulation_residual;
    rep["pi"] = io::encode(*cert.pi);
    rep["nu"] = io::encode(*cert.nu);
  }
  detail::emit(out, rep);
  return cert.feasible() ? kOk : kNo;
}

inline int cmd_examples(const std::string& name, const examples::Options& opt, const std::string& emit_dir, bool as_json,
                        std::ostream& out) {
  const auto& table = examples::registry();
  const auto it = table.find(name);
  if (it == table.end()) {
    std::string known;
    for (const auto& [k, v] : table) known += (known.empty() ? "" : ", ") + k;
    throw UsageError("unknown example \"" + name + "\" (known: " + known + ")");
  }
  examples::Report rep(name);
  try {
    rep = it->second(opt);
  } catch (const DimensionError& e) {
    throw UsageError(std::string("bad example parameters: ") + e.what());
  }
  Json checks = Json::array();
  for (const auto& c : rep.checks)
    checks.push_back({{"check", c.name}, {"expected", c.expected}, {"observed", c.observed}, {"pass", c.pass}});
  const Json summary{{"command", "examples"}, {"example", rep.name},   {"seed", opt.seed},
                     {"checks", checks},      {"details", rep.details}, {"all_pass", rep.all_pass()},
                     {"tolerances", io::encode(opt.tol)}};

  if (!emit_dir.empty()) {
    std::filesystem::create_directories(emit_dir);
    for (const auto& [stem, art] : rep.artifacts)
      io::write_file((std::filesystem::path(emit_dir) / (rep.name + "_" + stem + ".json")).string(), art);
    io::write_text((std::filesystem::path(emit_dir) / (rep.name + "_report.json")).string(), io::dump(summary));
  }

  if (as_json) {
    detail::emit(out, summary);
  } else {
    std::size_t width = 5;
    for (const auto& c : rep.checks) width = std::max(width, c.name.size());
    out << "example: " << rep.name << " (seed " << opt.seed << ")\n";
    for (const auto& c : rep.checks)
      out << "  " << (c.pass ? "PASS" : "FAIL") << "  " << std::left << std::setw(static_cast<int>(width)) << c.name
          << "  expected " << c.expected << ", observed " << c.observed << "\n";
    out << (rep.all_pass() ? "all checks match\n" : "MISMATCH\n");
  }
  return rep.all_pass() ? kOk : kNo;
}

struct RandomRequest {
  std::string kind;
  std::uint64_t seed = 1;
  std::size_t g = 2, k = 2, d = 2;
  std::size_t out_g = 1, out_k = 2, out_d = 2;
  std::size_t s = 1;
  std::size_t outcomes = 2;
};

inline io::Artifact random_artifact(const RandomRequest& request) {
  RandomSource rng(request.seed);
  const SlotDims in{request.g, request.k, request.d}, out{request.out_g, request.out_k, request.out_d};
  auto classical = [&] {
    ClassicalRealization r;
    r.in = in;
    r.out = out;
    r.s = request.s;
    for (std::size_t y = 0; y < out.g; ++y) r.lambda.push_back(rng.instrument(out.d, in.d, in.g * request.s, 2));
    r.nu = rng.cond_prob(out.k, {in.k, in.g, out.g, request.s});
    return r;
  };
  if (request.kind == "multimeter") return {rng.multimeter(request.g, request.k, request.d), std::nullopt};
  if (request.kind == "povm") return {rng.povm(request.d, request.k), std::nullopt};
  if (request.kind == "instrument") return {rng.instrument(request.d, request.out_d, request.outcomes, 2), std::nullopt};
  if (request.kind == "classical_realization") return {classical(), std::nullopt};
  if (request.kind == "superchannel") return {from_classical_realization(classical()), std::string("classical_realization")};
  if (request.kind == "general_realization") {
    GeneralRealization r;
    r.in = in;
    r.out = out;
    r.s = request.s;
    for (std::size_t y = 0; y < out.g; ++y) {
      r.lambda.push_back(rng.instrument(out.d, in.d * request.s, in.g, 2).branches());
      std::vector<std::vector<POVM>> per_x;
      for (std::size_t x = 0; x < in.g; ++x) {
        std::vector<POVM> per_a;
        for (std::size_t a = 0; a < in.k; ++a) per_a.push_back(rng.povm(request.s, out.k));
        per_x.push_back(std::move(per_a));
      }
      r.b.push_back(std::move(per_x));
    }
    return {r, std::nullopt};
  }
  throw UsageError("unknown artifact kind \"" + request.kind + "\"");
}

// ---- entry point -----------------------------------------------------------

inline int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Multimeter transformations: realizations, triviality and feasibility checks", "mmsim_cli"};
  app.require_subcommand(1);

  std::string validate_path;
  auto* validate_cmd = app.add_subcommand("validate", "check an artifact file against its invariants");
  validate_cmd->add_option("file", validate_path, "artifact JSON")->required();

  std::string psi_path, m_path, out_path;
  auto* apply_cmd = app.add_subcommand("apply", "apply a superchannel to a multimeter");
  apply_cmd->add_option("--superchannel", psi_path, "superchannel or realization artifact")->required();
  apply_cmd->add_option("--multimeter", m_path, "multimeter or povm artifact")->required();
  apply_cmd->add_option("-o,--output", out_path, "where to write the output multimeter (stdout if omitted)");

  std::string realize_path, realize_out;
  auto* realize_cmd = app.add_subcommand("realize", "extract a quantum-ancilla realization");
  realize_cmd->add_option("--superchannel", realize_path, "superchannel artifact")->required();
  realize_cmd->add_option("-o,--output", realize_out, "where to write the realization");

  std::string property, check_path;
  auto* check_cmd = app.add_subcommand("check", "decide tp / tap or classify");
  check_cmd->add_option("property", property, "tp, tap or classify")->required()->check(CLI::IsMember({"tp", "tap", "classify"}));
  check_cmd->add_option("file", check_path, "superchannel or realization artifact")->required();

  std::string compat_path;
  auto* compat_cmd = app.add_subcommand("compat", "joint measurability of a multimeter");
  compat_cmd->add_option("file", compat_path, "multimeter artifact")->required();

  std::string target_path, sim_path;
  auto* sim_cmd = app.add_subcommand("classical-sim", "is the target a classical simulation of the simulator");
  sim_cmd->add_option("--target", target_path, "multimeter or povm artifact")->required();
  sim_cmd->add_option("--simulator", sim_path, "multimeter or povm artifact")->required();

  std::string example_name, emit_dir, effect_text;
  examples::Options ex_opt;
  bool ex_json = false;
  auto* ex_cmd = app.add_subcommand("examples", "rebuild a worked example and compare verdicts");
  ex_cmd->add_option("name", example_name, "hadamard, lueders, tap-classical, quantum-ancilla, tap-not-unique")->required();
  ex_cmd->add_option("--seed", ex_opt.seed, "seed for the random parts");
  ex_cmd->add_option("--emit", emit_dir, "directory for the constructed artifacts");
  ex_cmd->add_option("--p", ex_opt.p, "lueders: postprocessing weight for a = 0");
  ex_cmd->add_option("--q", ex_opt.q, "lueders: postprocessing weight for a = 1");
  ex_cmd->add_option("--E", effect_text, "lueders: effect, diagonal \"1,0.5\" or rows \"a,b;c,d\"");
  ex_cmd->add_flag("--json", ex_json, "print the report as JSON");

  RandomRequest request;
  std::string random_out;
  auto* rand_cmd = app.add_subcommand("random", "write a random artifact");
  rand_cmd->add_option("kind", request.kind,
                       "multimeter, povm, instrument, superchannel, classical_realization, general_realization")
      ->required();
  rand_cmd->add_option("--seed", request.seed, "generator seed");
  rand_cmd->add_option("--g", request.g, "input settings");
  rand_cmd->add_option("--k", request.k, "input outcomes");
  rand_cmd->add_option("--d", request.d, "input dimension");
  rand_cmd->add_option("--out-g", request.out_g, "output settings");
  rand_cmd->add_option("--out-k", request.out_k, "output outcomes");
  rand_cmd->add_option("--out-d", request.out_d, "output dimension");
  rand_cmd->add_option("--s", request.s, "ancilla size for realizations");
  rand_cmd->add_option("--outcomes", request.outcomes, "instrument outcomes");
  rand_cmd->add_option("-o,--output", random_out, "where to write (stdout if omitted)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kError;
  }

  try {
    const Tolerances tol = tolerances_from_env();
    if (*validate_cmd) return cmd_validate(validate_path, tol, out);
    if (*apply_cmd) return cmd_apply(psi_path, m_path, out_path, tol, out);
    if (*realize_cmd) return cmd_realize(realize_path, realize_out, tol, out);
    if (*check_cmd) return cmd_check(property, check_path, tol, out);
    if (*compat_cmd) return cmd_compat(compat_path, tol, out);
    if (*sim_cmd) return cmd_classical_sim(target_path, sim_path, tol, out);
    if (*ex_cmd) {
      ex_opt.tol = tol;
      if (!effect_text.empty()) ex_opt.effect = detail::parse_real_matrix(effect_text);
      return cmd_examples(example_name, ex_opt, emit_dir, ex_json, out);
    }
    if (*rand_cmd) {
      const auto art = random_artifact(request);
      if (random_out.empty())
        out << io::write_string(art);
      else
        io::write_file(random_out, art);
      return kOk;
    }
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n";
    return kError;
  } catch (const io::SchemaError& e) {
    err << "error: " << e.what() << "\n";
    return kError;
  } catch (const InternalError& e) {
    err << "internal error: " << e.what() << "\n";
    return kError;
  } catch (const CapError& e) {
    err << "error: " << e.what() << "\n";
    return kError;
  } catch (const Error& e) {
    err << "invalid input (" << detail::violation_kind(e) << "): " << e.what() << "\n";
    return kNo;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kError;
  }
  return kError;
}

}  // namespace mmsim::cli
