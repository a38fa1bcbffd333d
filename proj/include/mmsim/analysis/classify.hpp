#pragma once

#include <optional>
#include <string>

#include "mmsim/analysis/trash_prepare.hpp"
#include "mmsim/analysis/triviality.hpp"
#include "mmsim/supermap/superchannel.hpp"

namespace mmsim {

// Families a superchannel is known to belong to because of how it was built.
// Membership in these is not decidable from the Choi matrix alone here, so
// they are carried along rather than computed.
struct ConstructionHints {
  bool classical_simulation = false;
  bool compression = false;
  bool compatibility_preserving = false;
};

struct ClassReport {
  bool tp = false;
  bool tap = false;
  bool ttap = false;  // trash-and-prepare onto a trivial multimeter
  std::optional<bool> cs;
  std::optional<bool> c;
  std::optional<bool> cp;
  TPResult tp_detail;
  TAPResult tap_detail;
};

inline ClassReport classify(const Superchannel& input, const ConstructionHints& hints = {}, const Tolerances& tol = {}) {
  const Superchannel psi = certify(input, tol);
  ClassReport rep;
  rep.tp_detail = is_triviality_preserving(psi, tol);
  rep.tap_detail = is_trash_and_prepare(psi, tol);
  rep.tp = rep.tp_detail.holds;
  rep.tap = rep.tap_detail.holds;
  rep.ttap = rep.tap && is_trivial_multimeter(*rep.tap_detail.prepared, tol);
  if (hints.classical_simulation) rep.cs = true;
  if (hints.compression) rep.c = true;
  if (hints.compatibility_preserving) rep.cp = true;

  if (rep.ttap != (rep.tp && rep.tap))
    throw InconsistencyError("trivial trash-and-prepare disagrees with tp and tap");
  if (rep.cs.value_or(false) && !rep.tp)
    throw InconsistencyError("classical simulation reported as not triviality-preserving");
  // With a single input outcome every multimeter is trivial and compression is
  // constant, so the exclusion only applies for k >= 2.
  if (rep.c.value_or(false) && psi.in().k >= 2 && rep.tap)
    throw InconsistencyError("compression reported as trash-and-prepare");
  return rep;
}

inline std::string region_label(const ClassReport& rep) {
  std::string out = rep.tp ? "tp" : "not-tp";
  out += rep.tap ? ",tap" : ",not-tap";
  if (rep.ttap) out += ",ttap";
  if (rep.cs) out += ",cs";
  if (rep.c) out += ",c";
  if (rep.cp) out += ",cp";
  return out;
}

}  // namespace mmsim
