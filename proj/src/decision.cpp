#include "rac/decision.hpp"

#include <limits>

namespace rac {

MaxMinResult maxmin(const UtilityMatrix& u, const PredictionSet& set) {
  if (set.universe() != u.num_labels()) throw ValidationError("prediction set universe does not match utility labels");
  const auto members = set.members();
  MaxMinResult best{0, -std::numeric_limits<double>::infinity()};
  for (ActionIndex a = 0; a < u.num_actions(); ++a) {
    double score;
    if (members.empty()) {
      score = -std::numeric_limits<double>::infinity();
      for (double v : u.row(a)) score = std::max(score, v);
    } else {
      score = std::numeric_limits<double>::infinity();
      for (LabelIndex y : members) score = std::min(score, u(a, y));
    }
    if (score > best.value) best = {a, score};
  }
  return best;
}

PredictionSet level_set(const UtilityMatrix& u, ActionIndex action, double level) {
  PredictionSet s(u.num_labels());
  for (LabelIndex y = 0; y < u.num_labels(); ++y)
    if (u(action, y) >= level) s.insert(y);
  return s;
}

CertifiedDecision certify(const UtilityMatrix& u, PredictionSet set) {
  const auto mm = maxmin(u, set);
  const bool empty = set.empty();
  return {std::move(set), mm.action, mm.value, empty};
}

CertifiedDecision set_at_coverage(const UtilityMatrix& u, const Forecast& f, double t) {
  const CoverageMenu menu = build_menu(u, f);
  const MenuEntry& e = theta_at(menu, t);
  return certify(u, level_set(u, e.action, e.value));
}

CertifiedDecision set_at_beta(const UtilityMatrix& u, const CoverageMenu& menu, double beta) {
  const MenuEntry& e = g_select(menu, beta);
  return certify(u, level_set(u, e.action, e.value));
}

CertifiedDecision set_at_beta(const UtilityMatrix& u, const Forecast& f, double beta) {
  return set_at_beta(u, build_menu(u, f), beta);
}

}  // namespace rac
