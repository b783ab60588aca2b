#pragma once

#include "rac/menu.hpp"
#include "rac/model.hpp"

namespace rac {

using PredictionSet = LabelSet;

struct MaxMinResult {
  ActionIndex action;
  double value;
};

/// A prediction set with its max-min action and utility certificate.
/// `value` is min over the set of u(action, y), or u_max for an empty set.
struct CertifiedDecision {
  PredictionSet set;
  ActionIndex action = 0;
  double value = 0.0;
  bool empty_set = false;
};

/// Max-min rule: argmax_a min_{y in C} u(a, y), ties to the lowest action.
/// The empty set maps to (argmax_a max_y u(a, y), u_max).
MaxMinResult maxmin(const UtilityMatrix& u, const PredictionSet& set);

/// {y : u(action, y) >= level} over all labels, zero-mass ones included.
PredictionSet level_set(const UtilityMatrix& u, ActionIndex action, double level);

/// Applies the max-min rule to a set.
CertifiedDecision certify(const UtilityMatrix& u, PredictionSet set);

/// Best set among those with forecast mass >= t, via the coverage menu.
CertifiedDecision set_at_coverage(const UtilityMatrix& u, const Forecast& f, double t);

/// The dual-selected set for multiplier beta.
CertifiedDecision set_at_beta(const UtilityMatrix& u, const Forecast& f, double beta);
CertifiedDecision set_at_beta(const UtilityMatrix& u, const CoverageMenu& menu, double beta);

/// Whether y belongs to the dual-selected set for beta, without materializing it.
inline bool in_set_at_beta(const UtilityMatrix& u, const CoverageMenu& menu, double beta, LabelIndex y) {
  const MenuEntry& e = g_select(menu, beta);
  return u(e.action, y) >= e.value;
}

}  // namespace rac
