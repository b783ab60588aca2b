#pragma once

#include <cstddef>
#include <string_view>

#include "rac/decision.hpp"
#include "rac/model.hpp"

namespace rac {

enum class ScoreKind { score1, score2 };

std::string_view to_string(ScoreKind kind);

/// 1 - f(y).
double score1(const Forecast& f, LabelIndex y);

/// Total mass of labels strictly more probable than y.
double score2(const Forecast& f, LabelIndex y);

double score(ScoreKind kind, const Forecast& f, LabelIndex y);

/// Split conformal threshold: the ceil((n + 1)(1 - alpha))-th smallest
/// calibration score, or +inf when that rank exceeds n.
struct ConformalThreshold {
  double qhat;
  ScoreKind kind;
  double alpha;
  std::size_t n;
};

ConformalThreshold conformal_calibrate(const Dataset& calib, ScoreKind kind, double alpha);

/// {y : score(f, y) <= qhat}. May be empty; the max-min rule handles that.
PredictionSet conformal_set(const Forecast& f, const ConformalThreshold& thr);

/// argmax_a sum_y f(y) u(a, y), ties to the lowest action.
ActionIndex best_response(const UtilityMatrix& u, const Forecast& f);

}  // namespace rac
