#include "rac/baselines.hpp"

#include <algorithm>
#include <limits>
#include <vector>

#include "rac/calibrator.hpp"

namespace rac {

std::string_view to_string(ScoreKind kind) { return kind == ScoreKind::score1 ? "score1" : "score2"; }

double score1(const Forecast& f, LabelIndex y) {
  if (y >= f.size()) throw ValidationError("label index out of range");
  return 1.0 - f[y];
}

double score2(const Forecast& f, LabelIndex y) {
  if (y >= f.size()) throw ValidationError("label index out of range");
  double s = 0.0;
  for (std::size_t j = 0; j < f.size(); ++j)
    if (f[j] > f[y]) s += f[j];
  return s;
}

double score(ScoreKind kind, const Forecast& f, LabelIndex y) {
  return kind == ScoreKind::score1 ? score1(f, y) : score2(f, y);
}

ConformalThreshold conformal_calibrate(const Dataset& calib, ScoreKind kind, double alpha) {
  if (calib.empty()) throw ValidationError("calibration set is empty");
  if (!(alpha > 0.0 && alpha < 1.0)) throw ValidationError("alpha must lie in (0, 1)");
  std::vector<double> scores;
  scores.reserve(calib.size());
  for (const auto& s : calib) scores.push_back(score(kind, s.forecast, s.label));
  const std::size_t rank = required_count(calib.size(), alpha);
  ConformalThreshold thr{std::numeric_limits<double>::infinity(), kind, alpha, calib.size()};
  if (rank == 0) {
    thr.qhat = -std::numeric_limits<double>::infinity();
  } else if (rank <= scores.size()) {
    std::nth_element(scores.begin(), scores.begin() + static_cast<std::ptrdiff_t>(rank - 1), scores.end());
    thr.qhat = scores[rank - 1];
  }
  return thr;
}

PredictionSet conformal_set(const Forecast& f, const ConformalThreshold& thr) {
  PredictionSet s(f.size());
  for (LabelIndex y = 0; y < f.size(); ++y)
    if (score(thr.kind, f, y) <= thr.qhat) s.insert(y);
  return s;
}

ActionIndex best_response(const UtilityMatrix& u, const Forecast& f) {
  if (f.size() != u.num_labels()) throw ValidationError("forecast labels do not match utility table");
  ActionIndex best = 0;
  double best_value = -std::numeric_limits<double>::infinity();
  for (ActionIndex a = 0; a < u.num_actions(); ++a) {
    double ev = 0.0;
    for (LabelIndex y = 0; y < f.size(); ++y) ev += f[y] * u(a, y);
    if (ev > best_value) {
      best_value = ev;
      best = a;
    }
  }
  return best;
}

}  // namespace rac
