// Naive calibration kept as a test oracle for the step-function path.

#include <limits>

#include "calibrator_internal.hpp"
#include "rac/calibrator.hpp"

namespace rac::reference {

MembershipMatrix membership_matrix(const Dataset& calib, const UtilityMatrix& u, std::span<const double> candidates) {
  MembershipMatrix m;
  m.candidates.assign(candidates.begin(), candidates.end());
  std::vector<CoverageMenu> menus;
  menus.reserve(calib.size());
  for (const auto& s : calib) menus.push_back(build_menu(u, s.forecast));
  m.covered.assign(candidates.size(), std::vector<bool>(calib.size(), false));
  m.counts.assign(candidates.size(), 0);
  for (std::size_t c = 0; c < candidates.size(); ++c)
    for (std::size_t i = 0; i < calib.size(); ++i) {
      const bool in = set_at_beta(u, menus[i], candidates[c]).set.contains(calib[i].label);
      m.covered[c][i] = in;
      m.counts[c] += in ? 1 : 0;
    }
  return m;
}

BetaCalibration calibrate(const Dataset& calib, const Forecast& test, const UtilityMatrix& u, const RacConfig& cfg) {
  const auto cands = detail::candidates_with_mode(calib, test, u, cfg);
  const auto m = membership_matrix(calib, u, cands.betas);
  const CoverageMenu test_menu = build_menu(u, test);
  const std::size_t required = required_count(calib.size(), cfg.alpha);
  const double inf = std::numeric_limits<double>::infinity();

  BetaCalibration out;
  out.mode = cands.mode;
  out.candidate_count = cands.betas.size();
  out.beta.assign(u.num_labels(), inf);
  for (LabelIndex y = 0; y < u.num_labels(); ++y) {
    for (std::size_t c = 0; c < cands.betas.size(); ++c) {
      std::size_t total = m.counts[c];
      if (cfg.variant == RacVariant::full) total += set_at_beta(u, test_menu, cands.betas[c]).set.contains(y) ? 1 : 0;
      if (total >= required) {
        out.beta[y] = cands.betas[c];
        break;
      }
    }
    if (cfg.variant == RacVariant::full && out.beta[y] == inf)
      throw InfeasibleError("no candidate beta meets the coverage constraint");
  }
  return out;
}

RacPrediction predict(const Dataset& calib, const Forecast& test, const UtilityMatrix& u, const RacConfig& cfg) {
  RacPrediction out;
  out.calibration = calibrate(calib, test, u, cfg);
  const CoverageMenu test_menu = build_menu(u, test);
  PredictionSet set(u.num_labels());
  for (LabelIndex y = 0; y < u.num_labels(); ++y)
    if (set_at_beta(u, test_menu, out.calibration.beta[y]).set.contains(y)) set.insert(y);
  out.decision = certify(u, std::move(set));
  return out;
}

}  // namespace rac::reference
