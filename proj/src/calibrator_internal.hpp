#pragma once

#include <vector>

#include "rac/calibrator.hpp"

namespace rac::detail {

/// g_select on a menu evaluated at the left end of each constancy piece.
struct MenuSchedule {
  std::vector<double> breakpoints;
  std::vector<double> points;
  std::vector<std::size_t> selected;
};

MenuSchedule schedule_of(const CoverageMenu& menu);

struct BreakpointRange {
  bool any = false;
  bool any_positive = false;
  double min_positive = 0.0;
  double max = 0.0;
  void absorb(std::span<const double> bps);
};

struct CandidateList {
  std::vector<double> betas;
  BetaMode mode;
};

CandidateList exact_or_grid(std::vector<double> exact, const BreakpointRange& range, const RacConfig& cfg);
CandidateList candidates_with_mode(const Dataset& calib, const Forecast& test, const UtilityMatrix& u,
                                   const RacConfig& cfg);

}  // namespace rac::detail
