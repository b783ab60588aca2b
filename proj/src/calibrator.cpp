#include "rac/calibrator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "calibrator_internal.hpp"

namespace rac {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Index of the constancy piece containing beta.
std::size_t piece_of(std::span<const double> starts, double beta) {
  auto it = std::upper_bound(starts.begin(), starts.end(), beta);
  return static_cast<std::size_t>(it - starts.begin()) - 1;
}

[[noreturn]] void throw_infeasible(LabelIndex y) {
  throw InfeasibleError("no candidate beta meets the coverage constraint for label " + std::to_string(y) +
                        "; a calibration label probably has zero forecast mass (use a positive --epsilon)");
}

}  // namespace

void RacConfig::validate() const {
  if (!(alpha > 0.0 && alpha < 1.0)) throw ValidationError("alpha must lie in (0, 1)");
  if (grid_points < 2) throw ValidationError("grid needs at least 2 points");
  if (candidate_cap == 0) throw ValidationError("candidate cap must be positive");
}

std::size_t required_count(std::size_t n, double alpha) {
  // The small slack absorbs rounding in (n + 1)(1 - alpha) at exact integers.
  const double target = static_cast<double>(n + 1) * (1.0 - alpha);
  const double r = std::ceil(target - 1e-9);
  return r <= 0.0 ? 0 : static_cast<std::size_t>(r);
}

std::vector<double> grid_betas(double lo, double hi, std::size_t points) {
  std::vector<double> out{0.0};
  if (points < 2 || !(hi > 0.0)) return out;
  if (!(lo > 0.0) || lo > hi) lo = hi;
  const std::size_t m = points - 1;
  if (m == 1 || lo == hi) {
    out.push_back(hi);
    return out;
  }
  const double log_lo = std::log(lo);
  const double step = (std::log(hi) - log_lo) / static_cast<double>(m - 1);
  for (std::size_t k = 0; k + 1 < m; ++k) out.push_back(std::exp(log_lo + step * static_cast<double>(k)));
  out.push_back(hi);
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

namespace detail {

MenuSchedule schedule_of(const CoverageMenu& menu) {
  MenuSchedule s;
  s.breakpoints = beta_breakpoints(menu);
  s.points = constancy_points(s.breakpoints);
  s.selected.reserve(s.points.size());
  for (double p : s.points) s.selected.push_back(g_select_index(menu, p));
  return s;
}

void BreakpointRange::absorb(std::span<const double> bps) {
  for (double b : bps) {
    if (b > 0.0) {
      min_positive = any_positive ? std::min(min_positive, b) : b;
      any_positive = true;
    }
    max = any ? std::max(max, b) : b;
    any = true;
  }
}

CandidateList exact_or_grid(std::vector<double> exact, const BreakpointRange& range, const RacConfig& cfg) {
  if (cfg.beta_mode == BetaMode::exact && exact.size() <= cfg.candidate_cap) return {std::move(exact), BetaMode::exact};
  const double hi = range.any ? range.max : 0.0;
  const double lo = range.any_positive ? range.min_positive : hi;
  return {grid_betas(lo, hi, cfg.grid_points), BetaMode::grid};
}

}  // namespace detail

std::vector<double> candidate_betas(const Dataset& calib, const Forecast& test, const UtilityMatrix& u,
                                    const RacConfig& cfg) {
  return detail::candidates_with_mode(calib, test, u, cfg).betas;
}

namespace detail {

CandidateList candidates_with_mode(const Dataset& calib, const Forecast& test, const UtilityMatrix& u,
                                   const RacConfig& cfg) {
  cfg.validate();
  if (calib.empty()) throw ValidationError("calibration set is empty");
  std::vector<double> all;
  BreakpointRange range;
  auto add = [&](const Forecast& f) {
    const auto bps = beta_breakpoints(build_menu(u, f));
    range.absorb(bps);
    const auto pts = constancy_points(bps);
    all.insert(all.end(), pts.begin(), pts.end());
  };
  for (const auto& s : calib) add(s.forecast);
  add(test);
  std::sort(all.begin(), all.end());
  all.erase(std::unique(all.begin(), all.end()), all.end());
  return exact_or_grid(std::move(all), range, cfg);
}

}  // namespace detail

RacCalibrator::RacCalibrator(const UtilityMatrix& u, const Dataset& calib, RacConfig cfg, Execution exec)
    : u_(u), cfg_(cfg) {
  cfg_.validate();
  if (calib.empty()) throw ValidationError("calibration set is empty");
  if (calib.num_labels() != u_.num_labels()) throw ValidationError("calibration labels do not match utility table");
  n_ = calib.size();
  required_ = required_count(n_, cfg_.alpha);

  struct RowPieces {
    std::vector<double> points;
    std::vector<char> covered;
    std::vector<double> breakpoints;
  };
  std::vector<RowPieces> rows(n_);
  for_each_index(n_, exec, [&](std::size_t i) {
    const auto& s = calib[i];
    const CoverageMenu menu = build_menu(u_, s.forecast);
    auto sched = detail::schedule_of(menu);
    RowPieces& r = rows[i];
    r.covered.reserve(sched.points.size());
    for (std::size_t idx : sched.selected) {
      const MenuEntry& e = menu[idx];
      r.covered.push_back(u_(e.action, s.label) >= e.value ? 1 : 0);
    }
    r.points = std::move(sched.points);
    r.breakpoints = std::move(sched.breakpoints);
  });

  detail::BreakpointRange range;
  std::size_t total = 0;
  for (const auto& r : rows) total += r.points.size();
  points_.reserve(total);
  for (const auto& r : rows) {
    points_.insert(points_.end(), r.points.begin(), r.points.end());
    range.absorb(r.breakpoints);
  }
  std::sort(points_.begin(), points_.end());
  points_.erase(std::unique(points_.begin(), points_.end()), points_.end());
  has_breakpoints_ = range.any;
  max_breakpoint_ = range.any ? range.max : 0.0;
  min_positive_breakpoint_ = range.any_positive ? range.min_positive : max_breakpoint_;

  // Difference array over the merged pieces.
  const std::size_t g = points_.size();
  std::vector<std::ptrdiff_t> diff(g + 1, 0);
  for (const auto& r : rows) {
    for (std::size_t k = 0; k < r.points.size(); ++k) {
      if (!r.covered[k]) continue;
      const auto lo = static_cast<std::size_t>(std::lower_bound(points_.begin(), points_.end(), r.points[k]) - points_.begin());
      const std::size_t hi =
          k + 1 < r.points.size()
              ? static_cast<std::size_t>(std::lower_bound(points_.begin(), points_.end(), r.points[k + 1]) - points_.begin())
              : g;
      ++diff[lo];
      --diff[hi];
    }
  }
  counts_.resize(g);
  std::ptrdiff_t running = 0;
  for (std::size_t j = 0; j < g; ++j) {
    running += diff[j];
    counts_[j] = static_cast<std::size_t>(running);
  }

  first_relaxed_.assign(g + 1, g);
  for (std::size_t j = g; j-- > 0;) first_relaxed_[j] = counts_[j] + 1 >= required_ ? j : first_relaxed_[j + 1];
  first_strict_ = g;
  for (std::size_t j = 0; j < g; ++j)
    if (counts_[j] >= required_) {
      first_strict_ = j;
      break;
    }
}

std::size_t RacCalibrator::calibration_count(double beta) const {
  if (!(beta >= 0.0)) throw ValidationError("beta must be nonnegative");
  return counts_[piece_of(points_, beta)];
}

RacCalibrator::TestSchedule RacCalibrator::schedule_for(const Forecast& test) const {
  if (test.size() != u_.num_labels()) throw ValidationError("test forecast labels do not match utility table");
  const CoverageMenu menu = build_menu(u_, test);
  auto sched = detail::schedule_of(menu);
  TestSchedule ts;
  ts.starts = std::move(sched.points);
  ts.breakpoints = std::move(sched.breakpoints);
  ts.entries.reserve(sched.selected.size());
  for (std::size_t idx : sched.selected) ts.entries.push_back(menu[idx]);
  return ts;
}

std::size_t RacCalibrator::exact_candidate_count(const TestSchedule& ts) const {
  std::size_t extra = 0;
  for (double p : ts.starts)
    if (!std::binary_search(points_.begin(), points_.end(), p)) ++extra;
  return points_.size() + extra;
}

BetaCalibration RacCalibrator::calibrate(const Forecast& test) const {
  auto out = calibrate_schedule(schedule_for(test));
  require_feasible(out);
  return out;
}

double RacCalibrator::label_beta(const Forecast& test, LabelIndex y) const {
  if (y >= u_.num_labels()) throw ValidationError("label index out of range");
  const double b = calibrate_schedule(schedule_for(test)).beta[y];
  if (b == kInf && cfg_.variant == RacVariant::full) throw_infeasible(y);
  return b;
}

void RacCalibrator::require_feasible(const BetaCalibration& c) const {
  if (cfg_.variant != RacVariant::full) return;
  for (LabelIndex y = 0; y < c.beta.size(); ++y)
    if (c.beta[y] == kInf) throw_infeasible(y);
}

BetaCalibration RacCalibrator::calibrate_schedule(const TestSchedule& ts) const {
  if (cfg_.beta_mode == BetaMode::exact) {
    const std::size_t count = exact_candidate_count(ts);
    if (count <= cfg_.candidate_cap) {
      BetaCalibration c = calibrate_exact(ts);
      c.candidate_count = count;
      return c;
    }
  }
  return calibrate_grid(ts);
}

BetaCalibration RacCalibrator::calibrate_exact(const TestSchedule& ts) const {
  const std::size_t k = u_.num_labels();
  const std::size_t g = points_.size();
  BetaCalibration out;
  out.mode = BetaMode::exact;
  const double strict_beta = first_strict_ < g ? points_[first_strict_] : kInf;

  if (cfg_.variant == RacVariant::split) {
    out.beta.assign(k, strict_beta);
    return out;
  }

  out.beta.resize(k);
  for (LabelIndex y = 0; y < k; ++y) {
    double best = strict_beta;
    for (std::size_t p = 0; p < ts.starts.size(); ++p) {
      const double lo = ts.starts[p];
      if (lo >= best) break;
      const MenuEntry& e = ts.entries[p];
      if (!(u_(e.action, y) >= e.value)) continue;
      const double hi = p + 1 < ts.starts.size() ? ts.starts[p + 1] : kInf;
      const std::size_t j = piece_of(points_, lo);
      double found = kInf;
      if (counts_[j] + 1 >= required_) {
        found = lo;
      } else {
        const std::size_t j2 = first_relaxed_[j + 1];
        if (j2 < g && points_[j2] < hi) found = points_[j2];
      }
      if (found < kInf) {
        best = std::min(best, found);
        break;
      }
    }
    out.beta[y] = best;
  }
  return out;
}

BetaCalibration RacCalibrator::calibrate_grid(const TestSchedule& ts) const {
  detail::BreakpointRange range;
  if (has_breakpoints_) {
    range.any = true;
    range.max = max_breakpoint_;
    if (min_positive_breakpoint_ > 0.0) {
      range.any_positive = true;
      range.min_positive = min_positive_breakpoint_;
    }
  }
  range.absorb(ts.breakpoints);
  const double hi = range.any ? range.max : 0.0;
  const double lo = range.any_positive ? range.min_positive : hi;
  const auto grid = grid_betas(lo, hi, cfg_.grid_points);

  const std::size_t k = u_.num_labels();
  BetaCalibration out;
  out.mode = BetaMode::grid;
  out.candidate_count = grid.size();
  out.beta.assign(k, kInf);

  std::vector<std::size_t> cc(grid.size());
  std::vector<const MenuEntry*> sel(grid.size());
  for (std::size_t c = 0; c < grid.size(); ++c) {
    cc[c] = counts_[piece_of(points_, grid[c])];
    sel[c] = &ts.entries[piece_of(ts.starts, grid[c])];
  }
  if (cfg_.variant == RacVariant::split) {
    for (std::size_t c = 0; c < grid.size(); ++c)
      if (cc[c] >= required_) {
        out.beta.assign(k, grid[c]);
        break;
      }
    return out;
  }
  for (LabelIndex y = 0; y < k; ++y) {
    for (std::size_t c = 0; c < grid.size(); ++c) {
      const bool in = u_(sel[c]->action, y) >= sel[c]->value;
      if (cc[c] + (in ? 1 : 0) >= required_) {
        out.beta[y] = grid[c];
        break;
      }
    }
  }
  return out;
}

RacPrediction RacCalibrator::predict(const Forecast& test) const {
  const TestSchedule ts = schedule_for(test);
  RacPrediction out;
  out.calibration = calibrate_schedule(ts);
  require_feasible(out.calibration);
  PredictionSet set(u_.num_labels());
  for (LabelIndex y = 0; y < u_.num_labels(); ++y) {
    const MenuEntry& e = ts.entries[piece_of(ts.starts, out.calibration.beta[y])];
    if (u_(e.action, y) >= e.value) set.insert(y);
  }
  out.decision = certify(u_, std::move(set));
  return out;
}

double rac_label_beta(const Dataset& calib, const Forecast& test, LabelIndex y, const UtilityMatrix& u,
                      const RacConfig& cfg) {
  if (y >= u.num_labels()) throw ValidationError("label index out of range");
  return RacCalibrator(u, calib, cfg, Execution::serial).label_beta(test, y);
}

CertifiedDecision rac_predict(const Dataset& calib, const Forecast& test, const UtilityMatrix& u,
                              const RacConfig& cfg) {
  return RacCalibrator(u, calib, cfg, Execution::serial).predict(test).decision;
}

std::vector<RacPrediction> rac_batch(const RacCalibrator& calibrator, std::span<const Forecast> tests,
                                     Execution exec) {
  std::vector<RacPrediction> out(tests.size());
  for_each_index(tests.size(), exec, [&](std::size_t i) { out[i] = calibrator.predict(tests[i]); });
  return out;
}

std::vector<RacPrediction> rac_batch(const Dataset& calib, std::span<const Forecast> tests, const UtilityMatrix& u,
                                     const RacConfig& cfg, Execution exec) {
  const RacCalibrator calibrator(u, calib, cfg, exec);
  return rac_batch(calibrator, tests, exec);
}

}  // namespace rac
