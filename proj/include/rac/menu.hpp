#pragma once

#include <span>
#include <vector>

#include "rac/model.hpp"

namespace rac {

/// One attainable (coverage, guaranteed value, action) triple for a forecast:
/// playing `action` yields at least `value` with forecast probability
/// `coverage`, where coverage is the mass of {y : u(action, y) >= value}.
struct MenuEntry {
  double coverage;
  double value;
  ActionIndex action;

  friend bool operator==(const MenuEntry&, const MenuEntry&) = default;
};

/// Pareto frontier of menu entries: coverage strictly increasing, value
/// strictly decreasing. This is the piecewise-constant profile
/// theta(t) = max{v : entry with coverage >= t}.
class CoverageMenu {
 public:
  /// Throws ValidationError unless entries are nonempty, have coverage in
  /// [0, 1] strictly increasing and value strictly decreasing.
  explicit CoverageMenu(std::vector<MenuEntry> frontier);

  std::span<const MenuEntry> entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }
  const MenuEntry& operator[](std::size_t i) const { return entries_[i]; }
  const MenuEntry& front() const { return entries_.front(); }
  const MenuEntry& back() const { return entries_.back(); }
  auto begin() const { return entries_.begin(); }
  auto end() const { return entries_.end(); }

  friend bool operator==(const CoverageMenu&, const CoverageMenu&) = default;

 private:
  std::vector<MenuEntry> entries_;
};

/// inf{z : P(Z <= z) >= alpha} over a finite support; alpha = 0 returns the
/// smallest support value carrying positive mass.
double discrete_quantile(std::span<const double> values, std::span<const double> masses, double alpha);

/// Enumerates (level-set mass, level, action) for every action and every
/// distinct utility level of its row, then prunes to the Pareto frontier.
/// Ties on (coverage, value) keep the lowest action index.
CoverageMenu build_menu(const UtilityMatrix& u, const Forecast& f);

/// Entry maximizing value among entries with coverage >= t.
const MenuEntry& theta_at(const CoverageMenu& menu, double t);

/// Multiplier at which `hi` (larger coverage) starts to beat `lo`:
/// (lo.value - hi.value) / (hi.coverage - lo.coverage).
inline double breakpoint_slope(const MenuEntry& lo, const MenuEntry& hi) {
  return (lo.value - hi.value) / (hi.coverage - lo.coverage);
}

/// argmax over entries of value + beta * coverage; ties go to the larger
/// coverage. Throws ValidationError for negative or NaN beta.
const MenuEntry& g_select(const CoverageMenu& menu, double beta);
std::size_t g_select_index(const CoverageMenu& menu, double beta);

/// All nonnegative pairwise slopes between entries, deduplicated ascending.
/// g_select is constant on every open interval between consecutive values.
std::vector<double> beta_breakpoints(const CoverageMenu& menu);

/// A sorted list of betas such that g_select is constant on
/// [points[k], points[k+1]) for every k (and on [points.back(), inf)).
/// Built from 0, every breakpoint, and the next double above every
/// breakpoint. Input breakpoints must be sorted ascending.
std::vector<double> constancy_points(std::span<const double> sorted_breakpoints);

}  // namespace rac
