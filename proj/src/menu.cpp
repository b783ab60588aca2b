#include "rac/menu.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace rac {

CoverageMenu::CoverageMenu(std::vector<MenuEntry> frontier) : entries_(std::move(frontier)) {
  if (entries_.empty()) throw ValidationError("coverage menu must have at least one entry");
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    const auto& e = entries_[i];
    if (!(e.coverage >= 0.0 && e.coverage <= 1.0)) throw ValidationError("menu coverage outside [0, 1]");
    if (!std::isfinite(e.value)) throw ValidationError("menu value must be finite");
    if (i > 0) {
      const auto& p = entries_[i - 1];
      if (!(e.coverage > p.coverage)) throw ValidationError("menu coverage must be strictly increasing");
      if (!(e.value < p.value)) throw ValidationError("menu value must be strictly decreasing");
    }
  }
}

double discrete_quantile(std::span<const double> values, std::span<const double> masses, double alpha) {
  if (values.empty()) throw ValidationError("quantile of an empty support");
  if (values.size() != masses.size()) throw ValidationError("quantile values/masses length mismatch");
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw ValidationError("quantile level must lie in [0, 1]");

  std::vector<std::size_t> order(values.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });

  if (alpha == 0.0) {
    for (std::size_t i : order)
      if (masses[i] > 0.0) return values[i];
    return values[order.front()];
  }
  double cdf = 0.0;
  for (std::size_t k = 0; k < order.size(); ++k) {
    const std::size_t i = order[k];
    cdf += masses[i];
    // Accumulate the whole atom before testing.
    if (k + 1 < order.size() && values[order[k + 1]] == values[i]) continue;
    if (cdf >= alpha) return values[i];
  }
  // Only reachable through rounding when masses sum to just under 1.
  return values[order.back()];
}

CoverageMenu build_menu(const UtilityMatrix& u, const Forecast& f) {
  if (f.size() != u.num_labels())
    throw ValidationError("forecast has " + std::to_string(f.size()) + " labels, utility table has " +
                          std::to_string(u.num_labels()));
  const std::size_t k = u.num_labels();
  std::vector<MenuEntry> candidates;
  candidates.reserve(u.num_actions() * k);
  LabelSet level(k);
  for (ActionIndex a = 0; a < u.num_actions(); ++a) {
    const auto row = u.row(a);
    std::vector<double> levels(row.begin(), row.end());
    std::sort(levels.begin(), levels.end());
    levels.erase(std::unique(levels.begin(), levels.end()), levels.end());
    for (double v : levels) {
      level = LabelSet(k);
      for (LabelIndex y = 0; y < k; ++y)
        if (row[y] >= v) level.insert(y);
      candidates.push_back({f.mass(level), v, a});
    }
  }

  // Sweep from large coverage down, keeping entries that strictly raise the value.
  std::sort(candidates.begin(), candidates.end(), [](const MenuEntry& x, const MenuEntry& y) {
    if (x.coverage != y.coverage) return x.coverage > y.coverage;
    if (x.value != y.value) return x.value > y.value;
    return x.action < y.action;
  });
  std::vector<MenuEntry> frontier;
  double best = -std::numeric_limits<double>::infinity();
  for (const auto& c : candidates) {
    if (c.value > best) {
      frontier.push_back(c);
      best = c.value;
    }
  }
  std::reverse(frontier.begin(), frontier.end());
  return CoverageMenu(std::move(frontier));
}

const MenuEntry& theta_at(const CoverageMenu& menu, double t) {
  if (!(t >= 0.0 && t <= 1.0)) throw ValidationError("coverage level must lie in [0, 1]");
  for (const auto& e : menu.entries())
    if (e.coverage >= t) return e;
  // Menus from full-support forecasts end at coverage 1; fall back to the
  // most conservative entry otherwise.
  return menu.back();
}

std::size_t g_select_index(const CoverageMenu& menu, double beta) {
  if (!(beta >= 0.0)) throw ValidationError("beta must be nonnegative");
  std::size_t best = 0;
  for (std::size_t j = 1; j < menu.size(); ++j)
    if (beta >= breakpoint_slope(menu[best], menu[j])) best = j;
  return best;
}

const MenuEntry& g_select(const CoverageMenu& menu, double beta) { return menu[g_select_index(menu, beta)]; }

std::vector<double> beta_breakpoints(const CoverageMenu& menu) {
  std::vector<double> out;
  const auto e = menu.entries();
  for (std::size_t i = 0; i < e.size(); ++i)
    for (std::size_t j = i + 1; j < e.size(); ++j) {
      const double b = breakpoint_slope(e[i], e[j]);
      if (b >= 0.0) out.push_back(b);
    }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::vector<double> constancy_points(std::span<const double> sorted_breakpoints) {
  std::vector<double> out;
  out.reserve(2 * sorted_breakpoints.size() + 1);
  out.push_back(0.0);
  const double inf = std::numeric_limits<double>::infinity();
  for (double b : sorted_breakpoints) {
    out.push_back(b);
    out.push_back(std::nextafter(b, inf));
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

}  // namespace rac
