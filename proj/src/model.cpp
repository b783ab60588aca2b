#include "rac/model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

namespace rac {

namespace {

void check_names(const std::vector<std::string>& names, const char* what) {
  if (names.empty()) throw ValidationError(std::string("utility table needs at least one ") + what);
  std::set<std::string> seen;
  for (const auto& n : names) {
    if (n.empty()) throw ValidationError(std::string("empty ") + what + " name");
    if (!seen.insert(n).second) throw ValidationError(std::string("duplicate ") + what + " name '" + n + "'");
  }
}

std::vector<double> flatten(const std::vector<std::vector<double>>& rows, std::size_t n_actions,
                            std::size_t n_labels) {
  if (rows.size() != n_actions)
    throw ValidationError("utility table has " + std::to_string(rows.size()) + " rows but " +
                          std::to_string(n_actions) + " actions");
  std::vector<double> flat;
  flat.reserve(n_actions * n_labels);
  for (std::size_t a = 0; a < rows.size(); ++a) {
    if (rows[a].size() != n_labels)
      throw ValidationError("utility row " + std::to_string(a) + " has " + std::to_string(rows[a].size()) +
                            " entries but " + std::to_string(n_labels) + " labels");
    for (double v : rows[a]) {
      if (!std::isfinite(v)) throw ValidationError("utility entries must be finite");
      flat.push_back(v);
    }
  }
  return flat;
}

}  // namespace

UtilityMatrix::UtilityMatrix(std::vector<std::string> actions, std::vector<std::string> labels,
                             std::vector<std::vector<double>> rows)
    : actions_(std::move(actions)), labels_(std::move(labels)) {
  check_names(actions_, "action");
  check_names(labels_, "label");
  declared_ = flatten(rows, actions_.size(), labels_.size());
  for (double v : declared_)
    if (v < 0.0) throw ValidationError("utility entries must be nonnegative (got " + std::to_string(v) + ")");
  u_ = declared_;
  recompute_extrema();
}

UtilityMatrix UtilityMatrix::with_auto_shift(std::vector<std::string> actions, std::vector<std::string> labels,
                                             std::vector<std::vector<double>> rows) {
  UtilityMatrix m;
  m.actions_ = std::move(actions);
  m.labels_ = std::move(labels);
  check_names(m.actions_, "action");
  check_names(m.labels_, "label");
  m.declared_ = flatten(rows, m.actions_.size(), m.labels_.size());
  const double lo = *std::min_element(m.declared_.begin(), m.declared_.end());
  m.shift_ = lo < 0.0 ? -lo : 0.0;
  m.u_ = m.declared_;
  for (double& v : m.u_) v += m.shift_;
  m.recompute_extrema();
  return m;
}

UtilityMatrix UtilityMatrix::identity(std::size_t k) {
  std::vector<std::string> actions, labels;
  std::vector<std::vector<double>> rows(k, std::vector<double>(k, 0.0));
  for (std::size_t i = 0; i < k; ++i) {
    actions.push_back("a" + std::to_string(i));
    labels.push_back("y" + std::to_string(i));
    rows[i][i] = 1.0;
  }
  return UtilityMatrix(std::move(actions), std::move(labels), std::move(rows));
}

void UtilityMatrix::recompute_extrema() {
  u_max_ = *std::max_element(u_.begin(), u_.end());
  u_min_ = *std::min_element(u_.begin(), u_.end());
}

std::optional<ActionIndex> UtilityMatrix::find_action(std::string_view name) const {
  auto it = std::find(actions_.begin(), actions_.end(), name);
  if (it == actions_.end()) return std::nullopt;
  return static_cast<ActionIndex>(it - actions_.begin());
}

std::optional<LabelIndex> UtilityMatrix::find_label(std::string_view name) const {
  auto it = std::find(labels_.begin(), labels_.end(), name);
  if (it == labels_.end()) return std::nullopt;
  return static_cast<LabelIndex>(it - labels_.begin());
}

UtilityMatrix shift_utilities(const UtilityMatrix& u, double c) {
  if (!std::isfinite(c)) throw ValidationError("utility shift must be finite");
  UtilityMatrix out = u;
  for (double& v : out.u_) {
    v += c;
    if (v < 0.0) throw ValidationError("shifted utility table still has negative entries");
  }
  out.shift_ += c;
  out.recompute_extrema();
  return out;
}

Forecast::Forecast(std::vector<double> p, bool smoothed) : p_(std::move(p)), smoothed_(smoothed) {
  if (p_.empty()) throw ValidationError("forecast must have at least one label");
  double sum = 0.0;
  for (double v : p_) {
    if (!(v >= 0.0 && v <= 1.0)) throw ValidationError("forecast entries must lie in [0, 1]");
    sum += v;
  }
  if (std::abs(sum - 1.0) > 1e-9) throw ValidationError("forecast entries must sum to 1 (got " + std::to_string(sum) + ")");
}

Forecast Forecast::point_mass(std::size_t k, LabelIndex y) {
  std::vector<double> p(k, 0.0);
  p.at(y) = 1.0;
  return Forecast(std::move(p));
}

double Forecast::mass(const LabelSet& set) const {
  double m = 0.0;
  bool covers_support = true;
  for (std::size_t y = 0; y < p_.size(); ++y) {
    if (set.contains(y))
      m += p_[y];
    else if (p_[y] > 0.0)
      covers_support = false;
  }
  return covers_support ? 1.0 : m;
}

Forecast smooth_forecast(std::span<const double> p, double eps) {
  if (!(eps >= 0.0 && eps < 1.0)) throw ValidationError("smoothing epsilon must lie in [0, 1)");
  if (p.empty()) throw ValidationError("forecast must have at least one label");
  double sum = 0.0;
  for (double v : p) {
    if (!std::isfinite(v) || v < 0.0) throw ValidationError("forecast entries must be finite and nonnegative");
    sum += v;
  }
  if (sum <= 0.0) throw ValidationError("forecast entries sum to zero");
  if (std::abs(sum - 1.0) > 1e-6)
    throw ValidationError("forecast entries must sum to 1 within 1e-6 (got " + std::to_string(sum) + ")");

  const double k = static_cast<double>(p.size());
  std::vector<double> out(p.size());
  for (std::size_t y = 0; y < p.size(); ++y) out[y] = (1.0 - eps) * (p[y] / sum) + eps / k;
  const double total = std::accumulate(out.begin(), out.end(), 0.0);
  for (double& v : out) v = std::min(1.0, v / total);
  return Forecast(std::move(out), eps > 0.0);
}

Dataset::Dataset(std::size_t num_labels, std::vector<LabeledSample> samples) : num_labels_(num_labels) {
  samples_.reserve(samples.size());
  for (auto& s : samples) push_back(std::move(s));
}

void Dataset::push_back(LabeledSample s) {
  if (s.forecast.size() != num_labels_)
    throw ValidationError("sample forecast has " + std::to_string(s.forecast.size()) + " entries, expected " +
                          std::to_string(num_labels_));
  if (s.label >= num_labels_) throw ValidationError("sample label index out of range");
  samples_.push_back(std::move(s));
}

std::vector<Forecast> Dataset::forecasts() const {
  std::vector<Forecast> out;
  out.reserve(samples_.size());
  for (const auto& s : samples_) out.push_back(s.forecast);
  return out;
}

std::vector<LabelIndex> Dataset::labels() const {
  std::vector<LabelIndex> out;
  out.reserve(samples_.size());
  for (const auto& s : samples_) out.push_back(s.label);
  return out;
}

}  // namespace rac
