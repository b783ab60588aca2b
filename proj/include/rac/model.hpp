#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "rac/errors.hpp"
#include "rac/label_set.hpp"

namespace rac {

/// Default forecast smoothing weight applied when forecasts are loaded.
inline constexpr double kDefaultEpsilon = 1e-6;

/// Finite action x label utility table u(a, y).
///
/// Entries used by every computation are nonnegative. A table declared with
/// negative entries is stored shifted by a constant; `declared()` keeps the
/// values exactly as given and `unshift()` maps computed utilities back to the
/// declared scale. Shifting leaves every argmax/argmin over actions unchanged.
class UtilityMatrix {
 public:
  /// Rows are per action, columns per label. Throws ValidationError on empty
  /// dimensions, ragged rows, duplicate names, or non-finite/negative entries.
  UtilityMatrix(std::vector<std::string> actions, std::vector<std::string> labels,
                std::vector<std::vector<double>> rows);

  /// Like the constructor, but a table whose minimum entry is negative is
  /// shifted by -(min entry) instead of rejected.
  static UtilityMatrix with_auto_shift(std::vector<std::string> actions,
                                       std::vector<std::string> labels,
                                       std::vector<std::vector<double>> rows);

  /// Identity utilities: action i scores 1 on label i and 0 elsewhere.
  static UtilityMatrix identity(std::size_t k);

  std::size_t num_actions() const { return actions_.size(); }
  std::size_t num_labels() const { return labels_.size(); }

  double operator()(ActionIndex a, LabelIndex y) const { return u_[a * labels_.size() + y]; }
  std::span<const double> row(ActionIndex a) const {
    return {u_.data() + a * labels_.size(), labels_.size()};
  }

  /// Entry on the declared (unshifted) scale, bit-exact as constructed.
  double declared(ActionIndex a, LabelIndex y) const { return declared_[a * labels_.size() + y]; }
  double u_max() const { return u_max_; }
  double u_min() const { return u_min_; }
  double shift() const { return shift_; }
  double unshift(double v) const { return v - shift_; }

  const std::vector<std::string>& action_names() const { return actions_; }
  const std::vector<std::string>& label_names() const { return labels_; }
  std::optional<ActionIndex> find_action(std::string_view name) const;
  std::optional<LabelIndex> find_label(std::string_view name) const;

  friend UtilityMatrix shift_utilities(const UtilityMatrix& u, double c);

 private:
  UtilityMatrix() = default;
  void recompute_extrema();

  std::vector<std::string> actions_;
  std::vector<std::string> labels_;
  std::vector<double> declared_;
  std::vector<double> u_;
  double shift_ = 0.0;
  double u_max_ = 0.0;
  double u_min_ = 0.0;
};

/// Adds c to every entry. The shift is recorded so reports can undo it.
/// Throws ValidationError when any shifted entry is negative.
UtilityMatrix shift_utilities(const UtilityMatrix& u, double c);

/// Probability vector over labels.
class Forecast {
 public:
  /// Throws ValidationError unless every entry is in [0, 1] and the entries
  /// sum to 1 within 1e-9.
  explicit Forecast(std::vector<double> p, bool smoothed = false);

  static Forecast point_mass(std::size_t k, LabelIndex y);

  std::size_t size() const { return p_.size(); }
  double operator[](LabelIndex y) const { return p_[y]; }
  std::span<const double> probs() const { return p_; }
  bool smoothed() const { return smoothed_; }
  bool in_support(LabelIndex y) const { return p_[y] > 0.0; }

  /// Forecast mass of a label set, summed in label order. A set containing
  /// every positive-mass label has mass exactly 1.
  double mass(const LabelSet& set) const;

  friend bool operator==(const Forecast&, const Forecast&) = default;

 private:
  std::vector<double> p_;
  bool smoothed_ = false;
};

/// (1 - eps) * normalize(p) + eps * uniform, renormalized. Rejects negative
/// entries, zero-sum vectors, sums farther than 1e-6 from 1, and eps outside
/// [0, 1).
Forecast smooth_forecast(std::span<const double> p, double eps);

struct LabeledSample {
  Forecast forecast;
  LabelIndex label;
};

/// Ordered (forecast, label) rows sharing one label count.
class Dataset {
 public:
  Dataset() = default;
  explicit Dataset(std::size_t num_labels) : num_labels_(num_labels) {}
  Dataset(std::size_t num_labels, std::vector<LabeledSample> samples);

  void push_back(LabeledSample s);

  std::size_t size() const { return samples_.size(); }
  bool empty() const { return samples_.empty(); }
  std::size_t num_labels() const { return num_labels_; }
  const LabeledSample& operator[](std::size_t i) const { return samples_[i]; }
  std::span<const LabeledSample> samples() const { return samples_; }
  auto begin() const { return samples_.begin(); }
  auto end() const { return samples_.end(); }

  std::vector<Forecast> forecasts() const;
  std::vector<LabelIndex> labels() const;

 private:
  std::size_t num_labels_ = 0;
  std::vector<LabeledSample> samples_;
};

}  // namespace rac
