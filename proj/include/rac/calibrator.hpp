#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "rac/decision.hpp"
#include "rac/menu.hpp"
#include "rac/model.hpp"
#include "rac/parallel.hpp"

namespace rac {

enum class BetaMode { exact, grid };

/// `full` hypothesizes each test label (the coverage-guaranteed procedure);
/// `split` calibrates one beta on calibration rows alone.
enum class RacVariant { full, split };

struct RacConfig {
  double alpha = 0.1;
  BetaMode beta_mode = BetaMode::exact;
  std::size_t grid_points = 1000;
  std::size_t candidate_cap = 50000;
  RacVariant variant = RacVariant::full;

  /// Throws ValidationError unless 0 < alpha < 1 and grid_points >= 2.
  void validate() const;
};

/// ceil((n + 1)(1 - alpha)): the number of covered rows out of n + 1 that
/// the calibration constraint demands.
std::size_t required_count(std::size_t n, double alpha);

/// Per-label multipliers for one test forecast.
struct BetaCalibration {
  std::vector<double> beta;
  BetaMode mode = BetaMode::exact;  // mode actually used after any cap fallback
  std::size_t candidate_count = 0;
};

struct RacPrediction {
  CertifiedDecision decision;
  BetaCalibration calibration;
};

/// {0} followed by a geometric grid from lo to hi (hi included exactly),
/// `points` values in total. Collapses to {0} when hi is not positive.
std::vector<double> grid_betas(double lo, double hi, std::size_t points);

/// Candidate multipliers for one test point. Exact mode: 0, every pairwise
/// breakpoint of the calibration and test menus, and the next double above
/// each breakpoint, so every piece of the coverage count is sampled at its
/// left end. Falls back to the grid when that list exceeds candidate_cap.
std::vector<double> candidate_betas(const Dataset& calib, const Forecast& test, const UtilityMatrix& u,
                                    const RacConfig& cfg);

/// Precomputes the calibration coverage count as a step function of beta,
/// then answers per-test-point calibration queries without revisiting the
/// calibration rows. Immutable after construction; safe to share.
class RacCalibrator {
 public:
  RacCalibrator(const UtilityMatrix& u, const Dataset& calib, RacConfig cfg,
                Execution exec = Execution::parallel);

  BetaCalibration calibrate(const Forecast& test) const;
  /// beta for one hypothesized label; throws InfeasibleError only for that label.
  double label_beta(const Forecast& test, LabelIndex y) const;
  RacPrediction predict(const Forecast& test) const;

  /// sum_i 1[Y_i in C(X_i; beta)] over the calibration rows.
  std::size_t calibration_count(double beta) const;

  std::size_t calibration_size() const { return n_; }
  const RacConfig& config() const { return cfg_; }
  const UtilityMatrix& utilities() const { return u_; }
  /// Left ends of the constancy pieces of calibration_count.
  std::span<const double> calibration_points() const { return points_; }

 private:
  struct TestSchedule {
    std::vector<double> starts;
    std::vector<MenuEntry> entries;
    std::vector<double> breakpoints;
  };
  TestSchedule schedule_for(const Forecast& test) const;
  BetaCalibration calibrate_schedule(const TestSchedule& ts) const;
  void require_feasible(const BetaCalibration& c) const;
  BetaCalibration calibrate_exact(const TestSchedule& ts) const;
  BetaCalibration calibrate_grid(const TestSchedule& ts) const;
  std::size_t exact_candidate_count(const TestSchedule& ts) const;

  UtilityMatrix u_;
  RacConfig cfg_;
  std::size_t n_ = 0;
  std::size_t required_ = 0;
  std::vector<double> points_;
  std::vector<std::size_t> counts_;
  std::vector<std::size_t> first_relaxed_;  // first index >= j whose count >= required_ - 1
  std::size_t first_strict_ = 0;            // first index whose count >= required_
  double min_positive_breakpoint_ = 0.0;
  double max_breakpoint_ = 0.0;
  bool has_breakpoints_ = false;
};

/// Smallest candidate beta meeting the (n + 1)-term coverage constraint with
/// the test point hypothesized to carry label y.
double rac_label_beta(const Dataset& calib, const Forecast& test, LabelIndex y, const UtilityMatrix& u,
                      const RacConfig& cfg);

/// C_RAC = {y : y in C(test; beta_y)} with its max-min action and certificate.
CertifiedDecision rac_predict(const Dataset& calib, const Forecast& test, const UtilityMatrix& u,
                              const RacConfig& cfg);

/// Independent per-row predictions; identical results for either execution.
std::vector<RacPrediction> rac_batch(const Dataset& calib, std::span<const Forecast> tests, const UtilityMatrix& u,
                                     const RacConfig& cfg, Execution exec = Execution::parallel);
std::vector<RacPrediction> rac_batch(const RacCalibrator& calibrator, std::span<const Forecast> tests,
                                     Execution exec = Execution::parallel);

namespace reference {

/// Candidate x calibration-row coverage indicators, built by materializing
/// every set. Quadratic; used to check the step-function path.
struct MembershipMatrix {
  std::vector<double> candidates;
  std::vector<std::vector<bool>> covered;  // [candidate][row]
  std::vector<std::size_t> counts;         // per candidate
};

MembershipMatrix membership_matrix(const Dataset& calib, const UtilityMatrix& u, std::span<const double> candidates);

/// Direct transcription of the per-label calibration over candidate_betas.
BetaCalibration calibrate(const Dataset& calib, const Forecast& test, const UtilityMatrix& u, const RacConfig& cfg);
RacPrediction predict(const Dataset& calib, const Forecast& test, const UtilityMatrix& u, const RacConfig& cfg);

}  // namespace reference

}  // namespace rac
