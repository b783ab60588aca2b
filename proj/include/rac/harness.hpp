#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "rac/calibrator.hpp"
#include "rac/decision.hpp"
#include "rac/io.hpp"
#include "rac/model.hpp"
#include "rac/parallel.hpp"
#include "rac/population.hpp"
#include "rac/rng.hpp"

namespace rac {

enum class Method { rac, score1, score2, best_response, external };

std::string_view to_string(Method m);
/// Accepts rac, score1, score2, best-response, external.
Method parse_method(std::string_view name);
bool method_has_sets(Method m);

/// Seeded synthetic suite drawn from a finite population.
struct SyntheticSpec {
  FinitePopulation population;
  std::optional<double> kappa;  // Dirichlet(kappa * q) forecast noise; nullopt = exact conditionals
  std::size_t n_calib = 0;
  std::size_t n_test = 0;
  std::uint64_t seed = 0;
  double epsilon = kDefaultEpsilon;

  void validate() const;
};

struct SyntheticData {
  Dataset calib;
  Dataset test;  // labels are the hidden truth
};

/// One row: atom ~ weights, label ~ q_atom, forecast = q_atom or a
/// Dirichlet(kappa q_atom) draw, then smoothed.
LabeledSample draw_sample(const SyntheticSpec& spec, CounterRng& rng);

/// Row i of the calibration/test split uses its own stream, so the result
/// depends only on the seed.
SyntheticData generate(const SyntheticSpec& spec);

/// `count` Dirichlet(concentration) conditionals with equal weights.
FinitePopulation random_population(std::size_t num_labels, std::size_t count, double concentration,
                                   std::uint64_t seed);

/// Labels whose mistakes are tracked, and the worst actions for each label.
struct CriticalSpec {
  std::vector<bool> critical;           // per label
  std::vector<std::vector<bool>> worst;  // [label][action]

  /// Worst actions default to argmin_a u(a, y), ties included.
  static CriticalSpec defaults(const UtilityMatrix& u, std::span<const LabelIndex> critical_labels);
  static CriticalSpec all_labels(const UtilityMatrix& u);
};

/// A method's output for one test row. Set-free methods leave set and
/// certificate empty.
struct MethodDecision {
  std::optional<PredictionSet> set;
  ActionIndex action = 0;
  std::optional<double> certificate;  // internal (shifted) scale
  bool empty_set = false;
};

MethodDecision from_certified(const CertifiedDecision& d);

/// Calibrates `method` on `calib` and decides every test forecast.
/// `external` supplies one set per test row for Method::external.
std::vector<MethodDecision> run_method(Method method, const UtilityMatrix& u, const Dataset& calib,
                                       std::span<const Forecast> tests, const RacConfig& cfg,
                                       Execution exec = Execution::parallel,
                                       const std::vector<PredictionSet>* external = nullptr);

/// Test-time metrics on the declared utility scale.
struct Report {
  std::string method;
  double alpha = 0.0;
  std::size_t n_test = 0;
  std::optional<double> avg_maxmin_value;       // mean certificate; set methods only
  std::optional<double> critical_mistake_rate;  // absent when no critical rows
  double avg_realized_utility = 0.0;
  std::optional<double> miscoverage;            // set methods only
  std::size_t critical_rows = 0;
  std::size_t empty_sets = 0;
  Json config = Json::object();
};

Report evaluate(std::span<const MethodDecision> decisions, std::span<const LabelIndex> truth, const UtilityMatrix& u,
                const CriticalSpec& crit, std::string method, double alpha);

Json report_json(const Report& r);

/// Per-row record from which every metric can be recomputed.
Json decision_row_json(const UtilityMatrix& u, const MethodDecision& d, std::optional<LabelIndex> truth);

struct CoverageTrial {
  bool covered = false;
  ActionIndex action = 0;
  double certificate = 0.0;  // internal scale
  double realized = 0.0;     // internal scale
  bool safety_holds = true;  // !covered or realized >= certificate
};

struct CoverageResult {
  double coverage = 0.0;
  double stderr_ = 0.0;  // binomial standard error
  std::size_t trials = 0;
  std::size_t safety_violations = 0;
  std::vector<CoverageTrial> log;
};

/// Each trial draws n_calib + 1 fresh rows from its own stream; the last is
/// the test row. Set-based methods only.
CoverageResult coverage_mc(const SyntheticSpec& spec, const UtilityMatrix& u, double alpha, std::size_t trials,
                           Method method, const RacConfig& base = {}, Execution exec = Execution::parallel);

struct SweepResult {
  std::vector<Report> rows;
  std::vector<std::vector<MethodDecision>> decisions;  // aligned with rows
};

/// One report per (alpha, method) in the order given; every method sees the
/// same calibration and test rows.
SweepResult sweep_alpha(std::span<const double> alphas, std::span<const Method> methods, const Dataset& calib,
                        const Dataset& test, const UtilityMatrix& u, const CriticalSpec& crit, const RacConfig& base,
                        Execution exec = Execution::parallel);
SweepResult sweep_alpha(std::span<const double> alphas, std::span<const Method> methods, const SyntheticSpec& spec,
                        const UtilityMatrix& u, const CriticalSpec& crit, const RacConfig& base,
                        Execution exec = Execution::parallel);

/// CSV with header alpha,method,avg_maxmin_value,critical_mistake_rate,
/// avg_realized_utility,miscoverage; omitted metrics are empty fields.
std::string sweep_csv(std::span<const Report> rows);

/// Standard deviation of bootstrap means of paired differences.
double paired_bootstrap_stderr(std::span<const double> diffs, std::size_t resamples, std::uint64_t seed);

}  // namespace rac
