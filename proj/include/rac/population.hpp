#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "rac/decision.hpp"
#include "rac/menu.hpp"
#include "rac/model.hpp"
#include "rac/parallel.hpp"

namespace rac {

/// Slack on the marginal coverage constraint used by the population solvers,
/// absorbing rounding in weighted sums of probabilities.
inline constexpr double kCoverageTolerance = 1e-12;

struct PopulationAtom {
  double weight;
  Forecast conditional;
};

/// Finite covariate distribution: atom weights p(x) and conditionals p(y|x).
class FinitePopulation {
 public:
  /// Throws ValidationError unless weights are positive, sum to 1 within
  /// 1e-9, and all conditionals share one label count.
  explicit FinitePopulation(std::vector<PopulationAtom> atoms);

  std::size_t size() const { return atoms_.size(); }
  std::size_t num_labels() const { return atoms_.front().conditional.size(); }
  const PopulationAtom& operator[](std::size_t i) const { return atoms_[i]; }
  auto begin() const { return atoms_.begin(); }
  auto end() const { return atoms_.end(); }

 private:
  std::vector<PopulationAtom> atoms_;
};

struct AtomAssignment {
  MenuEntry entry;     // g_select at beta*
  PredictionSet set;   // level set of the entry
  double certificate;  // max-min value of the set
  double coverage;     // conditional mass of the set
};

struct PopulationSolution {
  double beta = 0.0;
  std::vector<AtomAssignment> atoms;
  double objective = 0.0;           // sum_i w_i * certificate_i
  double achieved_coverage = 0.0;   // sum_i w_i * coverage_i
  double coverage_slack = 0.0;      // achieved_coverage - (1 - alpha)
  double dual_bound = 0.0;          // Lagrangian upper bound at beta*
  double duality_gap = 0.0;         // dual_bound - objective
};

/// Dual construction: the smallest candidate beta whose selected coverages
/// reach 1 - alpha on average, the per-atom sets it selects, and the
/// Lagrangian bound sum_i w_i (v_i + beta s_i) - beta (1 - alpha).
/// Throws ValidationError unless 0 < alpha < 1 and labels match.
PopulationSolution solve_population(const FinitePopulation& pop, const UtilityMatrix& u, double alpha);

struct BruteForceResult {
  double cpo_opt = 0.0;
  double dpo_opt = 0.0;
  std::vector<PredictionSet> cpo_sets;
  std::vector<std::pair<ActionIndex, double>> dpo_policy;  // per atom (action, certified level)
  bool equivalent = false;                                 // |cpo_opt - dpo_opt| <= 1e-12
};

/// Limits on the exhaustive search.
inline constexpr std::size_t kBruteForceMaxAtoms = 5;
inline constexpr std::size_t kBruteForceMaxLabels = 4;

/// Exhaustive optima of the set-valued program (every subset per atom) and
/// the policy program (every action and attainable certificate level per
/// atom) under the marginal coverage constraint. alpha may be 0 here.
/// Throws ValidationError when the instance exceeds the limits above.
BruteForceResult brute_force_population(const FinitePopulation& pop, const UtilityMatrix& u, double alpha,
                                        Execution exec = Execution::parallel);

struct SubsetOptimum {
  bool feasible = false;
  double value = 0.0;
  PredictionSet subset;
};

/// Best max-min value over all nonempty subsets with conditional mass >= t,
/// by scanning all 2^K subsets. Mass is summed in label order and is exactly
/// 1 for a subset holding the whole support; the comparison is exact.
SubsetOptimum best_subset_at_coverage(const UtilityMatrix& u, const Forecast& q, double t);

/// Splits every atom into `copies` equal-weight atoms whose conditionals are
/// Dirichlet(concentration * q) draws around the original.
FinitePopulation refine_population(const FinitePopulation& pop, std::size_t copies, double concentration,
                                   std::uint64_t seed);

}  // namespace rac
