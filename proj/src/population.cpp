#include "rac/population.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "rac/rng.hpp"

namespace rac {

FinitePopulation::FinitePopulation(std::vector<PopulationAtom> atoms) : atoms_(std::move(atoms)) {
  if (atoms_.empty()) throw ValidationError("population needs at least one atom");
  double total = 0.0;
  const std::size_t k = atoms_.front().conditional.size();
  for (const auto& a : atoms_) {
    if (!(a.weight > 0.0) || !std::isfinite(a.weight)) throw ValidationError("atom weights must be positive");
    if (a.conditional.size() != k) throw ValidationError("atom conditionals disagree on the label count");
    total += a.weight;
  }
  if (std::abs(total - 1.0) > 1e-9) throw ValidationError("atom weights must sum to 1");
}

PopulationSolution solve_population(const FinitePopulation& pop, const UtilityMatrix& u, double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw ValidationError("alpha must lie in (0, 1)");
  if (pop.num_labels() != u.num_labels()) throw ValidationError("population labels do not match utility table");

  std::vector<CoverageMenu> menus;
  std::vector<double> candidates;
  for (const auto& atom : pop) {
    menus.push_back(build_menu(u, atom.conditional));
    const auto pts = constancy_points(beta_breakpoints(menus.back()));
    candidates.insert(candidates.end(), pts.begin(), pts.end());
  }
  std::sort(candidates.begin(), candidates.end());
  candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());

  const double target = 1.0 - alpha;
  auto coverage_at = [&](double beta) {
    double c = 0.0;
    for (std::size_t i = 0; i < pop.size(); ++i) c += pop[i].weight * g_select(menus[i], beta).coverage;
    return c;
  };
  // The last candidate selects every atom's full-coverage entry.
  double beta = candidates.back();
  for (double b : candidates)
    if (coverage_at(b) >= target - kCoverageTolerance) {
      beta = b;
      break;
    }

  PopulationSolution sol;
  sol.beta = beta;
  double lagrangian = 0.0;
  for (std::size_t i = 0; i < pop.size(); ++i) {
    const MenuEntry& e = g_select(menus[i], beta);
    PredictionSet set = level_set(u, e.action, e.value);
    const double cert = maxmin(u, set).value;
    const double cov = pop[i].conditional.mass(set);
    sol.objective += pop[i].weight * cert;
    sol.achieved_coverage += pop[i].weight * cov;
    lagrangian += pop[i].weight * (e.value + beta * e.coverage);
    sol.atoms.push_back({e, std::move(set), cert, cov});
  }
  sol.coverage_slack = sol.achieved_coverage - target;
  sol.dual_bound = lagrangian - beta * target;
  sol.duality_gap = sol.dual_bound - sol.objective;
  return sol;
}

namespace {

// Self-contained helpers so the exhaustive oracles share no code with the
// menu construction they check.

// A subset holding every positive-mass label has mass exactly 1.
double subset_mass(const Forecast& q, std::uint32_t mask) {
  double m = 0.0;
  bool covers_support = true;
  for (std::size_t y = 0; y < q.size(); ++y) {
    if (mask & (1u << y))
      m += q[y];
    else if (q[y] > 0.0)
      covers_support = false;
  }
  return covers_support ? 1.0 : m;
}

double worst_case_value(const UtilityMatrix& u, std::uint32_t mask) {
  if (mask == 0) return u.u_max();
  double best = -std::numeric_limits<double>::infinity();
  for (ActionIndex a = 0; a < u.num_actions(); ++a) {
    double worst = std::numeric_limits<double>::infinity();
    for (std::size_t y = 0; y < u.num_labels(); ++y)
      if (mask & (1u << y)) worst = std::min(worst, u(a, y));
    best = std::max(best, worst);
  }
  return best;
}

PredictionSet mask_to_set(std::size_t k, std::uint32_t mask) {
  PredictionSet s(k);
  for (std::size_t y = 0; y < k; ++y)
    if (mask & (1u << y)) s.insert(y);
  return s;
}

struct Option {
  double coverage;
  double value;
  std::uint64_t tag;  // mask or (action, level index)
};

struct SearchResult {
  bool found = false;
  double objective = -std::numeric_limits<double>::infinity();
  std::vector<std::size_t> choice;
};

// Maximizes sum_i w_i value over one option per atom subject to
// sum_i w_i coverage >= target. Ties keep the lowest mixed-radix index.
SearchResult exhaustive_search(const FinitePopulation& pop, const std::vector<std::vector<Option>>& options,
                               double target, Execution exec) {
  const std::size_t m = pop.size();
  std::uint64_t total = 1;
  for (const auto& o : options) {
    total *= o.size();
    if (total > 200'000'000ULL) throw ValidationError("instance too large for exhaustive search");
  }
  const std::size_t chunks = static_cast<std::size_t>(std::min<std::uint64_t>(total, 256));
  std::vector<SearchResult> partial(chunks);

  for_each_index(chunks, exec, [&](std::size_t c) {
    const std::uint64_t begin = total * c / chunks;
    const std::uint64_t end = total * (c + 1) / chunks;
    std::vector<std::size_t> digit(m);
    std::uint64_t rest = begin;
    for (std::size_t i = m; i-- > 0;) {
      digit[i] = static_cast<std::size_t>(rest % options[i].size());
      rest /= options[i].size();
    }
    SearchResult& best = partial[c];
    for (std::uint64_t idx = begin; idx < end; ++idx) {
      double cov = 0.0, obj = 0.0;
      for (std::size_t i = 0; i < m; ++i) {
        const Option& o = options[i][digit[i]];
        cov += pop[i].weight * o.coverage;
        obj += pop[i].weight * o.value;
      }
      if (cov >= target - kCoverageTolerance && (!best.found || obj > best.objective)) {
        best.found = true;
        best.objective = obj;
        best.choice = digit;
      }
      for (std::size_t i = m; i-- > 0;) {
        if (++digit[i] < options[i].size()) break;
        digit[i] = 0;
      }
    }
  });

  SearchResult out;
  for (auto& p : partial)
    if (p.found && (!out.found || p.objective > out.objective)) out = std::move(p);
  return out;
}

}  // namespace

BruteForceResult brute_force_population(const FinitePopulation& pop, const UtilityMatrix& u, double alpha,
                                        Execution exec) {
  if (!(alpha >= 0.0 && alpha < 1.0)) throw ValidationError("alpha must lie in [0, 1)");
  if (pop.num_labels() != u.num_labels()) throw ValidationError("population labels do not match utility table");
  if (pop.size() > kBruteForceMaxAtoms || u.num_labels() > kBruteForceMaxLabels)
    throw ValidationError("instance too large for brute force (at most 5 atoms and 4 labels)");
  const std::size_t k = u.num_labels();
  const double target = 1.0 - alpha;

  std::vector<std::vector<Option>> cpo(pop.size()), dpo(pop.size());
  for (std::size_t i = 0; i < pop.size(); ++i) {
    const Forecast& q = pop[i].conditional;
    for (std::uint32_t mask = 0; mask < (1u << k); ++mask)
      cpo[i].push_back({subset_mass(q, mask), worst_case_value(u, mask), mask});

    for (ActionIndex a = 0; a < u.num_actions(); ++a) {
      std::vector<double> levels(u.row(a).begin(), u.row(a).end());
      levels.push_back(u.u_max());
      std::sort(levels.begin(), levels.end());
      levels.erase(std::unique(levels.begin(), levels.end()), levels.end());
      for (std::size_t l = 0; l < levels.size(); ++l) {
        double cov = 0.0;
        for (std::size_t y = 0; y < k; ++y)
          if (u(a, y) >= levels[l]) cov += q[y];
        dpo[i].push_back({cov, levels[l], (static_cast<std::uint64_t>(a) << 32) | l});
      }
    }
  }

  const auto best_cpo = exhaustive_search(pop, cpo, target, exec);
  const auto best_dpo = exhaustive_search(pop, dpo, target, exec);
  if (!best_cpo.found || !best_dpo.found) throw ValidationError("no feasible assignment (alpha too small?)");

  BruteForceResult r;
  r.cpo_opt = best_cpo.objective;
  r.dpo_opt = best_dpo.objective;
  for (std::size_t i = 0; i < pop.size(); ++i) {
    const Option& c = cpo[i][best_cpo.choice[i]];
    r.cpo_sets.push_back(mask_to_set(k, static_cast<std::uint32_t>(c.tag)));
    const Option& d = dpo[i][best_dpo.choice[i]];
    r.dpo_policy.emplace_back(static_cast<ActionIndex>(d.tag >> 32), d.value);
  }
  r.equivalent = std::abs(r.cpo_opt - r.dpo_opt) <= 1e-12;
  return r;
}

SubsetOptimum best_subset_at_coverage(const UtilityMatrix& u, const Forecast& q, double t) {
  const std::size_t k = u.num_labels();
  if (q.size() != k) throw ValidationError("forecast labels do not match utility table");
  if (k > 20) throw ValidationError("subset scan limited to 20 labels");
  SubsetOptimum best;
  for (std::uint32_t mask = 1; mask < (1u << k); ++mask) {
    if (!(subset_mass(q, mask) >= t)) continue;
    const double v = worst_case_value(u, mask);
    if (!best.feasible || v > best.value) {
      best.feasible = true;
      best.value = v;
      best.subset = mask_to_set(k, mask);
    }
  }
  return best;
}

FinitePopulation refine_population(const FinitePopulation& pop, std::size_t copies, double concentration,
                                   std::uint64_t seed) {
  if (copies == 0) throw ValidationError("refinement needs at least one copy per atom");
  if (!(concentration > 0.0)) throw ValidationError("refinement concentration must be positive");
  std::vector<PopulationAtom> atoms;
  for (std::size_t i = 0; i < pop.size(); ++i) {
    CounterRng rng(seed, i);
    const auto q = pop[i].conditional.probs();
    std::vector<double> params(q.size());
    for (std::size_t y = 0; y < q.size(); ++y) params[y] = concentration * q[y];
    for (std::size_t c = 0; c < copies; ++c)
      atoms.push_back({pop[i].weight / static_cast<double>(copies), Forecast(rng.dirichlet(params))});
  }
  return FinitePopulation(std::move(atoms));
}

}  // namespace rac
