#include <algorithm>
#include <cmath>

#include "doctest.h"
#include "gen.hpp"
#include "rac/errors.hpp"
#include "rac/harness.hpp"
#include "rac/population.hpp"

using namespace rac;

namespace {

FinitePopulation one_atom(std::vector<double> q) { return FinitePopulation({{1.0, Forecast(std::move(q))}}); }

double full_set_value(const UtilityMatrix& u) {
  double best = 0.0;
  for (ActionIndex a = 0; a < u.num_actions(); ++a)
    best = std::max(best, *std::min_element(u.row(a).begin(), u.row(a).end()));
  return best;
}

}  // namespace

TEST_CASE("solve_population: single atom, identity 2x2, alpha 0.3") {
  const auto sol = solve_population(one_atom({0.7, 0.3}), UtilityMatrix::identity(2), 0.3);
  CHECK(sol.beta == 0.0);
  REQUIRE(sol.atoms.size() == 1);
  CHECK(sol.atoms[0].entry == MenuEntry{0.7, 1.0, 0});
  CHECK(sol.achieved_coverage == doctest::Approx(0.7));
  CHECK(sol.objective == 1.0);
  CHECK(sol.coverage_slack >= -kCoverageTolerance);
}

TEST_CASE("solve_population rejects alpha outside (0, 1)") {
  const auto pop = one_atom({0.7, 0.3});
  CHECK_THROWS_AS(solve_population(pop, UtilityMatrix::identity(2), 0.0), ValidationError);
  CHECK_THROWS_AS(solve_population(pop, UtilityMatrix::identity(2), 1.0), ValidationError);
  CHECK_THROWS_AS(solve_population(pop, UtilityMatrix::identity(3), 0.1), ValidationError);
}

TEST_CASE("solve_population: a point-mass atom gets its singleton") {
  gen::Rng rng(61);
  for (int trial = 0; trial < 50; ++trial) {
    const auto u = gen::utility(rng, gen::pick(rng, 1, 4), 4);
    const LabelIndex j = gen::pick(rng, 0, 3);
    const auto sol = solve_population(FinitePopulation({{1.0, Forecast::point_mass(4, j)}}), u, 0.05 + 0.9 * gen::unit(rng));
    double best = 0.0;
    for (ActionIndex a = 0; a < u.num_actions(); ++a) best = std::max(best, u(a, j));
    CHECK(sol.objective == best);
    CHECK(sol.atoms[0].set.contains(j));
    CHECK(sol.atoms[0].coverage == 1.0);
  }
}

TEST_CASE("brute_force_population examples") {
  const auto u = UtilityMatrix::identity(2);
  auto r = brute_force_population(one_atom({0.7, 0.3}), u, 0.3);
  CHECK(r.cpo_opt == 1.0);
  CHECK(r.dpo_opt == 1.0);
  CHECK(r.equivalent);

  const FinitePopulation two({{0.5, Forecast::point_mass(2, 0)}, {0.5, Forecast::point_mass(2, 1)}});
  r = brute_force_population(two, u, 0.0);
  CHECK(r.cpo_opt == 1.0);
  CHECK(r.dpo_opt == 1.0);
  CHECK(r.cpo_sets[0].contains(0));
  CHECK(r.cpo_sets[1].contains(1));
}

TEST_CASE("brute_force_population: full coverage forces full sets") {
  gen::Rng rng(62);
  for (int trial = 0; trial < 30; ++trial) {
    const std::size_t k = gen::pick(rng, 2, 3);
    const auto u = gen::utility(rng, gen::pick(rng, 1, 3), k);
    std::vector<PopulationAtom> atoms;
    for (int i = 0; i < 2; ++i) atoms.push_back({0.5, smooth_forecast(gen::probs(rng, k), 0.1)});
    const auto r = brute_force_population(FinitePopulation(atoms), u, 0.0);
    CHECK(r.cpo_opt == doctest::Approx(full_set_value(u)).epsilon(1e-12));
    CHECK(r.equivalent);
  }
}

TEST_CASE("brute_force_population limits") {
  std::vector<PopulationAtom> atoms(6, {1.0 / 6.0, Forecast::point_mass(2, 0)});
  CHECK_THROWS_AS(brute_force_population(FinitePopulation(atoms), UtilityMatrix::identity(2), 0.1), ValidationError);
  CHECK_THROWS_AS(brute_force_population(FinitePopulation({{1.0, Forecast::point_mass(5, 0)}}),
                                         UtilityMatrix::identity(5), 0.1),
                  ValidationError);
}

TEST_CASE("best_subset_at_coverage examples") {
  const auto u = UtilityMatrix::identity(2);
  const Forecast q(std::vector<double>{0.7, 0.3});
  auto r = best_subset_at_coverage(u, q, 0.6);
  CHECK(r.feasible);
  CHECK(r.value == 1.0);
  CHECK(r.subset.members() == std::vector<LabelIndex>{0});
  r = best_subset_at_coverage(u, q, 1.0);
  CHECK(r.value == 0.0);
  CHECK(r.subset.count() == 2);
  gen::Rng rng(63);
  const auto t1 = gen::utility(rng, 3, 4);
  CHECK(best_subset_at_coverage(t1, gen::forecast(rng, 4), 0.0).value == t1.u_max());
  // With zero-mass labels the support alone is enough at t = 1.
  const UtilityMatrix z({"a", "b"}, {"y0", "y1", "y2"}, {{4, 4, 0}, {1, 1, 9}});
  r = best_subset_at_coverage(z, Forecast(std::vector<double>{0.5, 0.5, 0.0}), 1.0);
  CHECK(r.value == 4.0);
}

TEST_CASE("property: set and policy optima agree and the dual sandwich holds on small random populations") {
  gen::Rng rng(64);
  for (int trial = 0; trial < 120; ++trial) {
    const std::size_t atoms = gen::pick(rng, 1, 3), k = gen::pick(rng, 2, 3), m = gen::pick(rng, 1, 3);
    const auto u = trial % 2 ? gen::utility(rng, m, k, 5) : gen::real_utility(rng, m, k);
    const auto pop = gen::population(rng, atoms, k);
    const double alpha = trial % 3 == 0 ? 0.1 : 0.3;
    const auto bf = brute_force_population(pop, u, alpha, trial % 2 ? Execution::parallel : Execution::serial);
    CHECK(bf.equivalent);
    CHECK(std::abs(bf.cpo_opt - bf.dpo_opt) <= 1e-12);
    const auto sol = solve_population(pop, u, alpha);
    CHECK(sol.objective <= bf.cpo_opt + 1e-12);
    CHECK(bf.cpo_opt <= sol.dual_bound + 1e-12 * (1.0 + sol.beta));
    CHECK(sol.achieved_coverage >= 1.0 - alpha - kCoverageTolerance);
    CHECK(sol.duality_gap >= -1e-12);
  }
}

TEST_CASE("serial and parallel brute force agree exactly") {
  gen::Rng rng(65);
  for (int trial = 0; trial < 20; ++trial) {
    const auto u = gen::utility(rng, 3, 3);
    const auto pop = gen::population(rng, 3, 3);
    const auto a = brute_force_population(pop, u, 0.2, Execution::serial);
    const auto b = brute_force_population(pop, u, 0.2, Execution::parallel);
    CHECK(a.cpo_opt == b.cpo_opt);
    CHECK(a.dpo_opt == b.dpo_opt);
    CHECK(a.cpo_sets == b.cpo_sets);
    CHECK(a.dpo_policy == b.dpo_policy);
  }
}

TEST_CASE("refine_population splits weights evenly and is seeded") {
  gen::Rng rng(66);
  const auto pop = gen::population(rng, 3, 4);
  const auto a = refine_population(pop, 10, 50.0, 9);
  const auto b = refine_population(pop, 10, 50.0, 9);
  REQUIRE(a.size() == 30);
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].weight == pop[i / 10].weight / 10.0);
    CHECK(a[i].conditional == b[i].conditional);
  }
  CHECK_THROWS_AS(refine_population(pop, 0, 50.0, 1), ValidationError);
  CHECK_THROWS_AS(refine_population(pop, 2, 0.0, 1), ValidationError);
}

TEST_CASE("random_population has equal weights and valid conditionals") {
  const auto pop = random_population(4, 25, 0.5, 3);
  CHECK(pop.size() == 25);
  CHECK(pop.num_labels() == 4);
  for (const auto& a : pop) CHECK(a.weight == 1.0 / 25.0);
}
