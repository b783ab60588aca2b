#include <algorithm>
#include <cmath>

#include "doctest.h"
#include "gen.hpp"
#include "rac/decision.hpp"
#include "rac/errors.hpp"
#include "rac/io.hpp"

using namespace rac;

namespace {

const Forecast f73(std::vector<double>{0.7, 0.3});

UtilityMatrix table1() { return load_utility_file(RAC_TEST_DATA "/table1.json"); }

PredictionSet of(std::size_t k, std::initializer_list<LabelIndex> ys) {
  PredictionSet s(k);
  for (auto y : ys) s.insert(y);
  return s;
}

// Exhaustive best worst-case value over nonempty label subsets with mass >= t.
double oracle_best(const UtilityMatrix& u, const Forecast& f, double t) {
  const std::size_t k = u.num_labels();
  double best = -1.0;
  for (unsigned mask = 1; mask < (1u << k); ++mask) {
    PredictionSet s(k);
    for (std::size_t y = 0; y < k; ++y)
      if (mask & (1u << y)) s.insert(y);
    if (!(f.mass(s) >= t)) continue;
    double v = -1.0;
    for (ActionIndex a = 0; a < u.num_actions(); ++a) {
      double worst = 1e300;
      for (auto y : s.members()) worst = std::min(worst, u(a, y));
      v = std::max(v, worst);
    }
    best = std::max(best, v);
  }
  return best;
}

}  // namespace

TEST_CASE("set_at_coverage examples") {
  const auto u = UtilityMatrix::identity(2);
  auto d = set_at_coverage(u, f73, 0.6);
  CHECK(d.set == of(2, {0}));
  CHECK(d.action == 0);
  CHECK(d.value == 1.0);
  CHECK(oracle_best(u, f73, 0.6) == d.value);

  d = set_at_coverage(u, f73, 0.9);
  CHECK(d.set == of(2, {0, 1}));
  CHECK(d.value == 0.0);
  CHECK(oracle_best(u, f73, 0.9) == d.value);

  const auto t1 = table1();
  gen::Rng rng(1);
  for (int i = 0; i < 20; ++i) CHECK(set_at_coverage(t1, gen::forecast(rng, 4), 0.0).value == t1.u_max());
  CHECK_THROWS_AS(set_at_coverage(u, f73, 1.5), ValidationError);
}

TEST_CASE("set_at_beta examples") {
  const auto u = UtilityMatrix::identity(2);
  auto d = set_at_beta(u, f73, 0.5);
  CHECK(d.set == of(2, {0}));
  CHECK(d.value == 1.0);
  d = set_at_beta(u, f73, 4.0);
  CHECK(d.set == of(2, {0, 1}));
  CHECK(d.value == 0.0);
  for (LabelIndex j = 0; j < 3; ++j) {
    const auto p = set_at_beta(UtilityMatrix::identity(3), Forecast::point_mass(3, j), 0.0);
    CHECK(p.set == of(3, {j}));
    CHECK(p.value == 1.0);
    CHECK(p.action == j);
  }
  CHECK_THROWS_AS(set_at_beta(u, f73, -0.5), ValidationError);
}

TEST_CASE("maxmin examples on Table 1") {
  const auto u = table1();
  const auto normal = *u.find_label("Normal"), covid = *u.find_label("COVID-19");
  auto r = maxmin(u, of(4, {normal, covid}));
  CHECK(u.action_names()[r.action] == "Additional Testing");
  CHECK(r.value == 4.0);
  r = maxmin(u, of(4, {covid}));
  CHECK(u.action_names()[r.action] == "Quarantine");
  CHECK(r.value == 10.0);
  r = maxmin(u, PredictionSet(4));
  CHECK(r.value == u.u_max());
  CHECK(r.action == 0);
  const auto c = certify(u, PredictionSet(4));
  CHECK(c.empty_set);
  CHECK(c.value == 10.0);
}

TEST_CASE("maxmin ties go to the lowest action") {
  const UtilityMatrix u({"p", "q", "r"}, {"y0", "y1"}, {{1, 3}, {3, 1}, {2, 2}});
  CHECK(maxmin(u, of(2, {0})).action == 1);
  CHECK(maxmin(u, of(2, {0, 1})).action == 2);
  const UtilityMatrix flat({"p", "q"}, {"y0"}, {{5}, {5}});
  CHECK(maxmin(flat, of(1, {0})).action == 0);
}

TEST_CASE("sets include zero-mass labels that meet the level") {
  const UtilityMatrix u({"a", "b"}, {"y0", "y1", "y2"}, {{5, 5, 0}, {0, 1, 6}});
  const auto d = set_at_coverage(u, Forecast(std::vector<double>{1.0, 0.0, 0.0}), 1.0);
  CHECK(d.set == of(3, {0, 1}));
  CHECK(d.value == 5.0);
}

TEST_CASE("property: set_at_coverage is optimal among sets with enough mass") {
  gen::Rng rng(21);
  for (int trial = 0; trial < 800; ++trial) {
    const std::size_t m = gen::pick(rng, 1, 4), k = gen::pick(rng, 1, 5);
    const auto u = trial % 2 ? gen::utility(rng, m, k, 5) : gen::real_utility(rng, m, k);
    const auto f = trial % 3 ? gen::forecast(rng, k, true) : gen::dyadic_forecast(rng, k);
    for (int i = 0; i <= 20; ++i) {
      const double t = i / 20.0;
      const auto d = set_at_coverage(u, f, t);
      CHECK(f.mass(d.set) >= t);
      CHECK(d.value == oracle_best(u, f, t));
      CHECK(d.value >= theta_at(build_menu(u, f), t).value);
    }
  }
}

TEST_CASE("property: certificates are sound") {
  gen::Rng rng(22);
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t m = gen::pick(rng, 1, 4), k = gen::pick(rng, 1, 5);
    const auto u = gen::utility(rng, m, k);
    const auto f = gen::forecast(rng, k, true);
    const double beta = 20.0 * gen::unit(rng);
    for (const auto& d : {set_at_beta(u, f, beta), set_at_coverage(u, f, gen::unit(rng))}) {
      CHECK_FALSE(d.set.empty());
      for (auto y : d.set.members()) CHECK(u(d.action, y) >= d.value);
      CHECK(maxmin(u, d.set).value == d.value);
    }
  }
}

TEST_CASE("property: set_at_beta grows more conservative with beta") {
  gen::Rng rng(23);
  for (int trial = 0; trial < 800; ++trial) {
    const std::size_t m = gen::pick(rng, 1, 4), k = gen::pick(rng, 1, 5);
    const auto u = gen::utility(rng, m, k, 6);
    const auto f = gen::forecast(rng, k, trial % 2 == 0);
    const auto menu = build_menu(u, f);
    std::vector<double> betas;
    for (int i = 0; i < 40; ++i) betas.push_back(std::pow(10.0, 3.0 * gen::unit(rng) - 1.5));
    std::sort(betas.begin(), betas.end());
    double prev_v = 1e300, prev_s = -1.0;
    for (double b : betas) {
      const auto d = set_at_beta(u, menu, b);
      const double s = f.mass(d.set);
      CHECK(d.value <= prev_v);
      CHECK(s >= prev_s);
      prev_v = d.value;
      prev_s = s;
      for (LabelIndex y = 0; y < k; ++y) CHECK(in_set_at_beta(u, menu, b, y) == d.set.contains(y));
    }
  }
}
