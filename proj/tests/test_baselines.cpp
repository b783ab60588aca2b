#include <cmath>
#include <limits>

#include "doctest.h"
#include "gen.hpp"
#include "rac/baselines.hpp"
#include "rac/calibrator.hpp"
#include "rac/errors.hpp"
#include "rac/io.hpp"

using namespace rac;

TEST_CASE("score1 examples") {
  const Forecast f(std::vector<double>{0.5, 0.3, 0.2});
  CHECK(score1(f, 1) == doctest::Approx(0.7).epsilon(1e-15));
  CHECK(score1(Forecast::point_mass(3, 2), 2) == 0.0);
  const Forecast uni(std::vector<double>{0.25, 0.25, 0.25, 0.25});
  for (LabelIndex y = 0; y < 4; ++y) CHECK(score1(uni, y) == 0.75);
  CHECK_THROWS_AS(score1(f, 3), ValidationError);
}

TEST_CASE("score2 examples") {
  const Forecast f(std::vector<double>{0.5, 0.3, 0.2});
  CHECK(score2(f, 1) == 0.5);
  CHECK(score2(f, 0) == 0.0);
  CHECK(score2(f, 2) == 0.8);
  const Forecast uni(std::vector<double>{0.25, 0.25, 0.25, 0.25});
  for (LabelIndex y = 0; y < 4; ++y) CHECK(score2(uni, y) == 0.0);
  CHECK_THROWS_AS(score2(f, 7), ValidationError);
}

TEST_CASE("conformal_calibrate ranks") {
  Dataset d(2);
  for (int i = 0; i < 9; ++i) d.push_back({Forecast(std::vector<double>{0.1 * (i + 1), 1.0 - 0.1 * (i + 1)}), 0});
  // score1 = 1 - p0 = 0.9, 0.8, ..., 0.1; the 9th smallest is the largest.
  const auto thr = conformal_calibrate(d, ScoreKind::score1, 0.1);
  CHECK(thr.n == 9);
  CHECK(thr.qhat == score1(d[0].forecast, 0));
  const auto loose = conformal_calibrate(d, ScoreKind::score1, 0.5);
  // rank ceil(10 * 0.5) = 5: fifth smallest of {0.1, ..., 0.9}.
  CHECK(loose.qhat == score1(d[4].forecast, 0));

  const Dataset one(2, {{Forecast(std::vector<double>{0.6, 0.4}), 0}});
  CHECK(conformal_calibrate(one, ScoreKind::score1, 0.1).qhat == std::numeric_limits<double>::infinity());

  Dataset flat(2);
  for (int i = 0; i < 5; ++i) flat.push_back({Forecast(std::vector<double>{0.25, 0.75}), 0});
  CHECK(conformal_calibrate(flat, ScoreKind::score1, 0.2).qhat == 0.75);
  CHECK_THROWS_AS(conformal_calibrate(Dataset(2), ScoreKind::score1, 0.1), ValidationError);
  CHECK_THROWS_AS(conformal_calibrate(flat, ScoreKind::score1, 0.0), ValidationError);
}

TEST_CASE("conformal_set examples") {
  const Forecast f(std::vector<double>{0.7, 0.3});
  auto s = conformal_set(f, {0.4, ScoreKind::score1, 0.1, 10});
  CHECK(s.members() == std::vector<LabelIndex>{0});
  s = conformal_set(f, {std::numeric_limits<double>::infinity(), ScoreKind::score2, 0.1, 1});
  CHECK(s.count() == 2);
  s = conformal_set(f, {0.1, ScoreKind::score1, 0.1, 10});
  CHECK(s.empty());
  CHECK(certify(UtilityMatrix::identity(2), s).value == 1.0);
}

TEST_CASE("best_response examples") {
  const auto u = load_utility_file(RAC_TEST_DATA "/table1.json");
  CHECK(u.action_names()[best_response(u, Forecast::point_mass(4, *u.find_label("Pneumonia")))] == "Antibiotics");
  CHECK(u.action_names()[best_response(u, Forecast(std::vector<double>{1, 0, 0, 0}))] == "No Action");
  gen::Rng rng(71);
  for (int i = 0; i < 200; ++i) {
    const auto f = gen::forecast(rng, 5);
    const auto p = f.probs();
    CHECK(best_response(UtilityMatrix::identity(5), f) ==
          static_cast<std::size_t>(std::max_element(p.begin(), p.end()) - p.begin()));
  }
}

TEST_CASE("property: score2 sets are top-probability prefixes") {
  gen::Rng rng(72);
  for (int trial = 0; trial < 500; ++trial) {
    const std::size_t k = gen::pick(rng, 1, 6);
    const auto f = gen::forecast(rng, k, true);
    const ConformalThreshold thr{gen::unit(rng), ScoreKind::score2, 0.1, 10};
    const auto s = conformal_set(f, thr);
    for (LabelIndex a = 0; a < k; ++a)
      for (LabelIndex b = 0; b < k; ++b)
        if (s.contains(a) && f[b] >= f[a]) CHECK(s.contains(b));
  }
}

TEST_CASE("property: best_response is invariant to positive affine maps") {
  gen::Rng rng(73);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t m = gen::pick(rng, 1, 4), k = gen::pick(rng, 1, 5);
    const auto u = gen::utility(rng, m, k);
    std::vector<std::vector<double>> rows(m, std::vector<double>(k));
    const double scale = static_cast<double>(gen::pick(rng, 1, 4));
    const double offset = static_cast<double>(gen::pick(rng, 0, 5));
    for (ActionIndex a = 0; a < m; ++a)
      for (LabelIndex y = 0; y < k; ++y) rows[a][y] = scale * u(a, y) + offset;
    const UtilityMatrix v(u.action_names(), u.label_names(), rows);
    const auto f = gen::dyadic_forecast(rng, k);
    CHECK(best_response(u, f) == best_response(v, f));
  }
}
