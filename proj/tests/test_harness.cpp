#include <cmath>
#include <sstream>

#include "doctest.h"
#include "gen.hpp"
#include "rac/errors.hpp"
#include "rac/harness.hpp"

using namespace rac;

namespace {

UtilityMatrix table1() { return load_utility_file(RAC_TEST_DATA "/table1.json"); }

SyntheticSpec spec_of(FinitePopulation pop, std::size_t n_calib, std::size_t n_test, std::uint64_t seed,
                      std::optional<double> kappa = std::nullopt) {
  return SyntheticSpec{std::move(pop), kappa, n_calib, n_test, seed, kDefaultEpsilon};
}

}  // namespace

TEST_CASE("generate: a single point-mass atom yields that point mass everywhere") {
  auto spec = spec_of(FinitePopulation({{1.0, Forecast::point_mass(3, 2)}}), 5, 7, 1);
  spec.epsilon = 0.0;
  const auto d = generate(spec);
  CHECK(d.calib.size() == 5);
  CHECK(d.test.size() == 7);
  for (const auto& ds : {d.calib, d.test})
    for (const auto& row : ds) {
      CHECK(row.forecast == Forecast::point_mass(3, 2));
      CHECK(row.label == 2);
    }
}

TEST_CASE("generate: empty calibration and seeded repeatability") {
  const auto pop = random_population(4, 10, 1.0, 5);
  CHECK(generate(spec_of(pop, 0, 3, 2)).calib.empty());
  for (auto kappa : {std::optional<double>{}, std::optional<double>{5.0}}) {
    const auto a = generate(spec_of(pop, 20, 20, 77, kappa));
    const auto b = generate(spec_of(pop, 20, 20, 77, kappa));
    for (std::size_t i = 0; i < 20; ++i) {
      CHECK(a.calib[i].forecast == b.calib[i].forecast);
      CHECK(a.calib[i].label == b.calib[i].label);
      CHECK(a.test[i].forecast == b.test[i].forecast);
    }
    const auto c = generate(spec_of(pop, 20, 20, 78, kappa));
    bool differs = false;
    for (std::size_t i = 0; i < 20; ++i) differs = differs || !(a.calib[i].forecast == c.calib[i].forecast);
    CHECK(differs);
  }
  auto bad = spec_of(pop, 1, 1, 1, 0.0);
  CHECK_THROWS_AS(generate(bad), ValidationError);
}

TEST_CASE("generate: well-specified forecasts are smoothed atom conditionals") {
  const auto pop = random_population(3, 4, 1.0, 8);
  const auto d = generate(spec_of(pop, 50, 0, 3));
  for (const auto& row : d.calib) {
    bool matched = false;
    for (const auto& atom : pop)
      matched = matched || row.forecast == smooth_forecast(atom.conditional.probs(), kDefaultEpsilon);
    CHECK(matched);
  }
}

TEST_CASE("evaluate examples") {
  const auto u = UtilityMatrix::identity(3);
  std::vector<MethodDecision> ds;
  std::vector<LabelIndex> truth;
  for (LabelIndex y = 0; y < 3; ++y) {
    PredictionSet s(3);
    s.insert(y);
    ds.push_back(from_certified(certify(u, s)));
    truth.push_back(y);
  }
  const auto r = evaluate(ds, truth, u, CriticalSpec::all_labels(u), "rac", 0.1);
  CHECK(*r.miscoverage == 0.0);
  CHECK(r.avg_realized_utility == 1.0);
  CHECK(*r.avg_maxmin_value == 1.0);
  CHECK(*r.critical_mistake_rate == 0.0);

  const auto t1 = table1();
  const auto covid = *t1.find_label("COVID-19");
  const std::vector<LabelIndex> lab{*t1.find_label("Pneumonia"), covid};
  MethodDecision none;
  none.action = *t1.find_action("No Action");
  const std::vector<MethodDecision> one{none};
  const std::vector<LabelIndex> y{covid};
  const auto rc = evaluate(one, y, t1, CriticalSpec::defaults(t1, lab), "best-response", 0.1);
  CHECK(*rc.critical_mistake_rate == 1.0);
  CHECK_FALSE(rc.avg_maxmin_value.has_value());
  CHECK_FALSE(rc.miscoverage.has_value());
  CHECK(rc.config["forecasts"] == "uncalibrated");

  CHECK_THROWS_AS(evaluate(one, std::vector<LabelIndex>{}, t1, CriticalSpec::all_labels(t1), "x", 0.1),
                  ValidationError);
}

TEST_CASE("CriticalSpec defaults to argmin actions with ties") {
  const auto t1 = table1();
  const auto c = CriticalSpec::all_labels(t1);
  const auto normal = *t1.find_label("Normal");
  // Normal column: (10, 2, 2, 4), so both Antibiotics and Quarantine are worst.
  CHECK(c.worst[normal] == std::vector<bool>{false, true, true, false});
  const auto opacity = *t1.find_label("Lung Opacity");
  CHECK(c.worst[opacity] == std::vector<bool>{true, false, false, false});
  const std::vector<LabelIndex> bad{9};
  CHECK_THROWS_AS(CriticalSpec::defaults(t1, bad), ValidationError);
}

TEST_CASE("evaluate reports declared-scale utilities and recomputable rows") {
  const auto u = load_utility_file(RAC_TEST_DATA "/table2.json");
  const auto pop = load_population_file(RAC_TEST_DATA "/population5.json");
  const auto d = generate(spec_of(pop, 60, 80, 4));
  RacConfig cfg;
  cfg.alpha = 0.2;
  const auto decisions = run_method(Method::rac, u, d.calib, d.test.forecasts(), cfg);
  const auto truth = d.test.labels();
  const auto r = evaluate(decisions, truth, u, CriticalSpec::all_labels(u), "rac", 0.2);

  double util = 0.0, cert = 0.0, missed = 0.0;
  for (std::size_t i = 0; i < decisions.size(); ++i) {
    std::istringstream in(decision_row_json(u, decisions[i], truth[i]).dump());
    const auto row = Json::parse(in);
    util += row["utility"].get<double>();
    cert += row["certificate"].get<double>();
    missed += row["covered"].get<bool>() ? 0.0 : 1.0;
    CHECK(row["utility"].get<double>() == u.declared(decisions[i].action, truth[i]));
  }
  const double n = static_cast<double>(decisions.size());
  CHECK(r.avg_realized_utility == doctest::Approx(util / n).epsilon(1e-12));
  CHECK(*r.avg_maxmin_value == doctest::Approx(cert / n).epsilon(1e-12));
  CHECK(*r.miscoverage == doctest::Approx(missed / n).epsilon(1e-12));
  CHECK(*r.avg_maxmin_value <= 2.0);
  CHECK(*r.avg_maxmin_value >= -2.0);
}

TEST_CASE("run_method: external sets and errors") {
  const auto u = table1();
  std::vector<Forecast> tests{Forecast::point_mass(4, 0), Forecast::point_mass(4, 1)};
  std::vector<PredictionSet> sets{PredictionSet(4), PredictionSet::full(4)};
  const auto out = run_method(Method::external, u, Dataset(4), tests, RacConfig{}, Execution::serial, &sets);
  CHECK(out[0].empty_set);
  CHECK(*out[0].certificate == 10.0);
  CHECK(*out[1].certificate == 4.0);
  CHECK_THROWS_AS(run_method(Method::external, u, Dataset(4), tests, RacConfig{}), ValidationError);
  CHECK(parse_method("best-response") == Method::best_response);
  CHECK_THROWS_AS(parse_method("score3"), ValidationError);
}

TEST_CASE("coverage_mc examples") {
  const UtilityMatrix one({"a"}, {"y"}, {{1.0}});
  const auto single = spec_of(FinitePopulation({{1.0, Forecast(std::vector<double>{1.0})}}), 10, 0, 1);
  const auto r = coverage_mc(single, one, 0.5, 50, Method::rac);
  CHECK(r.coverage == 1.0);
  CHECK(r.safety_violations == 0);

  const auto pop = random_population(3, 20, 1.0, 12);
  const auto u = UtilityMatrix::identity(3);
  const auto t1 = coverage_mc(spec_of(pop, 20, 0, 5), u, 0.1, 1, Method::rac);
  CHECK((t1.coverage == 0.0 || t1.coverage == 1.0));
  CHECK_THROWS_AS(coverage_mc(spec_of(pop, 20, 0, 5), u, 0.1, 0, Method::rac), ValidationError);
  CHECK_THROWS_AS(coverage_mc(spec_of(pop, 20, 0, 5), u, 0.1, 5, Method::best_response), ValidationError);
}

TEST_CASE("coverage_mc: identity utilities, well-specified, alpha 0.1, n 100, 2000 trials") {
  const auto pop = random_population(3, 30, 1.0, 21);
  const auto r = coverage_mc(spec_of(pop, 100, 0, 2024), UtilityMatrix::identity(3), 0.1, 2000, Method::rac);
  CHECK(r.coverage >= 0.9 - 3.0 * r.stderr_);
  CHECK(r.safety_violations == 0);
  CHECK(r.stderr_ == doctest::Approx(std::sqrt(r.coverage * (1 - r.coverage) / 2000)));
}

TEST_CASE("coverage_mc is identical serially and in parallel") {
  const auto pop = random_population(4, 15, 0.7, 22);
  const auto u = table1();
  for (auto m : {Method::rac, Method::score1, Method::score2}) {
    const auto spec = spec_of(pop, 30, 0, 9, 5.0);
    const auto a = coverage_mc(spec, u, 0.2, 60, m, RacConfig{}, Execution::serial);
    const auto b = coverage_mc(spec, u, 0.2, 60, m, RacConfig{}, Execution::parallel);
    CHECK(a.coverage == b.coverage);
    for (std::size_t t = 0; t < 60; ++t) {
      CHECK(a.log[t].covered == b.log[t].covered);
      CHECK(a.log[t].certificate == b.log[t].certificate);
      CHECK(a.log[t].action == b.log[t].action);
    }
  }
}

TEST_CASE("sweep_alpha examples") {
  const auto u = table1();
  const auto spec = spec_of(load_population_file(RAC_TEST_DATA "/population4.json"), 40, 30, 6);
  const auto crit = CriticalSpec::all_labels(u);
  const RacConfig base;
  const std::vector<double> a1{0.1};
  const std::vector<Method> rac_only{Method::rac};
  CHECK(sweep_alpha(a1, rac_only, spec, u, crit, base).rows.size() == 1);

  const std::vector<double> dup{0.1, 0.1};
  const auto d = sweep_alpha(dup, rac_only, spec, u, crit, base);
  REQUIRE(d.rows.size() == 2);
  CHECK(report_json(d.rows[0]) == report_json(d.rows[1]));

  const std::vector<Method> all{Method::rac, Method::score1, Method::score2, Method::best_response};
  const std::vector<double> a2{0.05, 0.2};
  const auto s = sweep_alpha(a2, all, spec, u, crit, base);
  REQUIRE(s.rows.size() == 8);
  const auto data = generate(spec);
  for (std::size_t i = 0; i < s.rows.size(); ++i) {
    CHECK(s.rows[i].alpha == a2[i / 4]);
    CHECK(s.rows[i].method == to_string(all[i % 4]));
    RacConfig cfg;
    cfg.alpha = a2[i / 4];
    const auto direct = run_method(all[i % 4], u, data.calib, data.test.forecasts(), cfg);
    const auto r = evaluate(direct, data.test.labels(), u, crit, std::string(to_string(all[i % 4])), cfg.alpha);
    CHECK(r.avg_realized_utility == s.rows[i].avg_realized_utility);
    CHECK(r.miscoverage == s.rows[i].miscoverage);
  }
  const std::vector<Method> ext{Method::external};
  CHECK_THROWS_AS(sweep_alpha(a1, ext, spec, u, crit, base), ValidationError);
}

TEST_CASE("sweep_csv format") {
  Report a;
  a.method = "rac";
  a.alpha = 0.1;
  a.avg_maxmin_value = 4.5;
  a.critical_mistake_rate = 0.0;
  a.avg_realized_utility = 6.25;
  a.miscoverage = 0.125;
  Report b;
  b.method = "best-response";
  b.alpha = 0.1;
  b.avg_realized_utility = 7.0;
  const std::vector<Report> rows{a, b};
  CHECK(sweep_csv(rows) ==
        "alpha,method,avg_maxmin_value,critical_mistake_rate,avg_realized_utility,miscoverage\n"
        "0.1,rac,4.5,0,6.25,0.125\n"
        "0.1,best-response,,,7,\n");
}

TEST_CASE("paired_bootstrap_stderr") {
  const std::vector<double> flat(50, 0.3);
  CHECK(paired_bootstrap_stderr(flat, 200, 1) == doctest::Approx(0.0).epsilon(1e-12));
  gen::Rng rng(81);
  std::vector<double> diffs(400);
  for (auto& d : diffs) d = gen::unit(rng);
  const double se = paired_bootstrap_stderr(diffs, 1000, 3);
  CHECK(se == paired_bootstrap_stderr(diffs, 1000, 3));
  // Standard error of a uniform mean: sqrt(1/12 / 400).
  CHECK(se == doctest::Approx(std::sqrt(1.0 / 12.0 / 400.0)).epsilon(0.15));
  CHECK(paired_bootstrap_stderr(std::vector<double>{}, 100, 1) == 0.0);
}
