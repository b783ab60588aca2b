#include "rac/harness.hpp"

#include <cmath>
#include <numeric>
#include <sstream>

#include "rac/baselines.hpp"

namespace rac {

namespace {

constexpr std::uint64_t kCalibStream = 1ULL << 60;
constexpr std::uint64_t kTestStream = 2ULL << 60;
constexpr std::uint64_t kTrialStream = 3ULL << 60;

std::vector<double> atom_weights(const FinitePopulation& pop) {
  std::vector<double> w;
  w.reserve(pop.size());
  for (const auto& a : pop) w.push_back(a.weight);
  return w;
}

MethodDecision decide_with_set(const UtilityMatrix& u, PredictionSet set) {
  return from_certified(certify(u, std::move(set)));
}

}  // namespace

std::string_view to_string(Method m) {
  switch (m) {
    case Method::rac: return "rac";
    case Method::score1: return "score1";
    case Method::score2: return "score2";
    case Method::best_response: return "best-response";
    case Method::external: return "external";
  }
  return "unknown";
}

Method parse_method(std::string_view name) {
  if (name == "rac") return Method::rac;
  if (name == "score1") return Method::score1;
  if (name == "score2") return Method::score2;
  if (name == "best-response") return Method::best_response;
  if (name == "external") return Method::external;
  throw ValidationError("unknown method '" + std::string(name) + "'");
}

bool method_has_sets(Method m) { return m != Method::best_response; }

void SyntheticSpec::validate() const {
  if (kappa && !(*kappa > 0.0)) throw ValidationError("forecast noise concentration must be positive");
  if (!(epsilon >= 0.0 && epsilon < 1.0)) throw ValidationError("epsilon must lie in [0, 1)");
}

LabeledSample draw_sample(const SyntheticSpec& spec, CounterRng& rng) {
  const auto weights = atom_weights(spec.population);
  const auto& atom = spec.population[rng.categorical(weights)];
  const auto q = atom.conditional.probs();
  const LabelIndex y = rng.categorical(q);
  std::vector<double> p(q.begin(), q.end());
  if (spec.kappa) {
    std::vector<double> params(q.size());
    for (std::size_t j = 0; j < q.size(); ++j) params[j] = *spec.kappa * q[j];
    p = rng.dirichlet(params);
  }
  return {smooth_forecast(p, spec.epsilon), y};
}

SyntheticData generate(const SyntheticSpec& spec) {
  spec.validate();
  const std::size_t k = spec.population.num_labels();
  SyntheticData out{Dataset(k), Dataset(k)};
  for (std::size_t i = 0; i < spec.n_calib; ++i) {
    CounterRng rng(spec.seed, kCalibStream + i);
    out.calib.push_back(draw_sample(spec, rng));
  }
  for (std::size_t i = 0; i < spec.n_test; ++i) {
    CounterRng rng(spec.seed, kTestStream + i);
    out.test.push_back(draw_sample(spec, rng));
  }
  return out;
}

FinitePopulation random_population(std::size_t num_labels, std::size_t count, double concentration,
                                   std::uint64_t seed) {
  if (num_labels == 0 || count == 0) throw ValidationError("random population needs labels and atoms");
  std::vector<double> params(num_labels, concentration);
  std::vector<PopulationAtom> atoms;
  for (std::size_t i = 0; i < count; ++i) {
    CounterRng rng(seed, i);
    atoms.push_back({1.0 / static_cast<double>(count), Forecast(rng.dirichlet(params))});
  }
  return FinitePopulation(std::move(atoms));
}

CriticalSpec CriticalSpec::defaults(const UtilityMatrix& u, std::span<const LabelIndex> critical_labels) {
  CriticalSpec c;
  c.critical.assign(u.num_labels(), false);
  for (LabelIndex y : critical_labels) {
    if (y >= u.num_labels()) throw ValidationError("critical label index out of range");
    c.critical[y] = true;
  }
  c.worst.assign(u.num_labels(), std::vector<bool>(u.num_actions(), false));
  for (LabelIndex y = 0; y < u.num_labels(); ++y) {
    double lo = u(0, y);
    for (ActionIndex a = 1; a < u.num_actions(); ++a) lo = std::min(lo, u(a, y));
    for (ActionIndex a = 0; a < u.num_actions(); ++a) c.worst[y][a] = u(a, y) == lo;
  }
  return c;
}

CriticalSpec CriticalSpec::all_labels(const UtilityMatrix& u) {
  std::vector<LabelIndex> all(u.num_labels());
  std::iota(all.begin(), all.end(), LabelIndex{0});
  return defaults(u, all);
}

MethodDecision from_certified(const CertifiedDecision& d) {
  return {d.set, d.action, d.value, d.empty_set};
}

std::vector<MethodDecision> run_method(Method method, const UtilityMatrix& u, const Dataset& calib,
                                       std::span<const Forecast> tests, const RacConfig& cfg, Execution exec,
                                       const std::vector<PredictionSet>* external) {
  std::vector<MethodDecision> out(tests.size());
  switch (method) {
    case Method::rac: {
      const RacCalibrator calibrator(u, calib, cfg, exec);
      for_each_index(tests.size(), exec,
                     [&](std::size_t i) { out[i] = from_certified(calibrator.predict(tests[i]).decision); });
      break;
    }
    case Method::score1:
    case Method::score2: {
      const auto thr = conformal_calibrate(calib, method == Method::score1 ? ScoreKind::score1 : ScoreKind::score2,
                                           cfg.alpha);
      for_each_index(tests.size(), exec,
                     [&](std::size_t i) { out[i] = decide_with_set(u, conformal_set(tests[i], thr)); });
      break;
    }
    case Method::best_response:
      for_each_index(tests.size(), exec, [&](std::size_t i) { out[i].action = best_response(u, tests[i]); });
      break;
    case Method::external:
      if (!external || external->size() != tests.size())
        throw ValidationError("external method needs one prediction set per test row");
      for (std::size_t i = 0; i < tests.size(); ++i) out[i] = decide_with_set(u, (*external)[i]);
      break;
  }
  return out;
}

Report evaluate(std::span<const MethodDecision> decisions, std::span<const LabelIndex> truth, const UtilityMatrix& u,
                const CriticalSpec& crit, std::string method, double alpha) {
  if (decisions.size() != truth.size()) throw ValidationError("decisions and labels are misaligned");
  if (crit.critical.size() != u.num_labels()) throw ValidationError("critical spec does not match utility labels");
  Report r;
  r.method = std::move(method);
  r.alpha = alpha;
  r.n_test = decisions.size();
  if (r.method == "best-response") r.config["forecasts"] = "uncalibrated";
  if (decisions.empty()) return r;

  bool all_sets = true;
  double cert_sum = 0.0, utility_sum = 0.0;
  std::size_t missed = 0, mistakes = 0;
  for (std::size_t i = 0; i < decisions.size(); ++i) {
    const auto& d = decisions[i];
    const LabelIndex y = truth[i];
    if (y >= u.num_labels() || d.action >= u.num_actions()) throw ValidationError("decision index out of range");
    utility_sum += u.declared(d.action, y);
    if (crit.critical[y]) {
      ++r.critical_rows;
      if (crit.worst[y][d.action]) ++mistakes;
    }
    if (d.set && d.certificate) {
      cert_sum += u.unshift(*d.certificate);
      if (!d.set->contains(y)) ++missed;
      if (d.empty_set) ++r.empty_sets;
    } else {
      all_sets = false;
    }
  }
  const double n = static_cast<double>(decisions.size());
  r.avg_realized_utility = utility_sum / n;
  if (r.critical_rows > 0) r.critical_mistake_rate = static_cast<double>(mistakes) / static_cast<double>(r.critical_rows);
  if (all_sets) {
    r.avg_maxmin_value = cert_sum / n;
    r.miscoverage = static_cast<double>(missed) / n;
  }
  return r;
}

Json report_json(const Report& r) {
  auto opt = [](const std::optional<double>& v) { return v ? Json(*v) : Json(nullptr); };
  Json j;
  j["method"] = r.method;
  j["alpha"] = r.alpha;
  j["n_test"] = r.n_test;
  j["avg_maxmin_value"] = opt(r.avg_maxmin_value);
  j["critical_mistake_rate"] = opt(r.critical_mistake_rate);
  j["avg_realized_utility"] = r.avg_realized_utility;
  j["miscoverage"] = opt(r.miscoverage);
  j["critical_rows"] = r.critical_rows;
  j["empty_sets"] = r.empty_sets;
  j["config"] = r.config;
  return j;
}

Json decision_row_json(const UtilityMatrix& u, const MethodDecision& d, std::optional<LabelIndex> truth) {
  Json row;
  if (d.set) row["set"] = label_names_json(u, *d.set);
  row["action"] = u.action_names().at(d.action);
  if (d.certificate) row["certificate"] = u.unshift(*d.certificate);
  if (d.empty_set) row["empty_set"] = true;
  if (truth) {
    row["y"] = u.label_names().at(*truth);
    row["utility"] = u.declared(d.action, *truth);
    if (d.set) row["covered"] = d.set->contains(*truth);
  }
  return row;
}

CoverageResult coverage_mc(const SyntheticSpec& spec, const UtilityMatrix& u, double alpha, std::size_t trials,
                           Method method, const RacConfig& base, Execution exec) {
  spec.validate();
  if (trials == 0) throw ValidationError("coverage Monte Carlo needs at least one trial");
  if (!method_has_sets(method) || method == Method::external)
    throw ValidationError("coverage Monte Carlo needs a set-producing method (rac, score1, score2)");
  if (spec.n_calib == 0) throw ValidationError("coverage Monte Carlo needs n_calib >= 1");
  RacConfig cfg = base;
  cfg.alpha = alpha;
  cfg.validate();

  CoverageResult res;
  res.trials = trials;
  res.log.resize(trials);
  const std::size_t k = spec.population.num_labels();
  for_each_index(trials, exec, [&](std::size_t t) {
    CounterRng rng(spec.seed, kTrialStream + t);
    Dataset calib(k);
    for (std::size_t i = 0; i < spec.n_calib; ++i) calib.push_back(draw_sample(spec, rng));
    const LabeledSample test = draw_sample(spec, rng);

    const Forecast tests[] = {test.forecast};
    const auto d = run_method(method, u, calib, tests, cfg, Execution::serial).front();
    CoverageTrial& tr = res.log[t];
    tr.covered = d.set->contains(test.label);
    tr.action = d.action;
    tr.certificate = *d.certificate;
    tr.realized = u(d.action, test.label);
    tr.safety_holds = !tr.covered || tr.realized >= tr.certificate;
  });

  std::size_t covered = 0;
  for (const auto& tr : res.log) {
    covered += tr.covered ? 1 : 0;
    res.safety_violations += tr.safety_holds ? 0 : 1;
  }
  res.coverage = static_cast<double>(covered) / static_cast<double>(trials);
  res.stderr_ = std::sqrt(res.coverage * (1.0 - res.coverage) / static_cast<double>(trials));
  return res;
}

SweepResult sweep_alpha(std::span<const double> alphas, std::span<const Method> methods, const Dataset& calib,
                        const Dataset& test, const UtilityMatrix& u, const CriticalSpec& crit, const RacConfig& base,
                        Execution exec) {
  const auto tests = test.forecasts();
  const auto truth = test.labels();
  SweepResult out;
  for (double alpha : alphas) {
    RacConfig cfg = base;
    cfg.alpha = alpha;
    cfg.validate();
    for (Method m : methods) {
      if (m == Method::external) throw ValidationError("sweeps do not support externally supplied sets");
      auto decisions = run_method(m, u, calib, tests, cfg, exec);
      Report r = evaluate(decisions, truth, u, crit, std::string(to_string(m)), alpha);
      r.config["n_calib"] = calib.size();
      out.rows.push_back(std::move(r));
      out.decisions.push_back(std::move(decisions));
    }
  }
  return out;
}

SweepResult sweep_alpha(std::span<const double> alphas, std::span<const Method> methods, const SyntheticSpec& spec,
                        const UtilityMatrix& u, const CriticalSpec& crit, const RacConfig& base, Execution exec) {
  const auto data = generate(spec);
  auto out = sweep_alpha(alphas, methods, data.calib, data.test, u, crit, base, exec);
  for (auto& r : out.rows) r.config["seed"] = spec.seed;
  return out;
}

std::string sweep_csv(std::span<const Report> rows) {
  std::ostringstream out;
  auto opt = [](const std::optional<double>& v) { return v ? format_double(*v) : std::string(); };
  out << "alpha,method,avg_maxmin_value,critical_mistake_rate,avg_realized_utility,miscoverage\n";
  for (const auto& r : rows)
    out << format_double(r.alpha) << ',' << r.method << ',' << opt(r.avg_maxmin_value) << ','
        << opt(r.critical_mistake_rate) << ',' << format_double(r.avg_realized_utility) << ',' << opt(r.miscoverage)
        << '\n';
  return out.str();
}

double paired_bootstrap_stderr(std::span<const double> diffs, std::size_t resamples, std::uint64_t seed) {
  if (diffs.empty() || resamples < 2) return 0.0;
  CounterRng rng(seed, 0);
  const std::size_t n = diffs.size();
  std::vector<double> means(resamples);
  for (auto& m : means) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += diffs[static_cast<std::size_t>(rng() % n)];
    m = s / static_cast<double>(n);
  }
  const double mean = std::accumulate(means.begin(), means.end(), 0.0) / static_cast<double>(resamples);
  double var = 0.0;
  for (double m : means) var += (m - mean) * (m - mean);
  return std::sqrt(var / static_cast<double>(resamples - 1));
}

}  // namespace rac
