// rac: risk-averse calibrated prediction sets and actions from forecast files.

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "rac/baselines.hpp"
#include "rac/calibrator.hpp"
#include "rac/errors.hpp"
#include "rac/harness.hpp"
#include "rac/io.hpp"
#include "rac/population.hpp"

namespace {

using namespace rac;

struct Common {
  double alpha = 0.1;
  std::string utility;
  std::string calib;
  std::string test;
  double epsilon = kDefaultEpsilon;
  std::string beta_mode = "exact";
  std::size_t grid_points = 1000;
  std::size_t candidate_cap = 50000;
  std::string variant = "full";
  std::uint64_t seed = 0;
  std::string out = "-";
  std::string method = "rac";
  bool serial = false;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--alpha", c.alpha, "Target miscoverage in (0, 1)")->capture_default_str();
  cmd->add_option("--utility", c.utility, "Utility table JSON");
  cmd->add_option("--calib", c.calib, "Labeled calibration forecasts (JSONL)");
  cmd->add_option("--test", c.test, "Test forecasts (JSONL)");
  cmd->add_option("--epsilon", c.epsilon, "Forecast smoothing weight in [0, 1)")->capture_default_str();
  cmd->add_option("--beta-mode", c.beta_mode, "exact or grid")
      ->check(CLI::IsMember({"exact", "grid"}))
      ->capture_default_str();
  cmd->add_option("--grid-points", c.grid_points, "Grid size in grid mode")->capture_default_str();
  cmd->add_option("--candidate-cap", c.candidate_cap, "Exact candidates before falling back to the grid")
      ->capture_default_str();
  cmd->add_option("--variant", c.variant, "full or split calibration")
      ->check(CLI::IsMember({"full", "split"}))
      ->capture_default_str();
  cmd->add_option("--seed", c.seed, "Random seed")->capture_default_str();
  cmd->add_option("--out", c.out, "Output path, - for stdout")->capture_default_str();
  cmd->add_option("--method", c.method, "rac, score1, score2, best-response or external")->capture_default_str();
  cmd->add_flag("--serial", c.serial, "Run kernels on one thread");
}

RacConfig config_of(const Common& c) {
  RacConfig cfg;
  cfg.alpha = c.alpha;
  cfg.beta_mode = c.beta_mode == "grid" ? BetaMode::grid : BetaMode::exact;
  cfg.grid_points = c.grid_points;
  cfg.candidate_cap = c.candidate_cap;
  cfg.variant = c.variant == "split" ? RacVariant::split : RacVariant::full;
  cfg.validate();
  return cfg;
}

Execution exec_of(const Common& c) { return c.serial ? Execution::serial : Execution::parallel; }

const std::string& need(const std::string& value, const char* flag) {
  if (value.empty()) throw ValidationError(std::string(flag) + " is required");
  return value;
}

UtilityMatrix utility_of(const Common& c) { return load_utility_file(need(c.utility, "--utility")); }

void write_output(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text << std::flush;
    return;
  }
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw ValidationError("cannot write '" + path + "'");
  f << text;
  if (!f) throw ValidationError("failed writing '" + path + "'");
}

std::string dump_line(const Json& j) { return j.dump() + "\n"; }

std::vector<double> parse_numbers(const std::string& list, const char* what) {
  std::vector<double> out;
  std::stringstream ss(list);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::logic_error&) {
      throw ValidationError(std::string(what) + ": cannot parse '" + item + "'");
    }
  }
  if (out.empty()) throw ValidationError(std::string(what) + " is empty");
  return out;
}

std::vector<std::string> split_list(const std::string& list) {
  std::vector<std::string> out;
  std::stringstream ss(list);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(item);
  return out;
}

CriticalSpec critical_of(const UtilityMatrix& u, const std::string& list) {
  if (list.empty()) return CriticalSpec::all_labels(u);
  std::vector<LabelIndex> labels;
  for (const auto& name : split_list(list)) {
    auto y = u.find_label(name);
    if (!y) throw ValidationError("unknown critical label '" + name + "'");
    labels.push_back(*y);
  }
  return CriticalSpec::defaults(u, labels);
}

Json number_or_text(double v) {
  if (std::isfinite(v)) return v;
  return format_double(v);
}

Json beta_quantiles(const std::vector<std::vector<double>>& per_label, const UtilityMatrix& u) {
  Json out = Json::object();
  for (LabelIndex y = 0; y < per_label.size(); ++y) {
    auto b = per_label[y];
    Json q = Json::object();
    if (!b.empty()) {
      std::sort(b.begin(), b.end());
      auto at = [&](double p) { return b[static_cast<std::size_t>(std::floor(p * static_cast<double>(b.size() - 1)))]; };
      q["min"] = number_or_text(b.front());
      q["q25"] = number_or_text(at(0.25));
      q["median"] = number_or_text(at(0.5));
      q["q75"] = number_or_text(at(0.75));
      q["max"] = number_or_text(b.back());
    }
    out[u.label_names()[y]] = q;
  }
  return out;
}

int run_predict(const Common& c, const std::string& summary_path, const std::string& menus_path) {
  const auto u = utility_of(c);
  const auto cfg = config_of(c);
  const auto calib = to_dataset(read_forecast_file(need(c.calib, "--calib"), u, c.epsilon), u.num_labels());
  const auto tests = forecasts_of(read_forecast_file(need(c.test, "--test"), u, c.epsilon));

  const RacCalibrator calibrator(u, calib, cfg, exec_of(c));
  const auto preds = rac_batch(calibrator, tests, exec_of(c));

  std::string rows;
  std::vector<std::vector<double>> betas(u.num_labels());
  std::size_t grid_fallbacks = 0;
  for (const auto& p : preds) {
    rows += dump_line(decision_json(u, p.decision));
    for (LabelIndex y = 0; y < p.calibration.beta.size(); ++y) betas[y].push_back(p.calibration.beta[y]);
    if (cfg.beta_mode == BetaMode::exact && p.calibration.mode == BetaMode::grid) ++grid_fallbacks;
  }
  write_output(c.out, rows);

  if (!menus_path.empty()) {
    std::string menus;
    for (std::size_t i = 0; i < tests.size(); ++i) {
      Json head;
      head["row"] = i;
      menus += dump_line(head);
      menus += menu_jsonl(u, build_menu(u, tests[i]));
    }
    write_output(menus_path, menus);
  }

  Json summary;
  summary["alpha"] = cfg.alpha;
  summary["n"] = calib.size();
  summary["n_test"] = tests.size();
  summary["beta_mode"] = c.beta_mode;
  summary["variant"] = c.variant;
  summary["epsilon"] = c.epsilon;
  summary["required_count"] = required_count(calib.size(), cfg.alpha);
  summary["grid_fallbacks"] = grid_fallbacks;
  summary["beta_quantiles"] = beta_quantiles(betas, u);
  const std::string text = summary.dump(2) + "\n";
  if (summary_path.empty())
    std::cerr << text;
  else
    write_output(summary_path, text);
  return 0;
}

int run_evaluate(const Common& c, const std::string& sets_path, const std::string& critical,
                 const std::string& rows_path) {
  const auto u = utility_of(c);
  const auto cfg = config_of(c);
  const Method method = parse_method(c.method);
  const auto test_rows = read_forecast_file(need(c.test, "--test"), u, c.epsilon);
  const auto test = to_dataset(test_rows, u.num_labels());
  const auto tests = test.forecasts();
  const auto truth = test.labels();

  Dataset calib(u.num_labels());
  if (method == Method::rac || method == Method::score1 || method == Method::score2)
    calib = to_dataset(read_forecast_file(need(c.calib, "--calib"), u, c.epsilon), u.num_labels());

  std::vector<PredictionSet> external;
  if (method == Method::external) {
    std::ifstream in(need(sets_path, "--sets"), std::ios::binary);
    if (!in) throw ValidationError("cannot open '" + sets_path + "'");
    external = read_external_sets(in, u);
  }

  const auto decisions = run_method(method, u, calib, tests, cfg, exec_of(c), &external);
  Report r = evaluate(decisions, truth, u, critical_of(u, critical), std::string(to_string(method)), cfg.alpha);
  r.config["n_calib"] = calib.size();
  r.config["epsilon"] = c.epsilon;
  r.config["beta_mode"] = c.beta_mode;
  r.config["variant"] = c.variant;
  write_output(c.out, report_json(r).dump(2) + "\n");

  if (!rows_path.empty()) {
    std::string rows;
    for (std::size_t i = 0; i < decisions.size(); ++i) rows += dump_line(decision_row_json(u, decisions[i], truth[i]));
    write_output(rows_path, rows);
  }
  return 0;
}

Json solution_json(const UtilityMatrix& u, const PopulationSolution& s) {
  Json j;
  j["beta"] = number_or_text(s.beta);
  j["objective"] = u.unshift(s.objective);
  j["achieved_coverage"] = s.achieved_coverage;
  j["coverage_slack"] = s.coverage_slack;
  j["dual_bound"] = number_or_text(u.unshift(s.dual_bound));
  j["duality_gap"] = number_or_text(s.duality_gap);
  Json atoms = Json::array();
  for (const auto& a : s.atoms) {
    Json row;
    row["set"] = label_names_json(u, a.set);
    row["action"] = u.action_names()[a.entry.action];
    row["certificate"] = u.unshift(a.certificate);
    row["coverage"] = a.coverage;
    atoms.push_back(row);
  }
  j["atoms"] = atoms;
  return j;
}

int run_oracle(const Common& c, const std::string& population_path, bool skip_brute) {
  const auto u = utility_of(c);
  const auto pop = load_population_file(need(population_path, "--population"));
  if (pop.num_labels() != u.num_labels()) throw ValidationError("population and utility label counts differ");
  const auto sol = solve_population(pop, u, c.alpha);

  Json report;
  report["alpha"] = c.alpha;
  report["atoms"] = pop.size();
  report["solution"] = solution_json(u, sol);
  const bool small = pop.size() <= kBruteForceMaxAtoms && u.num_labels() <= kBruteForceMaxLabels;
  if (skip_brute || !small) {
    report["brute_force"] = nullptr;
  } else {
    const auto bf = brute_force_population(pop, u, c.alpha, exec_of(c));
    Json b;
    b["cpo_opt"] = u.unshift(bf.cpo_opt);
    b["dpo_opt"] = u.unshift(bf.dpo_opt);
    b["equivalent"] = bf.equivalent;
    b["sandwich_holds"] = sol.objective <= bf.cpo_opt + 1e-12 && bf.cpo_opt <= sol.dual_bound + 1e-12;
    Json sets = Json::array();
    for (const auto& s : bf.cpo_sets) sets.push_back(label_names_json(u, s));
    b["cpo_sets"] = sets;
    Json policy = Json::array();
    for (const auto& [a, level] : bf.dpo_policy) {
      Json p;
      p["action"] = u.action_names()[a];
      p["level"] = u.unshift(level);
      policy.push_back(p);
    }
    b["dpo_policy"] = policy;
    report["brute_force"] = b;
  }
  write_output(c.out, report.dump(2) + "\n");
  return 0;
}

struct SyntheticArgs {
  std::string population;
  std::size_t n_calib = 100;
  std::size_t n_test = 1000;
  double kappa = 0.0;  // 0 means exact conditionals
};

void add_synthetic(CLI::App* cmd, SyntheticArgs& s) {
  cmd->add_option("--population", s.population, "Population JSON");
  cmd->add_option("--n-calib", s.n_calib, "Calibration rows")->capture_default_str();
  cmd->add_option("--n-test", s.n_test, "Test rows")->capture_default_str();
  cmd->add_option("--kappa", s.kappa, "Dirichlet forecast noise concentration; 0 for exact conditionals")
      ->capture_default_str();
}

SyntheticSpec spec_of(const SyntheticArgs& s, const Common& c) {
  SyntheticSpec spec{load_population_file(need(s.population, "--population")), std::nullopt, s.n_calib, s.n_test,
                     c.seed, c.epsilon};
  if (s.kappa < 0.0) throw ValidationError("--kappa must be nonnegative");
  if (s.kappa > 0.0) spec.kappa = s.kappa;
  spec.validate();
  return spec;
}

int run_mc(const Common& c, const SyntheticArgs& s, std::size_t trials, const std::string& log_path) {
  const auto u = utility_of(c);
  const auto spec = spec_of(s, c);
  if (spec.population.num_labels() != u.num_labels()) throw ValidationError("population and utility label counts differ");
  const Method method = parse_method(c.method);
  const auto res = coverage_mc(spec, u, c.alpha, trials, method, config_of(c), exec_of(c));

  Json j;
  j["method"] = to_string(method);
  j["alpha"] = c.alpha;
  j["n_calib"] = spec.n_calib;
  j["kappa"] = spec.kappa ? Json(*spec.kappa) : Json("inf");
  j["seed"] = c.seed;
  j["trials"] = res.trials;
  j["coverage"] = res.coverage;
  j["stderr"] = res.stderr_;
  j["lower_bound"] = 1.0 - c.alpha - 3.0 * res.stderr_;
  j["coverage_ok"] = res.coverage >= 1.0 - c.alpha - 3.0 * res.stderr_;
  j["safety_violations"] = res.safety_violations;
  write_output(c.out, j.dump(2) + "\n");

  if (!log_path.empty()) {
    std::string log;
    for (std::size_t t = 0; t < res.log.size(); ++t) {
      const auto& tr = res.log[t];
      Json row;
      row["trial"] = t;
      row["covered"] = tr.covered;
      row["action"] = u.action_names()[tr.action];
      row["certificate"] = u.unshift(tr.certificate);
      row["realized"] = u.unshift(tr.realized);
      log += dump_line(row);
    }
    write_output(log_path, log);
  }
  return 0;
}

int run_sweep(const Common& c, const SyntheticArgs& s, const std::string& alphas_arg, const std::string& methods_arg,
              const std::string& critical) {
  const auto u = utility_of(c);
  const auto alphas = parse_numbers(alphas_arg, "--alphas");
  std::vector<Method> methods;
  for (const auto& name : split_list(methods_arg)) methods.push_back(parse_method(name));
  if (methods.empty()) throw ValidationError("--methods is empty");
  RacConfig base = config_of(c);
  const auto crit = critical_of(u, critical);

  SweepResult res;
  if (!s.population.empty()) {
    const auto spec = spec_of(s, c);
    if (spec.population.num_labels() != u.num_labels())
      throw ValidationError("population and utility label counts differ");
    res = sweep_alpha(alphas, methods, spec, u, crit, base, exec_of(c));
  } else {
    const auto calib = to_dataset(read_forecast_file(need(c.calib, "--calib"), u, c.epsilon), u.num_labels());
    const auto test = to_dataset(read_forecast_file(need(c.test, "--test"), u, c.epsilon), u.num_labels());
    res = sweep_alpha(alphas, methods, calib, test, u, crit, base, exec_of(c));
  }
  write_output(c.out, sweep_csv(res.rows));
  return 0;
}

int run_generate(const Common& c, const SyntheticArgs& s, const std::string& calib_out, const std::string& test_out) {
  const auto u = utility_of(c);
  auto spec = spec_of(s, c);
  if (spec.population.num_labels() != u.num_labels()) throw ValidationError("population and utility label counts differ");
  spec.epsilon = 0.0;  // readers smooth on load
  const auto data = generate(spec);
  auto dump = [&](const Dataset& d) {
    std::string text;
    for (const auto& row : d) text += forecast_row_json(u, row.forecast, row.label) + "\n";
    return text;
  };
  write_output(need(calib_out, "--calib-out"), dump(data.calib));
  write_output(need(test_out, "--test-out"), dump(data.test));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Risk-averse calibrated prediction sets, actions and utility certificates"};
  app.require_subcommand(1);

  Common predict_c, eval_c, oracle_c, mc_c, sweep_c, gen_c;
  std::string summary_path, menus_path;
  auto* predict = app.add_subcommand("predict", "Calibrate on --calib and decide every --test row");
  add_common(predict, predict_c);
  predict->add_option("--summary", summary_path, "Calibration summary JSON (default: stderr)");
  predict->add_option("--dump-menus", menus_path, "Write every test coverage menu as JSONL");

  std::string sets_path, eval_critical, rows_path;
  auto* eval = app.add_subcommand("evaluate", "Report the four test metrics for one method");
  add_common(eval, eval_c);
  eval->add_option("--sets", sets_path, "External prediction sets JSONL for --method external");
  eval->add_option("--critical", eval_critical, "Comma-separated critical labels (default: all)");
  eval->add_option("--rows", rows_path, "Per-row decisions JSONL");

  std::string population_path;
  bool skip_brute = false;
  auto* oracle = app.add_subcommand("oracle", "Population dual solution and brute-force comparison");
  add_common(oracle, oracle_c);
  oracle->add_option("--population", population_path, "Population JSON");
  oracle->add_flag("--no-brute-force", skip_brute, "Skip the exhaustive search");

  SyntheticArgs mc_s, sweep_s, gen_s;
  std::size_t trials = 2000;
  std::string log_path;
  auto* mc = app.add_subcommand("mc-coverage", "Monte Carlo coverage and safety check on synthetic draws");
  add_common(mc, mc_c);
  add_synthetic(mc, mc_s);
  mc->add_option("--trials", trials, "Number of trials")->capture_default_str();
  mc->add_option("--log", log_path, "Per-trial JSONL");

  std::string alphas = "0.02,0.05,0.1,0.2", methods = "rac,score1,score2,best-response", sweep_critical;
  auto* sweep = app.add_subcommand("sweep-alpha", "Metric curves over alpha as CSV");
  add_common(sweep, sweep_c);
  add_synthetic(sweep, sweep_s);
  sweep->add_option("--alphas", alphas, "Comma-separated alpha values")->capture_default_str();
  sweep->add_option("--methods", methods, "Comma-separated methods")->capture_default_str();
  sweep->add_option("--critical", sweep_critical, "Comma-separated critical labels (default: all)");

  std::string calib_out, test_out;
  auto* gen = app.add_subcommand("generate", "Write seeded synthetic calibration and test JSONL");
  add_common(gen, gen_c);
  add_synthetic(gen, gen_s);
  gen->add_option("--calib-out", calib_out, "Calibration JSONL path");
  gen->add_option("--test-out", test_out, "Test JSONL path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return e.get_exit_code() == 0 ? 0 : 2;
  }

  try {
    if (*predict) return run_predict(predict_c, summary_path, menus_path);
    if (*eval) return run_evaluate(eval_c, sets_path, eval_critical, rows_path);
    if (*oracle) return run_oracle(oracle_c, population_path, skip_brute);
    if (*mc) return run_mc(mc_c, mc_s, trials, log_path);
    if (*sweep) return run_sweep(sweep_c, sweep_s, alphas, methods, sweep_critical);
    if (*gen) return run_generate(gen_c, gen_s, calib_out, test_out);
  } catch (const InfeasibleError& e) {
    std::cerr << "infeasible: " << e.what() << "\n";
    return 3;
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
