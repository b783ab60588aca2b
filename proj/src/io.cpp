#include "rac/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <sstream>

namespace rac {

namespace {

Json parse_json(std::string_view text, const std::string& what) {
  try {
    return Json::parse(text.begin(), text.end());
  } catch (const Json::parse_error& e) {
    throw ValidationError(what + ": malformed JSON (" + e.what() + ")");
  }
}

std::vector<std::string> string_list(const Json& doc, const char* key) {
  if (!doc.contains(key) || !doc[key].is_array()) throw ValidationError(std::string("utility document needs an array '") + key + "'");
  std::vector<std::string> out;
  for (const auto& v : doc[key]) {
    if (!v.is_string()) throw ValidationError(std::string("'") + key + "' entries must be strings");
    out.push_back(v.get<std::string>());
  }
  return out;
}

double number_of(const Json& v, const std::string& where) {
  if (!v.is_number()) throw ValidationError(where + ": expected a number");
  return v.get<double>();
}

std::vector<double> number_list(const Json& v, const std::string& where) {
  if (!v.is_array()) throw ValidationError(where + ": expected an array of numbers");
  std::vector<double> out;
  out.reserve(v.size());
  for (const auto& x : v) out.push_back(number_of(x, where));
  return out;
}

LabelIndex label_of(const Json& v, const UtilityMatrix& u, const std::string& where) {
  if (v.is_string()) {
    const auto idx = u.find_label(v.get<std::string>());
    if (!idx) throw ValidationError(where + ": unknown label '" + v.get<std::string>() + "'");
    return *idx;
  }
  if (v.is_number_unsigned() || (v.is_number_integer() && v.get<long long>() >= 0)) {
    const auto idx = v.get<std::size_t>();
    if (idx >= u.num_labels()) throw ValidationError(where + ": label index out of range");
    return idx;
  }
  throw ValidationError(where + ": label must be a name or a nonnegative index");
}

template <class Fn>
void for_each_jsonl(std::istream& in, const char* what, Fn&& fn) {
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const std::string where = std::string(what) + " line " + std::to_string(lineno);
    Json row = parse_json(line, where);
    if (!row.is_object()) throw ValidationError(where + ": expected a JSON object");
    fn(row, where);
  }
}

Json json_number(double v) {
  // Integral values are written as integers so declared tables round-trip
  // textually as well as numerically.
  if (std::isfinite(v) && v == std::trunc(v) && std::abs(v) < 9.0e15 && !(v == 0.0 && std::signbit(v))) return Json(static_cast<long long>(v));
  return Json(v);
}

}  // namespace

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

UtilityMatrix load_utility(std::string_view json_text) {
  const Json doc = parse_json(json_text, "utility document");
  if (!doc.is_object()) throw ValidationError("utility document must be a JSON object");
  auto actions = string_list(doc, "actions");
  auto labels = string_list(doc, "labels");
  if (!doc.contains("utilities") || !doc["utilities"].is_array())
    throw ValidationError("utility document needs an array 'utilities'");
  std::vector<std::vector<double>> rows;
  for (std::size_t a = 0; a < doc["utilities"].size(); ++a)
    rows.push_back(number_list(doc["utilities"][a], "utilities row " + std::to_string(a)));
  return UtilityMatrix::with_auto_shift(std::move(actions), std::move(labels), std::move(rows));
}

UtilityMatrix load_utility_file(const std::filesystem::path& path) { return load_utility(read_text_file(path)); }

std::string dump_utility(const UtilityMatrix& u) {
  Json doc;
  doc["actions"] = u.action_names();
  doc["labels"] = u.label_names();
  Json rows = Json::array();
  for (ActionIndex a = 0; a < u.num_actions(); ++a) {
    Json row = Json::array();
    for (LabelIndex y = 0; y < u.num_labels(); ++y) row.push_back(json_number(u.declared(a, y)));
    rows.push_back(std::move(row));
  }
  doc["utilities"] = std::move(rows);
  return doc.dump();
}

std::vector<ForecastRow> read_forecast_rows(std::istream& in, const UtilityMatrix& u, double epsilon) {
  std::vector<ForecastRow> rows;
  for_each_jsonl(in, "data", [&](const Json& row, const std::string& where) {
    if (!row.contains("p")) throw ValidationError(where + ": missing 'p'");
    const auto p = number_list(row["p"], where);
    if (p.size() != u.num_labels())
      throw ValidationError(where + ": forecast has " + std::to_string(p.size()) + " entries, expected " +
                            std::to_string(u.num_labels()));
    std::optional<LabelIndex> label;
    if (row.contains("y") && !row["y"].is_null()) label = label_of(row["y"], u, where);
    try {
      rows.push_back({smooth_forecast(p, epsilon), label});
    } catch (const ValidationError& e) {
      throw ValidationError(where + ": " + e.what());
    }
  });
  return rows;
}

std::vector<ForecastRow> read_forecast_file(const std::filesystem::path& path, const UtilityMatrix& u,
                                            double epsilon) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open '" + path.string() + "'");
  return read_forecast_rows(in, u, epsilon);
}

Dataset to_dataset(const std::vector<ForecastRow>& rows, std::size_t num_labels) {
  Dataset d(num_labels);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (!rows[i].label) throw ValidationError("data row " + std::to_string(i + 1) + " has no label 'y'");
    d.push_back({rows[i].forecast, *rows[i].label});
  }
  return d;
}

std::vector<Forecast> forecasts_of(const std::vector<ForecastRow>& rows) {
  std::vector<Forecast> out;
  out.reserve(rows.size());
  for (const auto& r : rows) out.push_back(r.forecast);
  return out;
}

std::string forecast_row_json(const UtilityMatrix& u, const Forecast& f, std::optional<LabelIndex> label) {
  Json row;
  row["p"] = Json(std::vector<double>(f.probs().begin(), f.probs().end()));
  if (label) row["y"] = u.label_names().at(*label);
  return row.dump();
}

FinitePopulation load_population(std::string_view json_text) {
  const Json doc = parse_json(json_text, "population document");
  if (!doc.is_object() || !doc.contains("atoms") || !doc["atoms"].is_array())
    throw ValidationError("population document needs an array 'atoms'");
  std::vector<PopulationAtom> atoms;
  for (std::size_t i = 0; i < doc["atoms"].size(); ++i) {
    const auto& a = doc["atoms"][i];
    const std::string where = "atom " + std::to_string(i);
    if (!a.is_object() || !a.contains("w") || !a.contains("q")) throw ValidationError(where + ": needs 'w' and 'q'");
    atoms.push_back({number_of(a["w"], where), Forecast(number_list(a["q"], where))});
  }
  return FinitePopulation(std::move(atoms));
}

FinitePopulation load_population_file(const std::filesystem::path& path) {
  return load_population(read_text_file(path));
}

std::string dump_population(const FinitePopulation& pop) {
  Json atoms = Json::array();
  for (const auto& a : pop) {
    Json atom;
    atom["w"] = a.weight;
    atom["q"] = Json(std::vector<double>(a.conditional.probs().begin(), a.conditional.probs().end()));
    atoms.push_back(std::move(atom));
  }
  Json doc;
  doc["atoms"] = std::move(atoms);
  return doc.dump();
}

Json label_names_json(const UtilityMatrix& u, const PredictionSet& set) {
  Json names = Json::array();
  for (LabelIndex y : set.members()) names.push_back(u.label_names()[y]);
  return names;
}

Json decision_json(const UtilityMatrix& u, const CertifiedDecision& d) {
  Json row;
  row["set"] = label_names_json(u, d.set);
  row["action"] = u.action_names().at(d.action);
  row["certificate"] = u.unshift(d.value);
  if (d.empty_set) row["empty_set"] = true;
  return row;
}

std::vector<PredictionSet> read_external_sets(std::istream& in, const UtilityMatrix& u) {
  std::vector<PredictionSet> out;
  for_each_jsonl(in, "sets", [&](const Json& row, const std::string& where) {
    if (!row.contains("set") || !row["set"].is_array()) throw ValidationError(where + ": needs an array 'set'");
    PredictionSet s(u.num_labels());
    for (const auto& v : row["set"]) s.insert(label_of(v, u, where));
    out.push_back(std::move(s));
  });
  return out;
}

std::string menu_jsonl(const UtilityMatrix& u, const CoverageMenu& menu) {
  std::string out;
  for (const auto& e : menu.entries()) {
    Json row;
    row["s"] = e.coverage;
    row["v"] = u.unshift(e.value);
    row["a"] = u.action_names().at(e.action);
    out += row.dump();
    out += '\n';
  }
  return out;
}

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

}  // namespace rac
