#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "rac/decision.hpp"
#include "rac/menu.hpp"
#include "rac/model.hpp"
#include "rac/population.hpp"

namespace rac {

using Json = nlohmann::ordered_json;

std::string read_text_file(const std::filesystem::path& path);

/// Parses {"actions":[...],"labels":[...],"utilities":[[...]]}.
///
/// The table is action-major: utilities[a][y] is the utility of action a
/// under label y (the transpose of a table printed with true labels as rows).
/// Negative entries are accepted and shifted; `declared()` keeps them.
UtilityMatrix load_utility(std::string_view json_text);
UtilityMatrix load_utility_file(const std::filesystem::path& path);

/// Serializes the declared entries; load_utility(dump_utility(u)) reproduces u.
std::string dump_utility(const UtilityMatrix& u);

/// One JSONL data row: a smoothed forecast and an optional label.
struct ForecastRow {
  Forecast forecast;
  std::optional<LabelIndex> label;
};

/// Reads {"p":[...],"y":<name or index>} rows; blank lines are skipped and
/// "y" may be absent. Every forecast is smoothed with `epsilon`.
std::vector<ForecastRow> read_forecast_rows(std::istream& in, const UtilityMatrix& u, double epsilon);
std::vector<ForecastRow> read_forecast_file(const std::filesystem::path& path, const UtilityMatrix& u,
                                            double epsilon);

/// Throws ValidationError when a row has no label.
Dataset to_dataset(const std::vector<ForecastRow>& rows, std::size_t num_labels);
std::vector<Forecast> forecasts_of(const std::vector<ForecastRow>& rows);

/// Writes a data row with the label by name.
std::string forecast_row_json(const UtilityMatrix& u, const Forecast& f, std::optional<LabelIndex> label);

/// {"atoms":[{"w":...,"q":[...]}]}
FinitePopulation load_population(std::string_view json_text);
FinitePopulation load_population_file(const std::filesystem::path& path);
std::string dump_population(const FinitePopulation& pop);

Json label_names_json(const UtilityMatrix& u, const PredictionSet& set);

/// {"set":[names],"action":name,"certificate":value}, certificate on the
/// declared scale; "empty_set":true is added when the set is empty.
Json decision_json(const UtilityMatrix& u, const CertifiedDecision& d);

/// Reads {"set":[names or indices]} rows of externally built sets.
std::vector<PredictionSet> read_external_sets(std::istream& in, const UtilityMatrix& u);

/// One {"s":...,"v":...,"a":name} line per entry, v on the declared scale.
std::string menu_jsonl(const UtilityMatrix& u, const CoverageMenu& menu);

/// Shortest decimal that round-trips to the same double.
std::string format_double(double v);

}  // namespace rac
