#pragma once

#include "json.hpp"
#include <optional>
#include <string>
#include <vector>

#include "ssal/advi.hpp"
#include "ssal/data.hpp"
#include "ssal/inference.hpp"
#include "ssal/lattice.hpp"
#include "ssal/simulate.hpp"

namespace ssal::io {

using nlohmann::json;

/// Whole file as text; paths ending in ".gz" are decompressed. Throws
/// IoError naming the path.
std::string read_text(const std::string& path);

/// Writes to `path + ".partial"` then renames over `path`, so an interrupted
/// run never leaves a truncated final file. ".gz" paths are compressed.
void write_text(const std::string& path, const std::string& content);

/// RFC 4180 fields of one line (quotes allowed, no embedded newlines).
std::vector<std::string> split_csv_line(const std::string& line);

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::vector<std::size_t> line_numbers;  // 1-based source line of each row
};

/// Parses CSV text; `source` names the input in error messages.
CsvTable parse_csv(const std::string& text, const std::string& source);

struct ReadOptions {
  bool counts = false;                    // apply log(X + 1) to covariates
  std::optional<double> min_total_count;  // drop covariates whose column total is below this
  double delta = 1.0;
  bool multislice = false;
  bool allow_unequal = false;              // pad donors with fewer slices
  CorrelationStructure structure = CorrelationStructure::kExchangeable;
};

/// Reads one or more dataset files. Columns: spot_id, row and col (or
/// x_coord and y_coord), donor_id, slice_id, y (0, 1 or NA), then one column
/// per covariate. Slices are keyed by (donor_id, slice_id) and ordered by
/// donor then slice. Throws InputError naming the file, line and field.
StudyData read_dataset(const std::vector<std::string>& paths, const ReadOptions& options = {});

/// Dataset CSV text; missing outcomes are written as NA.
std::string dataset_csv(const StudyData& study);

json params_json(const ModelParams& params);
ModelParams params_from_json(const json& j);

/// Generating configuration and parameters of a simulated study.
json truth_json(const SimulatedStudy& sim);

/// parameter, mean, sd, ci_low, ci_high, ratio, selected. Ratio and the
/// selection flag are filled for coefficients only.
std::string summary_csv(const PosteriorSummary& summary, const std::vector<std::string>& names,
                        double threshold = 1.96);

/// parameter, avgBias, avgSEE, avgSEM, avgCR; a footer comment discloses
/// failed replicates and why avgSEE is NA.
std::string report_csv(const SimulationReport& report);

/// Per-spot predictions: spot_id, x_coord, y_coord, mu_hat[, label].
std::string prediction_csv(const SliceData& slice, const Prediction& prediction, bool probabilistic);

/// Long table of spot values for plotting: donor_id, slice_id, spot_id,
/// x_coord, y_coord, value.
std::string lattice_table_csv(const StudyData& study, const std::vector<std::vector<double>>& values);

/// Everything predict needs from a fit, plus the summary.
struct FittedModel {
  Engine engine = Engine::kAdvi;
  ModelVariant variant;
  Hyperparams hyper;
  std::vector<std::string> covariate_names;
  ModelParams posterior_mean;
  std::optional<VariationalState> variational;
  std::vector<std::pair<std::size_t, std::size_t>> interaction_pairs;
};

json model_json(const FitResult& result, const std::vector<std::pair<std::size_t, std::size_t>>& pairs);
FittedModel model_from_json(const json& j);

json hyper_json(const Hyperparams& h);
json diagnostics_json(const FitResult& result);

}  // namespace ssal::io
