#pragma once

#include <optional>
#include <string>

#include "ssal/inference.hpp"
#include "ssal/io.hpp"
#include "ssal/params.hpp"
#include "ssal/simulate.hpp"

namespace ssal {

/// Environment variable naming the default run-config file.
inline constexpr const char* kConfigEnv = "SSAL_CONFIG";

struct SelectSettings {
  double threshold = 1.96;
  std::optional<std::size_t> top_k;
};

/// Every tunable of a run. JSON sections: hyper, fit (with nuts, advi,
/// annealing, imputation), simulate (optionally starting from a preset),
/// data, predict, select.
struct RunConfig {
  Hyperparams hyper;
  FitSpec fit;
  SimConfig simulate = default_sim_config();
  std::optional<std::string> preset;
  io::ReadOptions data;
  PredictOptions predict;
  SelectSettings select;

  /// Throws ConfigError naming the offending field.
  void validate() const;
};

/// Applies a JSON document over the defaults. Unknown keys and wrongly typed
/// values throw ConfigError with the dotted field path.
RunConfig parse_run_config(const nlohmann::json& doc, const std::string& source = "config");
RunConfig load_run_config(const std::string& path);
nlohmann::json to_json(const RunConfig& config);

/// Path from the environment variable, if set and non-empty.
std::optional<std::string> default_config_path();

}  // namespace ssal
