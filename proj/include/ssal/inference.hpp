#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "ssal/advi.hpp"
#include "ssal/data.hpp"
#include "ssal/nuts.hpp"
#include "ssal/params.hpp"
#include "ssal/rng.hpp"
#include "ssal/simulate.hpp"

namespace ssal {

enum class Engine { kNuts, kAdvi };
enum class MissingMode { kNone, kIgnorable, kNonignorable };

std::string to_string(Engine engine);
std::string to_string(MissingMode mode);
Engine parse_engine(const std::string& text);
MissingMode parse_missing_mode(const std::string& text);

/// Alternation of outcome imputation and ADVI ascent.
struct ImputationSchedule {
  std::size_t advi_interval = 25;  // ascent iterations between imputations
  std::size_t final_rounds = 10;   // retained terminal imputations
  std::size_t final_iters = 25;    // ascent iterations after each terminal imputation
};

/// Continuation in the spike scale for ADVI. Stages run at each v0 in the
/// ladder (those above the target v0), then at the target itself. The step
/// size of a stage is step_size * sqrt(v0_stage / ladder.front()).
struct SpikeAnnealing {
  std::vector<double> v0_ladder = {1e-2, 3e-3, 1e-3, 3e-4, 1e-4, 3e-5, 1e-5, 3e-6};
  std::size_t stage_iters = 3000;
};

/// ADVI settings used by fit(): Stan-style adaptive steps, with the trace
/// evaluated every fifth iteration.
AdviConfig default_fit_advi_config();

struct FitSpec {
  Engine engine = Engine::kAdvi;
  MissingMode missing_mode = MissingMode::kIgnorable;
  bool multislice = false;
  std::vector<std::pair<std::size_t, std::size_t>> interaction_pairs;
  std::optional<double> fixed_eta;  // 0 gives the naive non-spatial comparator
  std::optional<double> fixed_w;
  NutsConfig nuts;
  AdviConfig advi = default_fit_advi_config();
  std::optional<SpikeAnnealing> annealing = SpikeAnnealing{};
  ImputationSchedule imputation;
  std::size_t posterior_draws = 4000;  // ADVI draws behind the summaries
  std::uint64_t seed = 1;

  void validate() const;
};

struct ParameterSummary {
  std::string name;
  double mean = 0.0;
  double sd = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
};

struct CovariateSummary {
  std::size_t index = 0;
  std::string name;
  double mean = 0.0;
  double sd = 0.0;
  double ratio = 0.0;      // mean / sd; +inf when sd = 0
  double inclusion = 0.0;  // mean slab responsibility
};

struct PosteriorSummary {
  std::vector<ParameterSummary> parameters;
  std::vector<CovariateSummary> covariates;

  /// Throws InputError if no parameter has this name.
  [[nodiscard]] const ParameterSummary& at(const std::string& name) const;
  [[nodiscard]] const ParameterSummary* find(const std::string& name) const;
};

/// Equal-tailed 95% summaries of a draws matrix (one draw per row).
PosteriorSummary summarize(const Eigen::MatrixXd& theta_draws, const std::vector<std::string>& names,
                           const ParamLayout& layout, double v0, const std::vector<std::string>& covariates);

/// Linear-interpolated empirical quantile of a sample.
double quantile(std::vector<double> values, double q);

struct FitResult {
  Engine engine = Engine::kAdvi;
  ModelVariant variant;
  ParamLayout layout;
  Hyperparams hyper;
  std::vector<std::string> names;
  std::vector<std::string> covariate_names;
  Eigen::MatrixXd draws;  // theta draws, one per row
  PosteriorSummary summary;
  ModelParams posterior_mean;
  std::optional<VariationalState> variational;
  std::vector<double> elbo_trace;
  std::size_t iterations = 0;
  bool converged = true;
  std::optional<ChainDiagnostics> chain;
  Outcomes imputed;  // outcome buffer after the last imputation
  double seconds = 0.0;
  std::vector<std::string> warnings;
};

/// Draws each missing outcome from Bernoulli(mean of the current neighbor
/// values); spots without neighbors use the slice's observed prevalence.
/// Spots are visited in index order and see earlier updates.
void impute_missing(const StudyData& study, Outcomes& current, Rng& rng);

/// Missing spots filled with Bernoulli(observed prevalence).
Outcomes initial_imputation(const StudyData& study, Rng& rng);

/// Runs the configured engine, alternating with imputation when the study
/// has missing outcomes. Throws InputError for a study these settings cannot fit
/// and EngineError when the engine fails.
FitResult fit(const StudyData& study, const Hyperparams& hyper, const FitSpec& spec);

struct SelectedCovariate {
  std::size_t index = 0;
  std::string name;
  double ratio = 0.0;
};

inline constexpr std::size_t kDefaultTopK = 30;

/// Covariates with |ratio| >= threshold ranked by |ratio|, truncated to
/// top_k when given.
std::vector<SelectedCovariate> select_genes(const PosteriorSummary& summary, double threshold = 1.96,
                                            std::optional<std::size_t> top_k = std::nullopt);

/// All unordered pairs of the given covariate indices.
std::vector<std::pair<std::size_t, std::size_t>> all_pairs(const std::vector<std::size_t>& indices);

/// Appends the column x_a * x_b for each pair, named "a:b". Duplicate pairs
/// are dropped with a warning; an index out of range throws InputError.
StudyData expand_interactions(const StudyData& study, const std::vector<std::pair<std::size_t, std::size_t>>& pairs);

enum class PredictionMethod { kFixedPoint, kGibbs };

struct PredictOptions {
  double cutoff = 0.5;
  PredictionMethod method = PredictionMethod::kFixedPoint;
  double tolerance = 1e-6;
  std::size_t max_iters = 500;
  std::optional<double> start;      // constant start instead of the covariate-only fit
  std::optional<double> offset;     // slice random effect; default from params.U when defined
  std::size_t gibbs_burnin = 200;
  std::size_t gibbs_sweeps = 1000;
  std::uint64_t seed = 1;
};

struct Prediction {
  Eigen::VectorXd mu_hat;
  std::vector<int> labels;
  std::optional<double> accuracy;  // over observed spots
  std::size_t iterations = 0;
  bool converged = true;
};

/// Spot-level probabilities for a slice. The fixed-point method iterates
/// mu_i = sigmoid(beta' x_i + eta * mean_{N(i)} mu_j + U) simultaneously; the
/// Gibbs method averages conditional means along a sampled outcome chain.
Prediction predict(const ModelParams& params, const SliceData& slice, const PredictOptions& options = {});

struct ParameterReport {
  std::string parameter;
  double avg_bias = 0.0;
  std::optional<double> avg_see;  // undefined for a single replicate
  double avg_sem = 0.0;
  double avg_cr = 0.0;
};

struct ReplicateResult {
  std::size_t replicate = 0;
  bool ok = false;
  std::string error;
  PosteriorSummary summary;
  std::vector<std::pair<std::string, double>> truth;
  double seconds = 0.0;
};

struct SimulationReport {
  std::vector<ParameterReport> rows;
  std::size_t replicates = 0;
  std::size_t successes = 0;
  std::vector<ReplicateResult> results;
  double mean_seconds = 0.0;
  double total_seconds = 0.0;
  std::string see_note;  // reason when avgSEE is undefined
};

/// Fits one simulated replicate; returns its posterior summary.
using ReplicateFitter = std::function<PosteriorSummary(const SimulatedStudy& sim, std::size_t replicate)>;

/// Generating values of eta, beta, sigma2, rho and (for nonignorable
/// designs) gamma, keyed by summary name.
std::vector<std::pair<std::string, double>> reported_truth(const SimulatedStudy& sim);

/// Replicate r simulates with seed generator.seed + r. Rows cover the true
/// parameters that the fitted summaries contain. Replicates run on `threads`
/// workers (0: hardware concurrency); results do not depend on it.
SimulationReport simulation_report(const SimConfig& generator, std::size_t n_replicates,
                                   const ReplicateFitter& fitter, std::size_t threads = 0);

/// Fits each replicate with `spec`, seeding the fit with spec.seed + r.
SimulationReport simulation_report(const SimConfig& generator, const Hyperparams& hyper, const FitSpec& spec,
                                   std::size_t n_replicates, std::size_t threads = 0);

/// simulate_multislice when the config has a multislice block, else simulate.
SimulatedStudy simulate_any(const SimConfig& config);

}  // namespace ssal
