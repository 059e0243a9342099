#include "cli.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <filesystem>
#include <iomanip>
#include <iostream>
#include <map>
#include <set>
#include <sstream>

#include "ssal/config.hpp"
#include "ssal/errors.hpp"
#include "ssal/inference.hpp"
#include "ssal/io.hpp"
#include "ssal/log.hpp"
#include "ssal/simulate.hpp"

namespace ssal::cli {

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

/// Exact shortest decimal form, as in the CSV outputs.
std::string exact(double v) {
  std::ostringstream s;
  s << std::setprecision(17) << v;
  double back = 0.0;
  for (int p = 1; p <= 17; ++p) {
    std::ostringstream t;
    t << std::setprecision(p) << v;
    back = std::stod(t.str());
    if (back == v) return t.str();
  }
  return s.str();
}

void set_path(json& doc, const std::string& dotted, json value) {
  json* node = &doc;
  std::size_t start = 0;
  while (true) {
    const std::size_t dot = dotted.find('.', start);
    const std::string key = dotted.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    if (key.empty()) throw ConfigError("malformed field path '" + dotted + "'");
    if (!node->is_object()) *node = json::object();
    if (dot == std::string::npos) {
      (*node)[key] = std::move(value);
      return;
    }
    node = &(*node)[key];
    start = dot + 1;
  }
}

json parse_value(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error&) {
    return json(text);
  }
}

/// Options shared by every subcommand: config file, field overrides, quiet.
struct Common {
  std::string config_path;
  std::vector<std::string> sets;
  bool quiet = false;

  void attach(CLI::App* app) {
    app->add_option("--config", config_path, "Run-config JSON (default: $" + std::string(kConfigEnv) + ")");
    app->add_option("--set", sets, "Override a config field, e.g. --set fit.advi.step_size=0.05")->take_all();
    app->add_flag("--quiet", quiet, "Suppress warnings");
  }

  json load() const {
    json doc = json::object();
    std::string path = config_path;
    if (path.empty()) path = default_config_path().value_or("");
    if (!path.empty()) {
      try {
        doc = json::parse(io::read_text(path));
      } catch (const json::parse_error& e) {
        throw ConfigError(path + ": invalid JSON: " + e.what());
      }
    }
    for (const auto& s : sets) {
      const auto eq = s.find('=');
      if (eq == std::string::npos) throw ConfigError("--set expects field=value, got '" + s + "'");
      set_path(doc, s.substr(0, eq), parse_value(s.substr(eq + 1)));
    }
    return doc;
  }
};

/// Flags that are shortcuts for config fields.
struct FitFlags {
  std::string engine, missing_mode, structure, schedule;
  bool multislice = false, allow_unequal = false, counts = false, naive = false, no_annealing = false;
  std::optional<double> min_total_count, fixed_eta, fixed_w, v0, c1, delta, step_size, epsilon;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> draws, max_iters, warmup, nuts_draws;

  void attach(CLI::App* app, bool engine_flag = true) {
    if (engine_flag) app->add_option("--engine", engine, "advi or nuts")->check(CLI::IsMember({"advi", "nuts"}));
    app->add_option("--missing-mode", missing_mode, "none, ignorable or nonignorable")
        ->check(CLI::IsMember({"none", "ignorable", "nonignorable"}));
    app->add_flag("--multislice", multislice, "Fit slice random effects");
    app->add_flag("--allow-unequal", allow_unequal, "Pad donors with fewer slices");
    app->add_option("--structure", structure, "exchangeable or autoregressive")
        ->check(CLI::IsMember({"exchangeable", "autoregressive"}));
    app->add_flag("--counts", counts, "Covariates are raw counts: apply log(X+1)");
    app->add_option("--min-total-count", min_total_count, "Drop covariates whose total is below this");
    app->add_flag("--naive", naive, "Freeze eta at 0 (non-spatial model)");
    app->add_option("--fixed-eta", fixed_eta, "Freeze eta at this value");
    app->add_option("--fixed-w", fixed_w, "Freeze the inclusion weight");
    app->add_option("--v0", v0, "Spike variance scale");
    app->add_option("--c1", c1, "Upper bound of eta's prior");
    app->add_option("--delta", delta, "Neighbor radius");
    app->add_option("--seed", seed, "Fit seed");
    app->add_option("--posterior-draws", draws, "ADVI draws behind the summaries");
    app->add_option("--schedule", schedule, "ADVI step schedule")
        ->check(CLI::IsMember({"constant", "robbins-monro", "adaptive"}));
    app->add_option("--step-size", step_size, "ADVI base step size");
    app->add_option("--max-iters", max_iters, "ADVI iteration cap");
    app->add_flag("--no-annealing", no_annealing, "Skip the spike-scale continuation");
    app->add_option("--epsilon", epsilon, "NUTS step size");
    app->add_option("--warmup", warmup, "NUTS warmup transitions");
    app->add_option("--draws", nuts_draws, "NUTS retained draws");
  }

  void apply(json& doc) const {
    if (!engine.empty()) set_path(doc, "fit.engine", engine);
    if (!missing_mode.empty()) set_path(doc, "fit.missing_mode", missing_mode);
    if (multislice) set_path(doc, "fit.multislice", true);
    if (allow_unequal) set_path(doc, "data.allow_unequal", true);
    if (!structure.empty()) set_path(doc, "data.structure", structure);
    if (counts) set_path(doc, "data.counts", true);
    if (min_total_count) set_path(doc, "data.min_total_count", *min_total_count);
    if (naive) set_path(doc, "fit.fixed_eta", 0.0);
    if (fixed_eta) set_path(doc, "fit.fixed_eta", *fixed_eta);
    if (fixed_w) set_path(doc, "fit.fixed_w", *fixed_w);
    if (v0) set_path(doc, "hyper.v0", *v0);
    if (c1) set_path(doc, "hyper.c1", *c1);
    if (delta) set_path(doc, "hyper.delta", *delta);
    if (seed) set_path(doc, "fit.seed", *seed);
    if (draws) set_path(doc, "fit.posterior_draws", *draws);
    if (!schedule.empty()) set_path(doc, "fit.advi.schedule", schedule);
    if (step_size) set_path(doc, "fit.advi.step_size", *step_size);
    if (max_iters) set_path(doc, "fit.advi.max_iters", *max_iters);
    if (no_annealing) set_path(doc, "fit.annealing.enabled", false);
    if (epsilon) set_path(doc, "fit.nuts.epsilon", *epsilon);
    if (warmup) set_path(doc, "fit.nuts.warmup", *warmup);
    if (nuts_draws) set_path(doc, "fit.nuts.draws", *nuts_draws);
  }
};

std::string join(const std::vector<std::string>& v) {
  std::string out;
  for (const auto& s : v) out += (out.empty() ? "" : ", ") + s;
  return out;
}

std::string in_dir(const std::string& dir, const std::string& name) { return (fs::path(dir) / name).string(); }

std::string selected_csv(const std::vector<SelectedCovariate>& sel) {
  std::ostringstream s;
  s << "rank,covariate,ratio\n";
  for (std::size_t i = 0; i < sel.size(); ++i) s << i + 1 << ',' << sel[i].name << ',' << exact(sel[i].ratio) << '\n';
  return s.str();
}

std::string draws_csv(const FitResult& r) {
  std::ostringstream s;
  for (std::size_t j = 0; j < r.names.size(); ++j) s << (j ? "," : "") << r.names[j];
  s << '\n';
  for (Eigen::Index i = 0; i < r.draws.rows(); ++i) {
    for (Eigen::Index j = 0; j < r.draws.cols(); ++j) s << (j ? "," : "") << exact(r.draws(i, j));
    s << '\n';
  }
  return s.str();
}

std::string edges_csv(const FitResult& r, const std::vector<std::pair<std::size_t, std::size_t>>& pairs,
                      const std::vector<std::string>& base, double threshold) {
  std::ostringstream s;
  s << "covariate_a,covariate_b,mean,sd,ratio,selected\n";
  const std::size_t d0 = base.size();
  for (std::size_t p = 0; p < pairs.size() && d0 + p < r.summary.covariates.size(); ++p) {
    const auto& c = r.summary.covariates[d0 + p];
    s << base[pairs[p].first] << ',' << base[pairs[p].second] << ',' << exact(c.mean) << ',' << exact(c.sd) << ','
      << exact(c.ratio) << ',' << (std::abs(c.ratio) >= threshold ? 1 : 0) << '\n';
  }
  return s.str();
}

void print_summary(std::ostream& out, const PosteriorSummary& s) {
  out << std::left << std::setw(18) << "parameter" << std::right << std::setw(11) << "mean" << std::setw(11) << "sd"
      << std::setw(11) << "ci_low" << std::setw(11) << "ci_high" << '\n';
  for (const auto& p : s.parameters) {
    if (p.name.rfind("tau2[", 0) == 0) continue;
    out << std::left << std::setw(18) << p.name << std::right << std::fixed << std::setprecision(4) << std::setw(11)
        << p.mean << std::setw(11) << p.sd << std::setw(11) << p.ci_low << std::setw(11) << p.ci_high << '\n';
  }
  out.unsetf(std::ios::floatfield);
}

int cmd_simulate(const Common& common, const std::string& preset_name, const std::string& out_dir,
                 std::string name, std::optional<std::uint64_t> seed, bool gz, std::ostream& out) {
  json doc = common.load();
  if (!preset_name.empty()) set_path(doc, "simulate.preset", preset_name);
  if (seed) set_path(doc, "simulate.seed", *seed);
  const RunConfig config = parse_run_config(doc, common.config_path.empty() ? "config" : common.config_path);
  if (name.empty()) name = config.preset.value_or("simulated");
  const SimulatedStudy sim = simulate_any(config.simulate);
  const std::string data_path = in_dir(out_dir, name + (gz ? ".csv.gz" : ".csv"));
  io::write_text(data_path, io::dataset_csv(sim.study));
  io::write_text(in_dir(out_dir, name + ".truth.json"), io::truth_json(sim).dump(2) + "\n");
  std::vector<std::vector<double>> truth_values;
  for (const auto& y : sim.complete) truth_values.emplace_back(y.begin(), y.end());
  io::write_text(in_dir(out_dir, name + ".truth_lattice.csv"), io::lattice_table_csv(sim.study, truth_values));
  out << "wrote " << data_path << ": " << sim.study.total_spots() << " spots, " << sim.study.d() << " covariates, "
      << sim.study.slices.size() << " slice(s), " << sim.study.total_missing() << " missing outcomes\n";
  return kExitOk;
}

int cmd_fit(const Common& common, const FitFlags& flags, const std::vector<std::string>& data,
            const std::string& out_dir, std::optional<double> threshold, std::optional<std::size_t> top_k,
            std::optional<std::size_t> interact_top, std::ostream& out) {
  json doc = common.load();
  flags.apply(doc);
  if (threshold) set_path(doc, "select.threshold", *threshold);
  if (top_k) set_path(doc, "select.top_k", *top_k);
  const RunConfig config = parse_run_config(doc, common.config_path.empty() ? "config" : common.config_path);
  const StudyData study = io::read_dataset(data, config.data);
  out << "read " << study.total_spots() << " spots, " << study.d() << " covariates, " << study.slices.size()
      << " slice(s), " << study.total_missing() << " missing outcomes\n";

  const FitResult result = fit(study, config.hyper, config.fit);
  io::write_text(in_dir(out_dir, "summary.csv"), io::summary_csv(result.summary, result.names, config.select.threshold));
  io::write_text(in_dir(out_dir, "model.json"), io::model_json(result, config.fit.interaction_pairs).dump(2) + "\n");
  json diag = io::diagnostics_json(result);
  diag["config"] = to_json(config);
  io::write_text(in_dir(out_dir, "diagnostics.json"), diag.dump(2) + "\n");
  if (result.engine == Engine::kNuts) io::write_text(in_dir(out_dir, "draws.csv"), draws_csv(result));
  const auto selected = select_genes(result.summary, config.select.threshold, config.select.top_k);
  io::write_text(in_dir(out_dir, "selected.csv"), selected_csv(selected));
  if (study.total_missing() > 0) {
    std::vector<std::vector<double>> imputed;
    for (const auto& y : result.imputed) imputed.emplace_back(y.begin(), y.end());
    io::write_text(in_dir(out_dir, "imputed_lattice.csv"), io::lattice_table_csv(study, imputed));
  }
  print_summary(out, result.summary);
  out << "selected " << selected.size() << " covariate(s) at |ratio| >= " << config.select.threshold;
  if (!selected.empty()) {
    std::vector<std::string> names;
    for (const auto& s : selected) names.push_back(s.name);
    out << ": " << join(names);
  }
  out << "\n" << to_string(result.engine) << " finished in " << std::fixed << std::setprecision(1) << result.seconds
      << " s\n";
  out.unsetf(std::ios::floatfield);

  if (interact_top) {
    const auto top = select_genes(result.summary, 0.0, *interact_top);
    std::vector<std::size_t> idx;
    for (const auto& s : top) idx.push_back(s.index);
    std::sort(idx.begin(), idx.end());
    FitSpec spec = config.fit;
    spec.interaction_pairs = all_pairs(idx);
    out << "refitting with " << spec.interaction_pairs.size() << " interactions among the top " << idx.size()
        << " covariates\n";
    const FitResult inter = fit(study, config.hyper, spec);
    io::write_text(in_dir(out_dir, "interaction_summary.csv"),
                   io::summary_csv(inter.summary, inter.names, config.select.threshold));
    io::write_text(in_dir(out_dir, "interaction_model.json"),
                   io::model_json(inter, spec.interaction_pairs).dump(2) + "\n");
    io::write_text(in_dir(out_dir, "interaction_edges.csv"),
                   edges_csv(inter, spec.interaction_pairs, study.covariate_names, config.select.threshold));
  }
  return kExitOk;
}

/// Reorders the dataset's covariates to the model's; throws listing the
/// missing and extra names when the sets differ.
StudyData align_covariates(StudyData study, const std::vector<std::string>& expected) {
  const auto& have = study.covariate_names;
  std::set<std::string> h(have.begin(), have.end()), e(expected.begin(), expected.end());
  std::vector<std::string> missing, extra;
  for (const auto& n : expected) {
    if (!h.count(n)) missing.push_back(n);
  }
  for (const auto& n : have) {
    if (!e.count(n)) extra.push_back(n);
  }
  if (!missing.empty() || !extra.empty()) {
    throw InputError("dataset covariates do not match the model: missing [" + join(missing) + "], extra [" +
                     join(extra) + "]");
  }
  if (have == expected) return study;
  std::map<std::string, Eigen::Index> pos;
  for (std::size_t k = 0; k < have.size(); ++k) pos[have[k]] = static_cast<Eigen::Index>(k);
  for (auto& s : study.slices) {
    Eigen::MatrixXd x(s.x.rows(), static_cast<Eigen::Index>(expected.size()));
    for (std::size_t k = 0; k < expected.size(); ++k) x.col(static_cast<Eigen::Index>(k)) = s.x.col(pos[expected[k]]);
    s.x = std::move(x);
  }
  study.covariate_names = expected;
  return study;
}

int cmd_predict(const Common& common, const std::string& model_path, const std::string& data_path,
                const std::string& out_path, std::optional<double> cutoff, bool probabilistic,
                const std::string& method, bool counts, std::ostream& out) {
  json doc = common.load();
  if (cutoff) set_path(doc, "predict.cutoff", *cutoff);
  if (!method.empty()) set_path(doc, "predict.method", method);
  if (counts) set_path(doc, "data.counts", true);
  const RunConfig config = parse_run_config(doc, common.config_path.empty() ? "config" : common.config_path);
  json mj;
  try {
    mj = json::parse(io::read_text(model_path));
  } catch (const json::parse_error& e) {
    throw InputError(model_path + ": invalid JSON: " + e.what());
  }
  const io::FittedModel model = io::model_from_json(mj);
  io::ReadOptions ro = config.data;
  ro.delta = model.hyper.delta;
  ro.multislice = false;
  ro.min_total_count.reset();
  StudyData study = io::read_dataset({data_path}, ro);
  const std::size_t base_d = model.variant.d - model.interaction_pairs.size();
  const std::vector<std::string> base(model.covariate_names.begin(),
                                      model.covariate_names.begin() + static_cast<std::ptrdiff_t>(base_d));
  study = align_covariates(std::move(study), base);
  if (!model.interaction_pairs.empty()) study = expand_interactions(study, model.interaction_pairs);

  std::size_t observed = 0;
  double correct = 0.0;
  for (std::size_t s = 0; s < study.slices.size(); ++s) {
    const SliceData& slice = study.slices[s];
    const Prediction p = predict(model.posterior_mean, slice, config.predict);
    std::string path = out_path;
    if (study.slices.size() > 1) {
      const fs::path base_path(out_path);
      path = (base_path.parent_path() / (base_path.stem().string() + "_d" + std::to_string(slice.donor_id) + "_s" +
                                         std::to_string(slice.slice_id) + base_path.extension().string()))
                 .string();
    }
    io::write_text(path, io::prediction_csv(slice, p, probabilistic));
    out << "wrote " << path << "\n";
    if (p.accuracy && !probabilistic) {
      const std::size_t n_obs = slice.size() - slice.missing_count();
      observed += n_obs;
      correct += *p.accuracy * static_cast<double>(n_obs);
      out << "accuracy (donor " << slice.donor_id << ", slice " << slice.slice_id << "): " << exact(*p.accuracy)
          << "\n";
    }
  }
  if (study.slices.size() > 1 && observed > 0) {
    out << "accuracy (all slices): " << exact(correct / static_cast<double>(observed)) << "\n";
  }
  return kExitOk;
}

int cmd_report(const Common& common, FitFlags flags, const std::string& preset_name, std::size_t replicates,
               const std::string& engines_text, bool with_naive, std::size_t threads, const std::string& out_dir,
               std::ostream& out) {
  json doc = common.load();
  if (!preset_name.empty()) set_path(doc, "simulate.preset", preset_name);
  flags.engine.clear();
  flags.apply(doc);
  const RunConfig config = parse_run_config(doc, common.config_path.empty() ? "config" : common.config_path);
  if (replicates == 0) throw ConfigError("--replicates must be positive");
  std::vector<Engine> engines;
  std::stringstream ss(engines_text);
  for (std::string tok; std::getline(ss, tok, ',');) engines.push_back(parse_engine(tok));
  if (engines.empty()) throw ConfigError("--engines lists no engine");

  FitSpec base = config.fit;
  if (config.simulate.multislice) base.multislice = true;
  if (config.simulate.missingness.kind == MissingnessKind::kNonignorable &&
      base.missing_mode == MissingMode::kIgnorable && doc.value("/fit/missing_mode"_json_pointer, "") == "") {
    base.missing_mode = MissingMode::kNonignorable;
  }

  std::ostringstream timing;
  timing << "engine,model,replicates,successful,mean_seconds,total_seconds\n";
  json summary = json::array();
  for (Engine engine : engines) {
    for (int naive = 0; naive <= (with_naive ? 1 : 0); ++naive) {
      FitSpec spec = base;
      spec.engine = engine;
      if (naive) spec.fixed_eta = 0.0;
      const std::string model = naive ? "naive" : (spec.fixed_eta ? "fixed-eta" : "spatial");
      out << "running " << replicates << " replicate(s): " << to_string(engine) << ", " << model << "\n";
      const SimulationReport rep = simulation_report(config.simulate, config.hyper, spec, replicates, threads);
      const std::string name = "report_" + to_string(engine) + (naive ? "_naive" : "") + ".csv";
      io::write_text(in_dir(out_dir, name), io::report_csv(rep));
      out << io::report_csv(rep);
      timing << to_string(engine) << ',' << model << ',' << rep.replicates << ',' << rep.successes << ','
             << exact(rep.mean_seconds) << ',' << exact(rep.total_seconds) << '\n';
      summary.push_back(json{{"engine", to_string(engine)},
                             {"model", model},
                             {"replicates", rep.replicates},
                             {"successful", rep.successes},
                             {"mean_seconds", rep.mean_seconds}});
    }
  }
  io::write_text(in_dir(out_dir, "timing.csv"), timing.str());
  io::write_text(in_dir(out_dir, "report.json"),
                 json{{"runs", summary}, {"config", to_json(config)}}.dump(2) + "\n");
  out << "timing\n" << timing.str();
  return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Bayesian autologistic spike-and-slab models for spatial binary outcomes"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "ssal 1.0.0");

  Common c_sim, c_fit, c_pred, c_rep;
  FitFlags f_fit, f_rep;

  auto* sim = app.add_subcommand("simulate", "Simulate a dataset from a preset or config");
  c_sim.attach(sim);
  std::string sim_preset, sim_out, sim_name;
  std::optional<std::uint64_t> sim_seed;
  bool sim_gz = false;
  sim->add_option("--preset", sim_preset, "One of: " + join(preset_names()));
  sim->add_option("--out-dir", sim_out, "Output directory")->required();
  sim->add_option("--name", sim_name, "File stem (default: preset name)");
  sim->add_option("--seed", sim_seed, "Simulation seed");
  sim->add_flag("--gz", sim_gz, "Write the dataset gzip-compressed");

  auto* fitc = app.add_subcommand("fit", "Fit a dataset");
  c_fit.attach(fitc);
  f_fit.attach(fitc);
  std::vector<std::string> fit_data;
  std::string fit_out;
  std::optional<double> fit_threshold;
  std::optional<std::size_t> fit_top_k, fit_interact;
  fitc->add_option("data", fit_data, "Dataset CSV file(s)")->required();
  fitc->add_option("--out-dir", fit_out, "Output directory")->required();
  fitc->add_option("--threshold", fit_threshold, "Selection threshold on |mean/sd|");
  fitc->add_option("--top-k", fit_top_k, "Keep at most this many selected covariates");
  fitc->add_option("--interact-top", fit_interact, "Refit with all pairwise interactions among the top K covariates");

  auto* pred = app.add_subcommand("predict", "Predict spot probabilities with a fitted model");
  c_pred.attach(pred);
  std::string pred_model, pred_data, pred_out, pred_method;
  std::optional<double> pred_cutoff;
  bool pred_prob = false, pred_counts = false;
  pred->add_option("--model", pred_model, "model.json written by fit")->required();
  pred->add_option("data", pred_data, "Dataset CSV")->required();
  pred->add_option("--out", pred_out, "Prediction CSV path")->required();
  pred->add_option("--cutoff", pred_cutoff, "Label threshold on mu_hat (default 0.5)");
  pred->add_flag("--probabilistic", pred_prob, "Write mu_hat only");
  pred->add_option("--method", pred_method, "fixed-point or gibbs")->check(CLI::IsMember({"fixed-point", "gibbs"}));
  pred->add_flag("--counts", pred_counts, "Covariates are raw counts: apply log(X+1)");

  auto* rep = app.add_subcommand("report", "Replicate a simulation design and tabulate accuracy");
  c_rep.attach(rep);
  f_rep.attach(rep, false);
  std::string rep_preset, rep_out, rep_engines = "advi";
  std::size_t rep_n = 20, rep_threads = 0;
  bool rep_naive = false;
  rep->add_option("--preset", rep_preset, "Simulation preset");
  rep->add_option("--replicates", rep_n, "Number of replicates");
  rep->add_option("--engines", rep_engines, "Comma-separated engines, e.g. nuts,advi");
  rep->add_flag("--with-naive", rep_naive, "Also fit the eta = 0 comparator");
  rep->add_option("--threads", rep_threads, "Worker threads (0: all cores)");
  rep->add_option("--out-dir", rep_out, "Output directory")->required();

  std::vector<std::string> argv_rev(args.rbegin(), args.rend());
  if (!argv_rev.empty()) argv_rev.pop_back();
  try {
    app.parse(argv_rev);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::CallForVersion&) {
    out << "ssal 1.0.0\n";
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kExitInvalid;
  }

  const Common* common = sim->parsed() ? &c_sim : fitc->parsed() ? &c_fit : pred->parsed() ? &c_pred : &c_rep;
  set_warnings_enabled(!common->quiet);
  try {
    if (sim->parsed()) return cmd_simulate(c_sim, sim_preset, sim_out, sim_name, sim_seed, sim_gz, out);
    if (fitc->parsed()) return cmd_fit(c_fit, f_fit, fit_data, fit_out, fit_threshold, fit_top_k, fit_interact, out);
    if (pred->parsed()) {
      return cmd_predict(c_pred, pred_model, pred_data, pred_out, pred_cutoff, pred_prob, pred_method, pred_counts,
                         out);
    }
    return cmd_report(c_rep, f_rep, rep_preset, rep_n, rep_engines, rep_naive, rep_threads, rep_out, out);
  } catch (const InputError& e) {
    err << "input error: " << e.what() << "\n";
    return kExitInvalid;
  } catch (const ConfigError& e) {
    err << "configuration error: " << e.what() << "\n";
    return kExitInvalid;
  } catch (const IoError& e) {
    err << "I/O error: " << e.what() << "\n";
    return kExitInvalid;
  } catch (const EngineError& e) {
    err << "engine error: " << e.what() << "\n";
    return kExitEngine;
  } catch (const StateError& e) {
    err << "engine error: " << e.what() << "\n";
    return kExitEngine;
  }
}

}  // namespace ssal::cli
