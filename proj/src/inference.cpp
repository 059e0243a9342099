#include "ssal/inference.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <limits>
#include <set>
#include <thread>

#include "ssal/errors.hpp"
#include "ssal/log.hpp"
#include "ssal/math.hpp"
#include "ssal/model.hpp"

namespace ssal {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

double slab_responsibility(double b, double t, double w, double v0) {
  if (w >= 1.0) return 1.0;
  if (w <= 0.0) return 0.0;
  const double slab = std::log(w) + math::normal_log_pdf(b, 0.0, t);
  const double spike = std::log1p(-w) + math::normal_log_pdf(b, 0.0, v0 * t);
  return std::exp(slab - math::log_sum_exp(slab, spike));
}

double mean_of(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

double sample_sd(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double m = mean_of(v);
  double ss = 0.0;
  for (double x : v) ss += (x - m) * (x - m);
  return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

Eigen::MatrixXd to_theta(const Eigen::MatrixXd& zeta_draws, const Hyperparams& hyper, const ParamLayout& layout) {
  Eigen::MatrixXd theta(zeta_draws.rows(), zeta_draws.cols());
  for (Eigen::Index r = 0; r < zeta_draws.rows(); ++r) {
    theta.row(r) = flatten(untransform(zeta_draws.row(r).transpose(), hyper, layout), layout).transpose();
  }
  return theta;
}

std::uint64_t derived_seed(const Rng& root, std::uint64_t id) {
  return root.split(id).engine()();
}

}  // namespace

std::string to_string(Engine engine) { return engine == Engine::kNuts ? "nuts" : "advi"; }

std::string to_string(MissingMode mode) {
  switch (mode) {
    case MissingMode::kNone: return "none";
    case MissingMode::kIgnorable: return "ignorable";
    case MissingMode::kNonignorable: return "nonignorable";
  }
  return "none";
}

Engine parse_engine(const std::string& text) {
  if (text == "nuts") return Engine::kNuts;
  if (text == "advi") return Engine::kAdvi;
  throw ConfigError("engine: expected 'nuts' or 'advi', got '" + text + "'");
}

MissingMode parse_missing_mode(const std::string& text) {
  if (text == "none") return MissingMode::kNone;
  if (text == "ignorable") return MissingMode::kIgnorable;
  if (text == "nonignorable") return MissingMode::kNonignorable;
  throw ConfigError("missing_mode: expected 'none', 'ignorable' or 'nonignorable', got '" + text + "'");
}

AdviConfig default_fit_advi_config() {
  AdviConfig c;
  c.schedule = StepSchedule::kAdaptive;
  c.step_size = 0.1;
  c.elbo_every = 5;
  c.elbo_tol = 1e-4;
  c.max_iters = 10000;
  return c;
}

void FitSpec::validate() const {
  advi.validate();
  if (imputation.advi_interval == 0) throw ConfigError("imputation.advi_interval must be positive");
  if (imputation.final_rounds == 0) throw ConfigError("imputation.final_rounds must be positive");
  if (posterior_draws < 2) throw ConfigError("posterior_draws must be at least 2");
  if (engine == Engine::kAdvi && posterior_draws < imputation.final_rounds) {
    throw ConfigError("posterior_draws must be at least imputation.final_rounds");
  }
  if (fixed_w && (*fixed_w <= 0.0 || *fixed_w > 1.0)) throw ConfigError("fixed_w must lie in (0, 1]");
  if (fixed_eta && *fixed_eta < 0.0) throw ConfigError("fixed_eta must be non-negative");
  if (annealing) {
    if (annealing->stage_iters == 0) throw ConfigError("annealing.stage_iters must be positive");
    for (double v : annealing->v0_ladder) {
      if (!(v > 0.0 && v < 1.0)) throw ConfigError("annealing.v0_ladder entries must lie in (0, 1)");
    }
  }
}

const ParameterSummary* PosteriorSummary::find(const std::string& name) const {
  for (const auto& p : parameters) {
    if (p.name == name) return &p;
  }
  return nullptr;
}

const ParameterSummary& PosteriorSummary::at(const std::string& name) const {
  const auto* p = find(name);
  if (p == nullptr) throw InputError("no parameter named '" + name + "' in the summary");
  return *p;
}

double quantile(std::vector<double> values, double q) {
  if (values.empty()) throw InputError("quantile of an empty sample");
  std::sort(values.begin(), values.end());
  const double pos = q * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return values[lo] + frac * (values[hi] - values[lo]);
}

PosteriorSummary summarize(const Eigen::MatrixXd& theta, const std::vector<std::string>& names,
                           const ParamLayout& layout, double v0, const std::vector<std::string>& covariates) {
  if (theta.cols() != layout.dim() || names.size() != static_cast<std::size_t>(theta.cols())) {
    throw InputError("draws do not match the parameter layout");
  }
  if (theta.rows() == 0) throw InputError("no draws to summarize");
  PosteriorSummary out;
  for (Eigen::Index j = 0; j < theta.cols(); ++j) {
    std::vector<double> col(theta.col(j).data(), theta.col(j).data() + theta.rows());
    ParameterSummary p;
    p.name = names[static_cast<std::size_t>(j)];
    p.mean = mean_of(col);
    p.sd = sample_sd(col);
    p.ci_low = quantile(col, 0.025);
    p.ci_high = quantile(col, 0.975);
    out.parameters.push_back(std::move(p));
  }
  const ModelVariant& v = layout.variant();
  for (std::size_t k = 0; k < v.d; ++k) {
    const auto bj = layout.beta() + static_cast<Eigen::Index>(k);
    const auto tj = layout.tau2() + static_cast<Eigen::Index>(k);
    CovariateSummary c;
    c.index = k;
    c.name = k < covariates.size() ? covariates[k] : std::to_string(k + 1);
    c.mean = out.parameters[static_cast<std::size_t>(bj)].mean;
    c.sd = out.parameters[static_cast<std::size_t>(bj)].sd;
    c.ratio = c.sd > 0.0 ? c.mean / c.sd : std::numeric_limits<double>::infinity();
    double inc = 0.0;
    for (Eigen::Index r = 0; r < theta.rows(); ++r) {
      const double w = layout.has_w() ? theta(r, layout.w()) : *v.fixed_w;
      inc += slab_responsibility(theta(r, bj), theta(r, tj), w, v0);
    }
    c.inclusion = inc / static_cast<double>(theta.rows());
    out.covariates.push_back(std::move(c));
  }
  return out;
}

void impute_missing(const StudyData& study, Outcomes& current, Rng& rng) {
  if (current.size() != study.slices.size()) throw InputError("outcome buffer does not match the study");
  for (std::size_t s = 0; s < study.slices.size(); ++s) {
    const SliceData& slice = study.slices[s];
    auto& y = current[s];
    if (y.size() != slice.size()) throw InputError("outcome buffer does not match slice " + std::to_string(s));
    const auto missing = slice.missing();
    if (missing.empty()) continue;
    const double prevalence = slice.observed_prevalence();
    for (std::size_t i : missing) {
      const double p = slice.graph->degree(i) == 0 ? prevalence : slice.graph->neighbor_mean(i, y);
      y[i] = rng.bernoulli(p) ? 1 : 0;
    }
  }
}

Outcomes initial_imputation(const StudyData& study, Rng& rng) {
  Outcomes out = initial_outcomes(study, 0);
  for (std::size_t s = 0; s < study.slices.size(); ++s) {
    const SliceData& slice = study.slices[s];
    const double prevalence = slice.observed_prevalence();
    for (std::size_t i : slice.missing()) out[s][i] = rng.bernoulli(prevalence) ? 1 : 0;
  }
  return out;
}

FitResult fit(const StudyData& input, const Hyperparams& hyper, const FitSpec& spec) {
  const auto start = Clock::now();
  spec.validate();
  hyper.validate();
  input.validate();

  StudyData expanded;
  const StudyData* data = &input;
  if (!spec.interaction_pairs.empty()) {
    expanded = expand_interactions(input, spec.interaction_pairs);
    data = &expanded;
  }
  const std::size_t n_missing = data->total_missing();
  const bool has_missing = n_missing > 0;
  if (has_missing && spec.missing_mode == MissingMode::kNone) {
    throw InputError(std::to_string(n_missing) +
                     " outcomes are missing; missing_mode 'none' requires complete data");
  }

  ModelVariant variant = variant_for(*data, spec.multislice, spec.missing_mode == MissingMode::kNonignorable);
  variant.fixed_eta = spec.fixed_eta;
  variant.fixed_w = spec.fixed_w;

  FitResult result;
  result.engine = spec.engine;
  result.variant = variant;
  result.layout = ParamLayout(variant);
  result.hyper = hyper;
  result.covariate_names = data->covariate_names;
  result.names = result.layout.names(data->covariate_names);
  const ParamLayout& layout = result.layout;

  const Rng root(spec.seed);
  Rng impute_rng = root.split(0);
  Rng draw_rng = root.split(1);
  Outcomes buffer = has_missing ? initial_imputation(*data, impute_rng) : initial_outcomes(*data, 0);

  if (spec.engine == Engine::kNuts) {
    Posterior post(*data, hyper, variant);
    post.set_outcomes(std::move(buffer));
    NutsConfig nc = spec.nuts;
    nc.seed = derived_seed(root, 2);
    const Eigen::VectorXd init = transform(default_params(variant, hyper), hyper, layout);
    BeforeTransition before;
    if (has_missing) {
      before = [&](std::size_t) { impute_missing(*data, post.mutable_outcomes(), impute_rng); };
    }
    ChainResult chain = run_chain(post, init, nc, before);
    result.draws = to_theta(chain.draws, hyper, layout);
    result.iterations = nc.warmup + nc.draws;
    result.warnings = chain.diagnostics.warnings;
    result.chain = std::move(chain.diagnostics);
    result.imputed = post.outcomes();
  } else {
    VariationalState q = VariationalState::standard(layout.dim());
    std::size_t total_iters = 0;
    std::uint64_t stage_id = 16;
    const double base_step = spec.advi.step_size;

    auto run_stage = [&](const Hyperparams& h, AdviConfig cfg) {
      Posterior post(*data, h, variant);
      post.set_outcomes(std::move(buffer));
      cfg.seed = derived_seed(root, stage_id++);
      BeforeIteration before;
      if (has_missing) {
        before = [&](std::size_t) {
          if (total_iters % spec.imputation.advi_interval == 0) {
            impute_missing(*data, post.mutable_outcomes(), impute_rng);
          }
          ++total_iters;
        };
      }
      AdviResult fitted = advi_fit(post, q, cfg, before);
      if (!has_missing) total_iters += fitted.iterations;
      buffer = post.outcomes();
      q = fitted.state;
      return fitted;
    };

    std::vector<double> ladder;
    if (spec.annealing && variant.d > 0) {
      for (double v0 : spec.annealing->v0_ladder) {
        if (v0 > hyper.v0) ladder.push_back(v0);
      }
    }
    for (double v0 : ladder) {
      Hyperparams h = hyper;
      h.v0 = v0;
      AdviConfig cfg = spec.advi;
      cfg.step_size = base_step * std::sqrt(v0 / ladder.front());
      cfg.max_iters = spec.annealing->stage_iters;
      cfg.min_iters = std::min(cfg.min_iters, cfg.max_iters);
      run_stage(h, cfg);
    }
    AdviConfig final_cfg = spec.advi;
    if (!ladder.empty()) final_cfg.step_size = base_step * std::sqrt(hyper.v0 / ladder.front());
    AdviResult fitted = run_stage(hyper, final_cfg);
    result.elbo_trace = fitted.elbo_trace;
    result.converged = fitted.converged || spec.advi.max_iters == 0;
    if (!result.converged) {
      const std::string msg = "ADVI stopped at max_iters without meeting the ELBO tolerance";
      warn(msg);
      result.warnings.push_back(msg);
    }

    Eigen::MatrixXd zeta_draws;
    if (has_missing) {
      const std::size_t rounds = spec.imputation.final_rounds;
      zeta_draws.resize(static_cast<Eigen::Index>(spec.posterior_draws), layout.dim());
      Eigen::Index row = 0;
      for (std::size_t r = 0; r < rounds; ++r) {
        impute_missing(*data, buffer, impute_rng);
        if (spec.imputation.final_iters > 0) {
          AdviConfig cfg = final_cfg;
          cfg.max_iters = spec.imputation.final_iters;
          cfg.min_iters = spec.imputation.final_iters;
          Posterior post(*data, hyper, variant);
          post.set_outcomes(buffer);
          cfg.seed = derived_seed(root, stage_id++);
          q = advi_fit(post, q, cfg).state;
          total_iters += cfg.max_iters;
        }
        const std::size_t n = spec.posterior_draws / rounds + (r + 1 == rounds ? spec.posterior_draws % rounds : 0);
        zeta_draws.middleRows(row, static_cast<Eigen::Index>(n)) = draw_variational_posterior(q, n, draw_rng);
        row += static_cast<Eigen::Index>(n);
      }
    } else {
      zeta_draws = draw_variational_posterior(q, spec.posterior_draws, draw_rng);
    }
    result.iterations = total_iters;
    result.draws = to_theta(zeta_draws, hyper, layout);
    result.variational = q;
    result.imputed = buffer;
  }

  result.summary = summarize(result.draws, result.names, layout, hyper.v0, data->covariate_names);
  result.posterior_mean = unflatten(result.draws.colwise().mean().transpose(), layout);
  result.seconds = seconds_since(start);
  return result;
}

std::vector<SelectedCovariate> select_genes(const PosteriorSummary& summary, double threshold,
                                            std::optional<std::size_t> top_k) {
  std::vector<SelectedCovariate> out;
  for (const auto& c : summary.covariates) {
    if (c.sd == 0.0) warn("covariate " + c.name + " has zero posterior sd; its ratio is treated as infinite");
    const double ratio = c.sd == 0.0 ? std::numeric_limits<double>::infinity() : std::abs(c.mean / c.sd);
    if (ratio >= threshold) out.push_back({c.index, c.name, ratio});
  }
  std::stable_sort(out.begin(), out.end(),
                   [](const SelectedCovariate& a, const SelectedCovariate& b) { return a.ratio > b.ratio; });
  if (top_k && out.size() > *top_k) out.resize(*top_k);
  return out;
}

std::vector<std::pair<std::size_t, std::size_t>> all_pairs(const std::vector<std::size_t>& indices) {
  std::vector<std::pair<std::size_t, std::size_t>> out;
  for (std::size_t a = 0; a < indices.size(); ++a) {
    for (std::size_t b = a + 1; b < indices.size(); ++b) out.emplace_back(indices[a], indices[b]);
  }
  return out;
}

StudyData expand_interactions(const StudyData& study, const std::vector<std::pair<std::size_t, std::size_t>>& pairs) {
  const std::size_t d = study.d();
  std::vector<std::pair<std::size_t, std::size_t>> unique;
  std::set<std::pair<std::size_t, std::size_t>> seen;
  for (auto [a, b] : pairs) {
    if (a >= d || b >= d) {
      throw InputError("interaction pair (" + std::to_string(a) + ", " + std::to_string(b) +
                       ") references a covariate outside 0.." + std::to_string(d == 0 ? 0 : d - 1));
    }
    const auto key = std::minmax(a, b);
    if (!seen.insert(key).second) {
      warn("duplicate interaction pair (" + std::to_string(a) + ", " + std::to_string(b) + ") ignored");
      continue;
    }
    unique.emplace_back(a, b);
  }
  StudyData out = study;
  if (unique.empty()) return out;
  auto label = [&](std::size_t k) {
    return k < study.covariate_names.size() ? study.covariate_names[k] : std::to_string(k + 1);
  };
  if (!study.covariate_names.empty()) {
    for (auto [a, b] : unique) out.covariate_names.push_back(label(a) + ":" + label(b));
  }
  const auto extra = static_cast<Eigen::Index>(unique.size());
  for (auto& slice : out.slices) {
    Eigen::MatrixXd x(slice.x.rows(), slice.x.cols() + extra);
    x.leftCols(slice.x.cols()) = slice.x;
    for (Eigen::Index j = 0; j < extra; ++j) {
      const auto [a, b] = unique[static_cast<std::size_t>(j)];
      x.col(slice.x.cols() + j) =
          slice.x.col(static_cast<Eigen::Index>(a)).cwiseProduct(slice.x.col(static_cast<Eigen::Index>(b)));
    }
    slice.x = std::move(x);
  }
  return out;
}

Prediction predict(const ModelParams& params, const SliceData& slice, const PredictOptions& options) {
  if (static_cast<Eigen::Index>(slice.d()) != params.beta.size()) {
    throw InputError("slice has " + std::to_string(slice.d()) + " covariates but the model has " +
                     std::to_string(params.beta.size()));
  }
  const auto n = static_cast<Eigen::Index>(slice.size());
  double offset = 0.0;
  if (options.offset) {
    offset = *options.offset;
  } else if (params.U.size() > 0 && static_cast<Eigen::Index>(slice.donor) < params.U.rows() &&
             static_cast<Eigen::Index>(slice.position) < params.U.cols()) {
    offset = params.U(static_cast<Eigen::Index>(slice.donor), static_cast<Eigen::Index>(slice.position));
  }
  const Eigen::VectorXd base = (slice.x * params.beta).array() + offset;
  const NeighborGraph& graph = *slice.graph;

  Prediction out;
  out.mu_hat.resize(n);
  if (options.method == PredictionMethod::kFixedPoint) {
    Eigen::VectorXd mu(n);
    for (Eigen::Index i = 0; i < n; ++i) mu(i) = options.start ? *options.start : math::sigmoid(base(i));
    if (params.eta != 0.0) {
      out.converged = false;
      Eigen::VectorXd next(n);
      for (std::size_t it = 1; it <= options.max_iters; ++it) {
        for (Eigen::Index i = 0; i < n; ++i) {
          next(i) = math::sigmoid(base(i) + params.eta * graph.neighbor_mean(static_cast<std::size_t>(i), mu));
        }
        const double change = (next - mu).cwiseAbs().maxCoeff();
        mu.swap(next);
        out.iterations = it;
        if (change < options.tolerance) {
          out.converged = true;
          break;
        }
      }
      if (!out.converged) {
        warn("prediction fixed point did not converge in " + std::to_string(options.max_iters) + " iterations");
      }
    } else if (options.start) {
      for (Eigen::Index i = 0; i < n; ++i) mu(i) = math::sigmoid(base(i));
    }
    out.mu_hat = mu;
  } else {
    Rng rng(options.seed);
    std::vector<int> y(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) y[static_cast<std::size_t>(i)] = rng.bernoulli(math::sigmoid(base(i)));
    Eigen::VectorXd acc = Eigen::VectorXd::Zero(n);
    const std::size_t total = options.gibbs_burnin + options.gibbs_sweeps;
    for (std::size_t sweep = 0; sweep < total; ++sweep) {
      for (Eigen::Index i = 0; i < n; ++i) {
        const auto si = static_cast<std::size_t>(i);
        const double p = math::sigmoid(base(i) + params.eta * graph.neighbor_mean(si, y));
        if (sweep >= options.gibbs_burnin) acc(i) += p;
        y[si] = rng.bernoulli(p) ? 1 : 0;
      }
    }
    out.mu_hat = acc / static_cast<double>(std::max<std::size_t>(options.gibbs_sweeps, 1));
    out.iterations = total;
  }

  out.labels.resize(static_cast<std::size_t>(n));
  std::size_t observed = 0, correct = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto si = static_cast<std::size_t>(i);
    out.labels[si] = out.mu_hat(i) > options.cutoff ? 1 : 0;
    if (slice.observed(si)) {
      ++observed;
      if (out.labels[si] == slice.y[si]) ++correct;
    }
  }
  if (observed > 0) out.accuracy = static_cast<double>(correct) / static_cast<double>(observed);
  return out;
}

std::vector<std::pair<std::string, double>> reported_truth(const SimulatedStudy& sim) {
  std::vector<std::pair<std::string, double>> out;
  const ModelParams& t = sim.truth;
  out.emplace_back("eta", t.eta);
  const auto& names = sim.study.covariate_names;
  for (Eigen::Index k = 0; k < t.beta.size(); ++k) {
    const auto ks = static_cast<std::size_t>(k);
    out.emplace_back("beta[" + (ks < names.size() ? names[ks] : std::to_string(ks + 1)) + "]", t.beta(k));
  }
  if (sim.config.multislice) {
    for (Eigen::Index c = 0; c < t.sigma2.size(); ++c) {
      out.emplace_back("sigma2[" + std::to_string(c + 1) + "]", t.sigma2(c));
    }
    out.emplace_back("rho", t.rho);
  }
  if (sim.config.missingness.kind == MissingnessKind::kNonignorable) {
    for (int j = 0; j < 3; ++j) out.emplace_back("gamma" + std::to_string(j), t.gamma(j));
  }
  return out;
}

SimulatedStudy simulate_any(const SimConfig& config) {
  return config.multislice ? simulate_multislice(config) : simulate(config);
}

SimulationReport simulation_report(const SimConfig& generator, std::size_t n_replicates,
                                   const ReplicateFitter& fitter, std::size_t threads) {
  const auto start = Clock::now();
  SimulationReport report;
  report.replicates = n_replicates;
  report.results.resize(n_replicates);
  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    for (std::size_t r = next++; r < n_replicates; r = next++) {
      ReplicateResult& res = report.results[r];
      res.replicate = r;
      const auto t0 = Clock::now();
      try {
        SimConfig config = generator;
        config.seed = generator.seed + r;
        const SimulatedStudy sim = simulate_any(config);
        res.truth = reported_truth(sim);
        res.summary = fitter(sim, r);
        res.ok = true;
      } catch (const std::exception& e) {
        res.error = e.what();
      }
      res.seconds = seconds_since(t0);
    }
  };
  std::size_t n_threads = threads == 0 ? std::max(1u, std::thread::hardware_concurrency()) : threads;
  n_threads = std::max<std::size_t>(1, std::min(n_threads, n_replicates));
  if (n_threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < n_threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  std::vector<const ReplicateResult*> ok;
  double secs = 0.0;
  for (const auto& res : report.results) {
    secs += res.seconds;
    if (res.ok) {
      ok.push_back(&res);
    } else {
      warn("replicate " + std::to_string(res.replicate) + " failed: " + res.error);
    }
  }
  report.successes = ok.size();
  report.mean_seconds = n_replicates > 0 ? secs / static_cast<double>(n_replicates) : 0.0;
  if (ok.size() < 2) report.see_note = "avgSEE needs at least two successful replicates";
  if (!ok.empty()) {
    for (const auto& [name, ignored] : ok.front()->truth) {
      (void)ignored;
      if (ok.front()->summary.find(name) == nullptr) continue;
      std::vector<double> est, bias, sd;
      std::size_t covered = 0;
      for (const ReplicateResult* res : ok) {
        const ParameterSummary* p = res->summary.find(name);
        if (p == nullptr) throw InputError("replicate summaries disagree on parameter " + name);
        double truth = 0.0;
        for (const auto& [n, v] : res->truth) {
          if (n == name) truth = v;
        }
        est.push_back(p->mean);
        bias.push_back(p->mean - truth);
        sd.push_back(p->sd);
        if (p->ci_low <= truth && truth <= p->ci_high) ++covered;
      }
      ParameterReport row;
      row.parameter = name;
      row.avg_bias = mean_of(bias);
      if (ok.size() >= 2) row.avg_see = sample_sd(est);
      row.avg_sem = mean_of(sd);
      row.avg_cr = static_cast<double>(covered) / static_cast<double>(ok.size());
      report.rows.push_back(std::move(row));
    }
  }
  report.total_seconds = seconds_since(start);
  return report;
}

SimulationReport simulation_report(const SimConfig& generator, const Hyperparams& hyper, const FitSpec& spec,
                                   std::size_t n_replicates, std::size_t threads) {
  const ReplicateFitter fitter = [&](const SimulatedStudy& sim, std::size_t r) {
    FitSpec s = spec;
    s.seed = spec.seed + r;
    return fit(sim.study, hyper, s).summary;
  };
  return simulation_report(generator, n_replicates, fitter, threads);
}

}  // namespace ssal
