#include "ssal/config.hpp"

#include <cstdlib>
#include <set>

#include "ssal/errors.hpp"

namespace ssal {

using nlohmann::json;

namespace {

/// Reads typed fields from one JSON object and rejects keys nobody asked for.
class Section {
 public:
  Section(const json* obj, std::string path) : obj_(obj), path_(std::move(path)) {
    if (obj_ != nullptr && !obj_->is_object()) throw ConfigError(path_ + ": expected an object");
  }

  template <typename T>
  void get(const std::string& key, T& out) {
    const json* v = take(key);
    if (v == nullptr) return;
    try {
      out = v->get<T>();
    } catch (const json::exception&) {
      throw ConfigError(field(key) + ": wrong type");
    }
  }

  template <typename T>
  void get_optional(const std::string& key, std::optional<T>& out) {
    const json* v = take(key);
    if (v == nullptr) return;
    if (v->is_null()) {
      out.reset();
      return;
    }
    try {
      out = v->get<T>();
    } catch (const json::exception&) {
      throw ConfigError(field(key) + ": wrong type");
    }
  }

  void get_vector(const std::string& key, Eigen::VectorXd& out) {
    std::vector<double> v;
    if (!has(key)) {
      seen_.insert(key);
      return;
    }
    get(key, v);
    out = Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
  }

  Section sub(const std::string& key) {
    const json* v = take(key);
    return Section(v, field(key));
  }

  [[nodiscard]] bool has(const std::string& key) const { return obj_ != nullptr && obj_->contains(key); }
  [[nodiscard]] bool present() const { return obj_ != nullptr; }
  [[nodiscard]] std::string field(const std::string& key) const { return path_ + "." + key; }

  /// Throws for the first key never requested.
  void finish() const {
    if (obj_ == nullptr) return;
    for (const auto& [key, value] : obj_->items()) {
      (void)value;
      if (seen_.count(key) == 0) throw ConfigError(field(key) + ": unknown key");
    }
  }

 private:
  const json* take(const std::string& key) {
    seen_.insert(key);
    if (obj_ == nullptr || !obj_->contains(key)) return nullptr;
    return &obj_->at(key);
  }

  const json* obj_;
  std::string path_;
  std::set<std::string> seen_;
};

StepSchedule schedule_from(const std::string& s, const std::string& where) {
  if (s == "constant") return StepSchedule::kConstant;
  if (s == "robbins-monro") return StepSchedule::kRobbinsMonro;
  if (s == "adaptive") return StepSchedule::kAdaptive;
  throw ConfigError(where + ": expected 'constant', 'robbins-monro' or 'adaptive', got '" + s + "'");
}

std::string schedule_name(StepSchedule s) {
  switch (s) {
    case StepSchedule::kConstant: return "constant";
    case StepSchedule::kRobbinsMonro: return "robbins-monro";
    case StepSchedule::kAdaptive: return "adaptive";
  }
  return "constant";
}

CorrelationStructure structure_from(const std::string& s, const std::string& where) {
  if (s == "exchangeable") return CorrelationStructure::kExchangeable;
  if (s == "autoregressive") return CorrelationStructure::kAutoregressive;
  throw ConfigError(where + ": expected 'exchangeable' or 'autoregressive', got '" + s + "'");
}

std::string structure_name(CorrelationStructure s) {
  return s == CorrelationStructure::kExchangeable ? "exchangeable" : "autoregressive";
}

MissingnessKind kind_from(const std::string& s, const std::string& where) {
  if (s == "none") return MissingnessKind::kNone;
  if (s == "mcar") return MissingnessKind::kMcar;
  if (s == "nonignorable") return MissingnessKind::kNonignorable;
  throw ConfigError(where + ": expected 'none', 'mcar' or 'nonignorable', got '" + s + "'");
}

std::string kind_name(MissingnessKind k) {
  switch (k) {
    case MissingnessKind::kNone: return "none";
    case MissingnessKind::kMcar: return "mcar";
    case MissingnessKind::kNonignorable: return "nonignorable";
  }
  return "none";
}

json vec(const Eigen::VectorXd& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

template <typename F>
void wrap(const std::string& where, F&& f) {
  try {
    f();
  } catch (const ConfigError& e) {
    throw ConfigError(where + ": " + e.what());
  }
}

}  // namespace

void RunConfig::validate() const {
  wrap("hyper", [&] { hyper.validate(); });
  wrap("fit", [&] { fit.validate(); });
  wrap("simulate", [&] { simulate.validate(); });
  if (!(predict.cutoff >= 0.0 && predict.cutoff <= 1.0)) throw ConfigError("predict.cutoff must lie in [0, 1]");
  if (!(predict.tolerance > 0.0)) throw ConfigError("predict.tolerance must be positive");
  if (select.threshold < 0.0) throw ConfigError("select.threshold must be non-negative");
  if (data.min_total_count && *data.min_total_count < 0.0) throw ConfigError("data.min_total_count must be non-negative");
}

RunConfig parse_run_config(const json& doc, const std::string& source) {
  RunConfig c;
  Section root(&doc, source);

  {
    Section h = root.sub("hyper");
    h.get("c1", c.hyper.c1);
    h.get("v0", c.hyper.v0);
    h.get("b1", c.hyper.b1);
    h.get("b2", c.hyper.b2);
    h.get("b3", c.hyper.b3);
    h.get("b4", c.hyper.b4);
    h.get("b5", c.hyper.b5);
    h.get("b6", c.hyper.b6);
    h.get("delta", c.hyper.delta);
    h.get("gamma_prior_sd", c.hyper.gamma_prior_sd);
    h.finish();
  }
  {
    Section f = root.sub("fit");
    std::string engine = to_string(c.fit.engine);
    std::string mode = to_string(c.fit.missing_mode);
    f.get("engine", engine);
    f.get("missing_mode", mode);
    c.fit.engine = parse_engine(engine);
    c.fit.missing_mode = parse_missing_mode(mode);
    f.get("multislice", c.fit.multislice);
    f.get("interaction_pairs", c.fit.interaction_pairs);
    f.get_optional("fixed_eta", c.fit.fixed_eta);
    f.get_optional("fixed_w", c.fit.fixed_w);
    f.get("posterior_draws", c.fit.posterior_draws);
    f.get("seed", c.fit.seed);
    {
      Section n = f.sub("nuts");
      n.get("epsilon", c.fit.nuts.epsilon);
      n.get_vector("mass_diag", c.fit.nuts.mass_diag);
      n.get("max_depth", c.fit.nuts.max_depth);
      n.get("warmup", c.fit.nuts.warmup);
      n.get("draws", c.fit.nuts.draws);
      n.get("max_energy_error", c.fit.nuts.max_energy_error);
      n.get("halve_on_divergence", c.fit.nuts.halve_on_divergence);
      n.get("halving_window", c.fit.nuts.halving_window);
      n.finish();
    }
    {
      Section a = f.sub("advi");
      std::string schedule = schedule_name(c.fit.advi.schedule);
      a.get("schedule", schedule);
      c.fit.advi.schedule = schedule_from(schedule, a.field("schedule"));
      a.get("mc_draws", c.fit.advi.mc_draws);
      a.get("step_size", c.fit.advi.step_size);
      a.get("decay", c.fit.advi.decay);
      a.get("adaptive_weight", c.fit.advi.adaptive_weight);
      a.get("max_iters", c.fit.advi.max_iters);
      a.get("min_iters", c.fit.advi.min_iters);
      a.get("elbo_tol", c.fit.advi.elbo_tol);
      a.get("elbo_window", c.fit.advi.elbo_window);
      a.get("elbo_eval_draws", c.fit.advi.elbo_eval_draws);
      a.get("elbo_every", c.fit.advi.elbo_every);
      a.finish();
    }
    {
      Section s = f.sub("annealing");
      if (s.present()) {
        bool enabled = c.fit.annealing.has_value();
        s.get("enabled", enabled);
        SpikeAnnealing an = c.fit.annealing.value_or(SpikeAnnealing{});
        s.get("v0_ladder", an.v0_ladder);
        s.get("stage_iters", an.stage_iters);
        c.fit.annealing = enabled ? std::optional<SpikeAnnealing>(an) : std::nullopt;
      }
      s.finish();
    }
    {
      Section s = f.sub("imputation");
      s.get("advi_interval", c.fit.imputation.advi_interval);
      s.get("final_rounds", c.fit.imputation.final_rounds);
      s.get("final_iters", c.fit.imputation.final_iters);
      s.finish();
    }
    f.finish();
  }
  {
    Section s = root.sub("simulate");
    s.get_optional("preset", c.preset);
    if (c.preset) {
      try {
        c.simulate = preset(*c.preset);
      } catch (const ConfigError& e) {
        throw ConfigError(s.field("preset") + ": " + e.what());
      }
    }
    s.get("m", c.simulate.m);
    s.get("d", c.simulate.d);
    const bool beta_given = s.has("beta_true");
    s.get_vector("beta_true", c.simulate.beta_true);
    if (!beta_given && static_cast<std::size_t>(c.simulate.beta_true.size()) != c.simulate.d) {
      c.simulate.beta_true = simulation_beta(c.simulate.d);
    }
    s.get("eta_true", c.simulate.eta_true);
    s.get("gibbs_sweeps", c.simulate.gibbs_sweeps);
    s.get("seed", c.simulate.seed);
    s.get("delta", c.simulate.delta);
    {
      Section m = s.sub("missingness");
      std::string kind = kind_name(c.simulate.missingness.kind);
      m.get("kind", kind);
      c.simulate.missingness.kind = kind_from(kind, m.field("kind"));
      m.get("mcar_count", c.simulate.missingness.mcar_count);
      Eigen::VectorXd g = c.simulate.missingness.gamma;
      m.get_vector("gamma", g);
      if (g.size() != 3) throw ConfigError(m.field("gamma") + ": expected three values");
      c.simulate.missingness.gamma = g;
      m.get("sweeps", c.simulate.missingness.sweeps);
      m.finish();
    }
    {
      Section m = s.sub("multislice");
      if (m.present()) {
        bool enabled = true;
        m.get("enabled", enabled);
        MultisliceConfig ms = c.simulate.multislice.value_or(MultisliceConfig{});
        m.get("donors", ms.donors);
        m.get("slices_per_donor", ms.slices_per_donor);
        m.get("sigma2", ms.sigma2);
        m.get("rho", ms.rho);
        std::string st = structure_name(ms.structure);
        m.get("structure", st);
        ms.structure = structure_from(st, m.field("structure"));
        c.simulate.multislice = enabled ? std::optional<MultisliceConfig>(ms) : std::nullopt;
      }
      m.finish();
    }
    s.finish();
  }
  {
    Section d = root.sub("data");
    d.get("counts", c.data.counts);
    d.get_optional("min_total_count", c.data.min_total_count);
    d.get("allow_unequal", c.data.allow_unequal);
    std::string st = structure_name(c.data.structure);
    d.get("structure", st);
    c.data.structure = structure_from(st, d.field("structure"));
    d.finish();
  }
  {
    Section p = root.sub("predict");
    p.get("cutoff", c.predict.cutoff);
    std::string method = c.predict.method == PredictionMethod::kGibbs ? "gibbs" : "fixed-point";
    p.get("method", method);
    if (method == "gibbs") {
      c.predict.method = PredictionMethod::kGibbs;
    } else if (method == "fixed-point") {
      c.predict.method = PredictionMethod::kFixedPoint;
    } else {
      throw ConfigError(p.field("method") + ": expected 'fixed-point' or 'gibbs', got '" + method + "'");
    }
    p.get("tolerance", c.predict.tolerance);
    p.get("max_iters", c.predict.max_iters);
    p.get("gibbs_burnin", c.predict.gibbs_burnin);
    p.get("gibbs_sweeps", c.predict.gibbs_sweeps);
    p.get("seed", c.predict.seed);
    p.finish();
  }
  {
    Section s = root.sub("select");
    s.get("threshold", c.select.threshold);
    s.get_optional("top_k", c.select.top_k);
    s.finish();
  }
  root.finish();
  c.data.delta = c.hyper.delta;
  c.data.multislice = c.fit.multislice;
  c.validate();
  return c;
}

RunConfig load_run_config(const std::string& path) {
  json doc;
  try {
    doc = json::parse(io::read_text(path));
  } catch (const json::parse_error& e) {
    throw ConfigError(path + ": invalid JSON: " + e.what());
  }
  return parse_run_config(doc, path);
}

json to_json(const RunConfig& c) {
  json j;
  j["hyper"] = io::hyper_json(c.hyper);
  const FitSpec& f = c.fit;
  json fit{{"engine", to_string(f.engine)},
           {"missing_mode", to_string(f.missing_mode)},
           {"multislice", f.multislice},
           {"interaction_pairs", f.interaction_pairs},
           {"fixed_eta", f.fixed_eta ? json(*f.fixed_eta) : json(nullptr)},
           {"fixed_w", f.fixed_w ? json(*f.fixed_w) : json(nullptr)},
           {"posterior_draws", f.posterior_draws},
           {"seed", f.seed}};
  fit["nuts"] = json{{"epsilon", f.nuts.epsilon},
                     {"mass_diag", vec(f.nuts.mass_diag)},
                     {"max_depth", f.nuts.max_depth},
                     {"warmup", f.nuts.warmup},
                     {"draws", f.nuts.draws},
                     {"max_energy_error", f.nuts.max_energy_error},
                     {"halve_on_divergence", f.nuts.halve_on_divergence},
                     {"halving_window", f.nuts.halving_window}};
  fit["advi"] = json{{"schedule", schedule_name(f.advi.schedule)},
                     {"mc_draws", f.advi.mc_draws},
                     {"step_size", f.advi.step_size},
                     {"decay", f.advi.decay},
                     {"adaptive_weight", f.advi.adaptive_weight},
                     {"max_iters", f.advi.max_iters},
                     {"min_iters", f.advi.min_iters},
                     {"elbo_tol", f.advi.elbo_tol},
                     {"elbo_window", f.advi.elbo_window},
                     {"elbo_eval_draws", f.advi.elbo_eval_draws},
                     {"elbo_every", f.advi.elbo_every}};
  fit["annealing"] = f.annealing ? json{{"enabled", true},
                                         {"v0_ladder", f.annealing->v0_ladder},
                                         {"stage_iters", f.annealing->stage_iters}}
                                 : json{{"enabled", false}};
  fit["imputation"] = json{{"advi_interval", f.imputation.advi_interval},
                           {"final_rounds", f.imputation.final_rounds},
                           {"final_iters", f.imputation.final_iters}};
  j["fit"] = fit;
  const SimConfig& s = c.simulate;
  json sim{{"m", s.m},
           {"d", s.d},
           {"beta_true", vec(s.beta_true)},
           {"eta_true", s.eta_true},
           {"gibbs_sweeps", s.gibbs_sweeps},
           {"seed", s.seed},
           {"delta", s.delta}};
  if (c.preset) sim["preset"] = *c.preset;
  sim["missingness"] = json{{"kind", kind_name(s.missingness.kind)},
                            {"mcar_count", s.missingness.mcar_count},
                            {"gamma", vec(s.missingness.gamma)},
                            {"sweeps", s.missingness.sweeps}};
  if (s.multislice) {
    sim["multislice"] = json{{"enabled", true},
                             {"donors", s.multislice->donors},
                             {"slices_per_donor", s.multislice->slices_per_donor},
                             {"sigma2", s.multislice->sigma2},
                             {"rho", s.multislice->rho},
                             {"structure", structure_name(s.multislice->structure)}};
  }
  j["simulate"] = sim;
  j["data"] = json{{"counts", c.data.counts},
                   {"min_total_count", c.data.min_total_count ? json(*c.data.min_total_count) : json(nullptr)},
                   {"allow_unequal", c.data.allow_unequal},
                   {"structure", structure_name(c.data.structure)}};
  j["predict"] = json{{"cutoff", c.predict.cutoff},
                      {"method", c.predict.method == PredictionMethod::kGibbs ? "gibbs" : "fixed-point"},
                      {"tolerance", c.predict.tolerance},
                      {"max_iters", c.predict.max_iters},
                      {"gibbs_burnin", c.predict.gibbs_burnin},
                      {"gibbs_sweeps", c.predict.gibbs_sweeps},
                      {"seed", c.predict.seed}};
  j["select"] = json{{"threshold", c.select.threshold},
                     {"top_k", c.select.top_k ? json(*c.select.top_k) : json(nullptr)}};
  return j;
}

std::optional<std::string> default_config_path() {
  const char* v = std::getenv(kConfigEnv);
  if (v == nullptr || *v == '\0') return std::nullopt;
  return std::string(v);
}

}  // namespace ssal
