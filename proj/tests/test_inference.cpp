#include <algorithm>
#include <cmath>
#include <numeric>

#include "doctest.h"
#include "fixtures.hpp"
#include "ssal/errors.hpp"
#include "ssal/inference.hpp"
#include "ssal/log.hpp"
#include "ssal/math.hpp"
#include "ssal/model.hpp"

using namespace ssal;
using doctest::Approx;

namespace {

struct Quiet {
  Quiet() { set_warnings_enabled(false); }
  ~Quiet() { set_warnings_enabled(true); }
};

/// 3 x 3 lattice with the centre spot missing and the given neighbor values
/// at its four neighbors (1, 3, 5, 7).
StudyData centre_missing(const std::array<int, 4>& nb) {
  Rng rng(3);
  SliceData s = fixtures::random_slice(3, 1, rng, 0.0);
  std::fill(s.y.begin(), s.y.end(), 0);
  s.y[1] = nb[0];
  s.y[3] = nb[1];
  s.y[5] = nb[2];
  s.y[7] = nb[3];
  s.r[4] = 0;
  s.y[4] = -1;
  return single_slice_study(std::move(s));
}

FitSpec quick_advi() {
  FitSpec spec;
  spec.advi.max_iters = 300;
  spec.annealing.reset();
  spec.posterior_draws = 200;
  return spec;
}

FitSpec quick_nuts() {
  FitSpec spec;
  spec.engine = Engine::kNuts;
  spec.nuts.epsilon = 0.05;
  spec.nuts.warmup = 20;
  spec.nuts.draws = 30;
  spec.nuts.max_depth = 5;
  return spec;
}

/// A wider spike lets short NUTS chains leave the origin.
Hyperparams soft() {
  Hyperparams h;
  h.v0 = 1e-2;
  return h;
}

PosteriorSummary summary_with_ratios(const std::vector<double>& means, const std::vector<double>& sds) {
  PosteriorSummary s;
  for (std::size_t k = 0; k < means.size(); ++k) {
    CovariateSummary c;
    c.index = k;
    c.name = "g" + std::to_string(k);
    c.mean = means[k];
    c.sd = sds[k];
    c.ratio = c.mean / c.sd;
    s.covariates.push_back(c);
  }
  return s;
}

}  // namespace

TEST_CASE("imputation draws from the neighbor proportion") {
  {
    StudyData study = centre_missing({1, 1, 1, 1});
    Rng rng(1);
    for (int t = 0; t < 200; ++t) {
      Outcomes y = initial_outcomes(study, 0);
      impute_missing(study, y, rng);
      REQUIRE(y[0][4] == 1);
    }
  }
  {
    StudyData study = centre_missing({1, 1, 0, 0});
    Rng rng(2);
    int ones = 0;
    for (int t = 0; t < 10000; ++t) {
      Outcomes y = initial_outcomes(study, 0);
      impute_missing(study, y, rng);
      ones += y[0][4];
    }
    CHECK(std::abs(ones / 10000.0 - 0.5) < 0.02);
  }
}

TEST_CASE("an isolated missing spot uses the observed prevalence") {
  SliceData s;
  for (int i = 0; i < 11; ++i) s.grid.positions.push_back({10.0 * i, 0.0});
  s.graph = std::make_shared<const NeighborGraph>(build_neighbor_graph(s.grid, 1.0));
  s.x = Eigen::MatrixXd::Zero(11, 1);
  s.y = {1, 1, 1, 0, 0, 0, 0, 0, 0, 0, -1};
  s.r = {1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 0};
  StudyData study = single_slice_study(std::move(s));
  Rng rng(5);
  int ones = 0;
  for (int t = 0; t < 10000; ++t) {
    Outcomes y = initial_outcomes(study, 0);
    impute_missing(study, y, rng);
    ones += y[0][10];
  }
  CHECK(std::abs(ones / 10000.0 - 0.3) < 0.02);
}

TEST_CASE("missing mode none equals ignorable on complete data") {
  Quiet quiet;
  Rng rng(11);
  StudyData study = single_slice_study(fixtures::random_slice(6, 2, rng, 0.0));
  for (FitSpec spec : {quick_advi(), quick_nuts()}) {
    spec.missing_mode = MissingMode::kNone;
    const auto a = fit(study, soft(), spec);
    spec.missing_mode = MissingMode::kIgnorable;
    const auto b = fit(study, soft(), spec);
    CHECK(a.draws == b.draws);
  }
}

TEST_CASE("missing mode none rejects masked spots") {
  Rng rng(12);
  StudyData study = single_slice_study(fixtures::random_slice(6, 2, rng, 0.2));
  FitSpec spec = quick_advi();
  spec.missing_mode = MissingMode::kNone;
  CHECK_THROWS_AS(fit(study, Hyperparams{}, spec), InputError);
}

TEST_CASE("fits are reproducible including the imputation interleave") {
  Quiet quiet;
  Rng rng(13);
  StudyData study = single_slice_study(fixtures::random_slice(6, 2, rng, 0.2));
  for (FitSpec spec : {quick_advi(), quick_nuts()}) {
    spec.seed = 9;
    const auto a = fit(study, soft(), spec);
    const auto b = fit(study, soft(), spec);
    CHECK(a.draws == b.draws);
    CHECK(a.imputed == b.imputed);
    spec.seed = 10;
    const auto c = fit(study, soft(), spec);
    CHECK(a.draws != c.draws);
  }
}

TEST_CASE("fit output shapes and support") {
  Quiet quiet;
  Rng rng(14);
  StudyData study = single_slice_study(fixtures::random_slice(6, 3, rng, 0.1));
  const auto r = fit(study, Hyperparams{}, quick_advi());
  CHECK(r.draws.rows() == 200);
  CHECK(r.draws.cols() == r.layout.dim());
  CHECK(r.summary.covariates.size() == 3);
  for (Eigen::Index i = 0; i < r.draws.rows(); ++i) {
    CHECK(r.draws(i, r.layout.eta()) >= 0.0);
    CHECK(r.draws(i, r.layout.eta()) <= 8.0);
  }
  for (const auto& p : r.summary.parameters) CHECK(p.ci_low < p.ci_high);
  CHECK(r.posterior_mean.beta.size() == 3);
}

TEST_CASE("nonignorable fits estimate gamma") {
  Quiet quiet;
  Rng rng(15);
  StudyData study = single_slice_study(fixtures::random_slice(6, 2, rng, 0.2));
  FitSpec spec = quick_advi();
  spec.missing_mode = MissingMode::kNonignorable;
  const auto r = fit(study, Hyperparams{}, spec);
  CHECK(r.layout.has_gamma());
  CHECK(r.summary.find("gamma2") != nullptr);
}

TEST_CASE("fixed eta removes the spatial coordinate") {
  Quiet quiet;
  Rng rng(16);
  StudyData study = single_slice_study(fixtures::random_slice(6, 2, rng, 0.0));
  FitSpec spec = quick_advi();
  spec.fixed_eta = 0.0;
  const auto r = fit(study, Hyperparams{}, spec);
  CHECK_FALSE(r.layout.has_eta());
  CHECK(r.summary.find("eta") == nullptr);
  CHECK(r.posterior_mean.eta == 0.0);
}

TEST_CASE("quantiles and summaries") {
  CHECK(quantile({3.0, 1.0, 2.0}, 0.5) == 2.0);
  CHECK(quantile({0.0, 10.0}, 0.25) == Approx(2.5));
  ModelVariant v;
  v.d = 1;
  ParamLayout layout(v);
  Eigen::MatrixXd theta(4, layout.dim());
  for (int r = 0; r < 4; ++r) {
    theta(r, layout.eta()) = 1.0 + r;
    theta(r, layout.beta()) = 2.0 * r;
    theta(r, layout.tau2()) = 1.0;
    theta(r, layout.w()) = 0.5;
  }
  const auto s = summarize(theta, layout.names(), layout, 1e-6, {});
  CHECK(s.at("eta").mean == Approx(2.5));
  CHECK(s.at("beta[1]").sd == Approx(std::sqrt(20.0 / 3.0)));
  CHECK(s.covariates.at(0).ratio == Approx(3.0 / std::sqrt(20.0 / 3.0)));
  CHECK_THROWS_AS(static_cast<void>(s.at("nope")), InputError);
}

TEST_CASE("gene selection") {
  Quiet quiet;
  SUBCASE("all zero means select nothing") {
    CHECK(select_genes(summary_with_ratios({0, 0, 0}, {1, 1, 1})).empty());
  }
  SUBCASE("top-K at threshold 0 returns the largest ratios") {
    const auto s = select_genes(summary_with_ratios({0.5, -3.0, 1.0, 2.0, 0.1}, {1, 1, 1, 1, 1}), 0.0, 3);
    REQUIRE(s.size() == 3);
    CHECK(s[0].index == 1);
    CHECK(s[1].index == 3);
    CHECK(s[2].index == 2);
  }
  SUBCASE("zero sd counts as an infinite ratio") {
    const auto s = select_genes(summary_with_ratios({0.0, 1.0}, {0.0, 1.0}));
    REQUIRE(s.size() == 1);
    CHECK(std::isinf(s[0].ratio));
  }
  SUBCASE("permuting covariates permutes the selection") {
    const std::vector<double> m = {0.3, 5.0, -4.0, 2.5, 0.0};
    const std::vector<double> sd = {1.0, 1.0, 1.0, 1.0, 1.0};
    const std::vector<std::size_t> perm = {4, 2, 0, 3, 1};
    std::vector<double> pm(5), psd(5);
    for (std::size_t k = 0; k < 5; ++k) {
      pm[k] = m[perm[k]];
      psd[k] = sd[perm[k]];
    }
    const auto a = select_genes(summary_with_ratios(m, sd));
    const auto b = select_genes(summary_with_ratios(pm, psd));
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(perm[b[i].index] == a[i].index);
  }
}

TEST_CASE("interaction expansion") {
  Quiet quiet;
  Rng rng(17);
  StudyData study = single_slice_study(fixtures::random_slice(4, 3, rng, 0.0), {"a", "b", "c"});
  CHECK(expand_interactions(study, {}).slices[0].x == study.slices[0].x);
  const auto full = expand_interactions(study, all_pairs({0, 1, 2}));
  CHECK(full.d() == 6);
  CHECK(full.covariate_names.back() == "b:c");
  const Eigen::VectorXd prod = study.slices[0].x.col(0).cwiseProduct(study.slices[0].x.col(1));
  CHECK(full.slices[0].x.col(3) == prod);
  CHECK(expand_interactions(study, {{0, 1}, {1, 0}, {0, 1}}).d() == 4);
  CHECK_THROWS_AS(expand_interactions(study, {{0, 3}}), InputError);
}

TEST_CASE("prediction") {
  Quiet quiet;
  Rng rng(18);
  SliceData slice = fixtures::random_slice(10, 2, rng, 0.0);
  ModelParams p;
  p.beta = Eigen::Vector2d(1.0, -0.5);
  p.tau2 = Eigen::Vector2d::Ones();

  SUBCASE("eta zero is plain logistic regression") {
    p.eta = 0.0;
    const auto pr = predict(p, slice);
    CHECK(pr.iterations == 0);
    for (Eigen::Index i = 0; i < pr.mu_hat.size(); ++i) {
      CHECK(pr.mu_hat(i) == Approx(math::sigmoid(slice.x.row(i).dot(p.beta))));
    }
  }
  SUBCASE("cutoff one labels nothing") {
    p.eta = 1.6;
    PredictOptions o;
    o.cutoff = 1.0;
    const auto pr = predict(p, slice, o);
    CHECK(std::all_of(pr.labels.begin(), pr.labels.end(), [](int l) { return l == 0; }));
  }
  SUBCASE("fixed point is a fixed point") {
    p.eta = 1.6;
    const auto pr = predict(p, slice);
    CHECK(pr.converged);
    for (std::size_t i = 0; i < slice.size(); ++i) {
      const double mu = math::sigmoid(slice.x.row(static_cast<Eigen::Index>(i)).dot(p.beta) +
                                      p.eta * slice.graph->neighbor_mean(i, pr.mu_hat));
      CHECK(pr.mu_hat(static_cast<Eigen::Index>(i)) == Approx(mu).epsilon(1e-5));
    }
  }
  SUBCASE("iterations from all zeros and all ones meet") {
    p.eta = 2.8;
    PredictOptions lo, hi;
    lo.start = 0.0;
    hi.start = 1.0;
    const auto a = predict(p, slice, lo);
    const auto b = predict(p, slice, hi);
    CHECK((a.mu_hat - b.mu_hat).cwiseAbs().maxCoeff() < 1e-4);
  }
  SUBCASE("the map is monotone in the neighbor values") {
    p.eta = 1.6;
    PredictOptions o;
    o.max_iters = 1;
    o.start = 0.3;
    const auto a = predict(p, slice, o);
    o.start = 0.4;
    const auto b = predict(p, slice, o);
    CHECK((b.mu_hat - a.mu_hat).minCoeff() >= 0.0);
  }
  SUBCASE("gibbs prediction is close to the fixed point for weak coupling") {
    p.eta = 0.5;
    PredictOptions o;
    o.method = PredictionMethod::kGibbs;
    o.gibbs_sweeps = 4000;
    const auto g = predict(p, slice, o);
    const auto f = predict(p, slice);
    CHECK((g.mu_hat - f.mu_hat).cwiseAbs().mean() < 0.03);
  }
  SUBCASE("accuracy counts observed spots") {
    p.eta = 0.0;
    slice.r[0] = 0;
    const auto pr = predict(p, slice);
    std::size_t correct = 0;
    for (std::size_t i = 1; i < slice.size(); ++i) correct += pr.labels[i] == slice.y[i];
    CHECK(*pr.accuracy == Approx(static_cast<double>(correct) / static_cast<double>(slice.size() - 1)));
  }
  SUBCASE("covariate mismatch throws") {
    p.beta = Eigen::Vector3d::Ones();
    CHECK_THROWS_AS(predict(p, slice), InputError);
  }
}

TEST_CASE("self-prediction on a simulated slice") {
  Quiet quiet;
  SimConfig c = preset("sim1-eta1.6");
  c.seed = 3;
  const auto sim = simulate(c);
  const auto r = fit(sim.study, Hyperparams{}, FitSpec{});
  const auto pr = predict(r.posterior_mean, sim.study.slices[0]);
  CHECK(*pr.accuracy > 0.8);
}

TEST_CASE("simulation report with an exact stub engine") {
  Quiet quiet;
  SimConfig c = preset("sim1-eta1.6");
  c.m = 5;
  c.gibbs_sweeps = 5;
  const ReplicateFitter exact = [](const SimulatedStudy& sim, std::size_t) {
    PosteriorSummary s;
    for (const auto& [name, value] : reported_truth(sim)) s.parameters.push_back({name, value, 0.1, value - 0.2, value + 0.2});
    return s;
  };
  const auto rep = simulation_report(c, 4, exact, 2);
  CHECK(rep.successes == 4);
  CHECK(rep.rows.size() == 21);
  for (const auto& row : rep.rows) {
    CHECK(row.avg_bias == 0.0);
    CHECK(row.avg_cr == 1.0);
    CHECK(row.avg_sem == Approx(0.1));
    CHECK(*row.avg_see == 0.0);
  }
  const auto single = simulation_report(c, 1, exact, 1);
  CHECK_FALSE(single.rows.front().avg_see.has_value());
  CHECK_FALSE(single.see_note.empty());
}

TEST_CASE("simulation report discloses failures and ignores thread count") {
  Quiet quiet;
  SimConfig c = preset("sim1-eta1.6");
  c.m = 5;
  c.gibbs_sweeps = 5;
  const ReplicateFitter flaky = [](const SimulatedStudy& sim, std::size_t r) {
    if (r == 1) throw EngineError("boom");
    PosteriorSummary s;
    const double shift = sim.study.slices[0].x(0, 0);
    for (const auto& [name, value] : reported_truth(sim)) {
      s.parameters.push_back({name, value + shift, 0.1, value + shift - 0.1, value + shift + 0.1});
    }
    return s;
  };
  const auto a = simulation_report(c, 5, flaky, 1);
  const auto b = simulation_report(c, 5, flaky, 3);
  CHECK(a.successes == 4);
  CHECK_FALSE(a.results[1].ok);
  CHECK(a.results[1].error == "boom");
  REQUIRE(a.rows.size() == b.rows.size());
  for (std::size_t i = 0; i < a.rows.size(); ++i) {
    CHECK(a.rows[i].avg_bias == b.rows[i].avg_bias);
    CHECK(a.rows[i].avg_cr == b.rows[i].avg_cr);
    CHECK(a.rows[i].avg_cr >= 0.0);
    CHECK(a.rows[i].avg_cr <= 1.0);
  }
}

TEST_CASE("engine and mode names round-trip") {
  for (Engine e : {Engine::kNuts, Engine::kAdvi}) CHECK(parse_engine(to_string(e)) == e);
  for (MissingMode m : {MissingMode::kNone, MissingMode::kIgnorable, MissingMode::kNonignorable}) {
    CHECK(parse_missing_mode(to_string(m)) == m);
  }
  CHECK_THROWS_AS(parse_engine("hmc"), ConfigError);
}
