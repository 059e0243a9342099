#include <cmath>
#include <numbers>

#include "doctest.h"
#include "fixtures.hpp"
#include "ssal/errors.hpp"
#include "ssal/log.hpp"
#include "ssal/math.hpp"
#include "ssal/model.hpp"

using namespace ssal;
using doctest::Approx;

namespace {

double ref_sigmoid(double a) { return 1.0 / (1.0 + std::exp(-a)); }

double ref_normal_pdf(double x, double var) {
  return std::exp(-0.5 * x * x / var) / std::sqrt(2.0 * std::numbers::pi * var);
}

/// 3 spots in a row: 1 - 0 - 2 (center at index 0).
SliceData star_slice(std::size_t spokes) {
  SliceData s;
  s.grid.positions.push_back({0.0, 0.0});
  const double offsets[4][2] = {{1, 0}, {-1, 0}, {0, 1}, {0, -1}};
  for (std::size_t k = 0; k < spokes; ++k) s.grid.positions.push_back({offsets[k][0], offsets[k][1]});
  s.graph = std::make_shared<const NeighborGraph>(build_neighbor_graph(s.grid, 1.0));
  s.x = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(spokes + 1), 1);
  s.x(0, 0) = 1.0;
  s.y.assign(spokes + 1, 0);
  s.r.assign(spokes + 1, 1);
  return s;
}

ModelParams simple_params(double eta, double beta) {
  ModelParams p;
  p.eta = eta;
  p.beta = Eigen::VectorXd::Constant(1, beta);
  p.tau2 = Eigen::VectorXd::Ones(1);
  p.w = 0.5;
  return p;
}

struct VariantCase {
  const char* name;
  StudyData study;
  ModelVariant variant;
};

std::vector<VariantCase> variant_cases() {
  Rng rng(2024);
  std::vector<VariantCase> out;
  {
    auto study = single_slice_study(fixtures::random_slice(4, 3, rng));
    auto v = variant_for(study, false, false);
    out.push_back({"single-slice", std::move(study), v});
  }
  {
    auto study = single_slice_study(fixtures::random_slice(4, 3, rng));
    auto v = variant_for(study, false, false);
    v.fixed_eta = 0.0;
    v.fixed_w = 1.0;
    out.push_back({"single-slice, eta and w fixed", std::move(study), v});
  }
  {
    auto study = fixtures::random_study(2, 3, 3, 3, rng, CorrelationStructure::kExchangeable);
    auto v = variant_for(study, true, false);
    out.push_back({"multi-slice exchangeable", std::move(study), v});
  }
  {
    auto study = fixtures::random_study(2, 3, 3, 3, rng, CorrelationStructure::kAutoregressive);
    auto v = variant_for(study, true, false);
    out.push_back({"multi-slice autoregressive", std::move(study), v});
  }
  {
    auto study = single_slice_study(fixtures::random_slice(4, 3, rng, 0.3));
    auto v = variant_for(study, false, true);
    out.push_back({"nonignorable", std::move(study), v});
  }
  {
    auto study = fixtures::random_study(2, 2, 3, 2, rng, CorrelationStructure::kAutoregressive, 0.3);
    auto v = variant_for(study, true, true);
    out.push_back({"multi-slice nonignorable", std::move(study), v});
  }
  return out;
}

}  // namespace

TEST_CASE("conditional mean oracle values") {
  auto s = star_slice(4);
  std::vector<int> y{0, 1, 1, 1, 1};
  CHECK(conditional_mean(simple_params(1.6, 1.0), s, 0, y) == Approx(ref_sigmoid(2.6)).epsilon(1e-12));
  CHECK(conditional_mean(simple_params(1.6, 1.0), s, 0, y) == Approx(0.93086).epsilon(1e-5));
  std::vector<int> zeros(5, 0);
  CHECK(conditional_mean(simple_params(1.6, 1.0), s, 0, zeros) == Approx(0.73106).epsilon(1e-5));
  CHECK(conditional_mean(simple_params(0.0, 0.0), s, 0, y) == 0.5);
  CHECK_THROWS_AS(conditional_mean(simple_params(0.0, 0.0), s, 7, y), InputError);
}

TEST_CASE("conditional mean increases with neighbor outcomes when eta > 0") {
  auto s = star_slice(4);
  std::vector<int> y(5, 0);
  double prev = conditional_mean(simple_params(0.7, 0.2), s, 0, y);
  for (std::size_t k = 1; k < 5; ++k) {
    y[k] = 1;
    const double next = conditional_mean(simple_params(0.7, 0.2), s, 0, y);
    CHECK(next > prev);
    CHECK(next < 1.0);
    prev = next;
  }
}

TEST_CASE("isolated spot has no autocovariate") {
  auto s = star_slice(0);
  std::vector<int> y{1};
  CHECK(linear_predictor(simple_params(3.0, 0.5), s, 0, y) == Approx(0.5));
}

TEST_CASE("missing propensity oracle values") {
  auto s = star_slice(4);
  std::vector<int> y{1, 0, 0, 0, 0};
  std::vector<std::uint8_t> all_observed(5, 1);
  CHECK(missing_propensity(Eigen::Vector3d(-6, 1, 4), s, 0, y, all_observed) == Approx(0.26894).epsilon(1e-5));
  y[0] = 0;
  std::vector<std::uint8_t> half{1, 1, 1, 0, 0};
  CHECK(missing_propensity(Eigen::Vector3d(-5, 1, 1.6), s, 0, y, half) == Approx(0.01477).epsilon(1e-4));
  CHECK(missing_propensity(Eigen::Vector3d::Zero(), s, 0, y, half) == 0.5);
}

TEST_CASE("pseudo-likelihood oracle values") {
  SliceData one;
  one.grid.positions.push_back({0.0, 0.0});
  one.graph = std::make_shared<const NeighborGraph>(build_neighbor_graph(one.grid, 1.0));
  one.x = Eigen::MatrixXd::Zero(1, 1);
  one.y = {1};
  one.r = {1};
  CHECK(log_pseudo_likelihood(simple_params(0.0, 0.0), one, one.y) == Approx(std::log(0.5)));

  // Two isolated spots with linear predictors 2.6 and 1.0.
  SliceData two;
  two.grid.positions = {{0.0, 0.0}, {5.0, 0.0}};
  two.graph = std::make_shared<const NeighborGraph>(build_neighbor_graph(two.grid, 1.0));
  two.x = Eigen::MatrixXd(2, 1);
  two.x << 2.6, 1.0;
  two.y = {1, 1};
  two.r = {1, 1};
  CHECK(log_pseudo_likelihood(simple_params(0.0, 1.0), two, two.y) == Approx(-0.38482).epsilon(1e-4));

  two.r[1] = 0;
  two.y[1] = -1;
  CHECK_THROWS_AS(log_pseudo_likelihood(simple_params(0.0, 1.0), two, two.y), StateError);
}

TEST_CASE("log prior oracle values") {
  Hyperparams h;
  ModelVariant v;
  v.d = 1;
  auto p = simple_params(1.0, 0.0);
  const double mixture = 0.5 * ref_normal_pdf(0.0, 1e-6) + 0.5 * ref_normal_pdf(0.0, 1.0);
  const double ig = h.b1 * std::log(h.b2) - std::lgamma(h.b1) - (h.b1 + 1.0) * std::log(1.0) - h.b2;
  CHECK(log_prior(p, h, v) == Approx(std::log(mixture) + ig - std::log(h.c1)).epsilon(1e-12));

  p.eta = h.c1 + 0.01;
  CHECK(log_prior(p, h, v) == -INFINITY);
  p.eta = 1.0;
  p.tau2(0) = -1.0;
  CHECK(log_prior(p, h, v) == -INFINITY);
}

TEST_CASE("log prior with rho = 0 reduces to independent normals") {
  Hyperparams h;
  ModelVariant v;
  v.d = 1;
  v.multislice = true;
  v.donors = 1;
  v.slices_per_donor = 3;
  auto p = simple_params(1.0, 0.3);
  p.U = Eigen::MatrixXd(1, 3);
  p.U << 0.2, -0.5, 1.1;
  p.sigma2 = Eigen::VectorXd::Constant(1, 0.7);
  p.rho = 0.0;
  ModelVariant flat = v;
  flat.multislice = false;
  double expected = log_prior(p, h, flat);
  for (int g = 0; g < 3; ++g) expected += std::log(ref_normal_pdf(p.U(0, g), 0.7));
  expected += h.b3 * std::log(h.b4) - std::lgamma(h.b3) - (h.b3 + 1.0) * std::log(0.7) - h.b4 / 0.7;
  CHECK(log_prior(p, h, v) == Approx(expected).epsilon(1e-12));
}

TEST_CASE("log prior is invariant to permuting coefficients") {
  Hyperparams h;
  ModelVariant v;
  v.d = 3;
  ModelParams p = default_params(v, h);
  p.beta << 0.4, -1.2, 0.001;
  p.tau2 << 2.0, 7.0, 0.5;
  ModelParams q = p;
  q.beta << -1.2, 0.001, 0.4;
  q.tau2 << 7.0, 0.5, 2.0;
  CHECK(log_prior(p, h, v) == Approx(log_prior(q, h, v)).epsilon(1e-13));
}

TEST_CASE("correlation matrices") {
  CHECK(correlation_matrix(CorrelationStructure::kExchangeable, 0.0, 3).isApprox(Eigen::MatrixXd::Identity(3, 3)));
  const auto ar = correlation_matrix(CorrelationStructure::kAutoregressive, 0.4, 3);
  CHECK(ar(0, 1) == Approx(0.4));
  CHECK(ar(0, 2) == Approx(0.16));
  CHECK(ar(1, 2) == Approx(0.4));
  const auto ex = correlation_matrix(CorrelationStructure::kExchangeable, 0.4, 6);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(ex);
  CHECK(eig.eigenvalues().minCoeff() == Approx(0.6));
  CHECK(ex.isApprox(ex.transpose()));
  CHECK(ex.diagonal().isOnes());
  CHECK_THROWS_AS(correlation_matrix(CorrelationStructure::kExchangeable, -0.5, 4), ConfigError);
  CHECK_THROWS_AS(correlation_matrix(CorrelationStructure::kExchangeable, 0.1, 0), ConfigError);
}

TEST_CASE("transform oracle values and round-trip") {
  Hyperparams h;
  ModelVariant v;
  v.d = 2;
  ParamLayout layout(v);
  ModelParams p = default_params(v, h);
  p.eta = h.c1 / 2.0;
  p.tau2 << 1.0, 3.0;
  p.w = 0.975;
  const auto z = transform(p, h, layout);
  CHECK(z(layout.eta()) == Approx(0.0).scale(1.0));
  CHECK(z(layout.tau2()) == Approx(0.0).scale(1.0));
  CHECK(z(layout.w()) == Approx(1.95996).epsilon(1e-5));

  for (const auto& vc : variant_cases()) {
    CAPTURE(std::string(vc.name));
    ParamLayout lay(vc.variant);
    Rng rng(5);
    double worst = 0.0;
    for (int rep = 0; rep < 1000; ++rep) {
      const Eigen::VectorXd zeta = fixtures::random_vector(lay.dim(), rng, 1.5);
      const auto theta = untransform(zeta, h, lay);
      const auto back = transform(theta, h, lay);
      worst = std::max(worst, fixtures::max_rel_error(zeta, back));
    }
    CHECK(worst < 1e-10);
  }
}

TEST_CASE("boundary values clamp in probit space") {
  set_warnings_enabled(false);
  Hyperparams h;
  ModelVariant v;
  v.d = 1;
  ParamLayout layout(v);
  auto p = default_params(v, h);
  p.eta = 0.0;
  p.w = 1.0;
  const auto z = transform(p, h, layout);
  CHECK(z(layout.eta()) == -kProbitClamp);
  CHECK(z(layout.w()) == kProbitClamp);
  set_warnings_enabled(true);
}

TEST_CASE("log-Jacobian matches its closed form and the numerical determinant") {
  Hyperparams h;
  ModelVariant v;
  v.d = 1;
  ParamLayout layout(v);
  Eigen::VectorXd z = Eigen::VectorXd::Zero(layout.dim());
  const double expected = std::log(8.0) + 2.0 * std::log(1.0 / std::sqrt(2.0 * std::numbers::pi));
  CHECK(log_abs_det_jacobian(z, h, layout) == Approx(expected).epsilon(1e-13));

  for (const auto& vc : variant_cases()) {
    CAPTURE(std::string(vc.name));
    ParamLayout lay(vc.variant);
    Rng rng(8);
    for (int rep = 0; rep < 100; ++rep) {
      const Eigen::VectorXd zeta = fixtures::random_vector(lay.dim(), rng);
      const double hstep = 1e-6;
      Eigen::MatrixXd J(lay.dim(), lay.dim());
      for (Eigen::Index j = 0; j < lay.dim(); ++j) {
        Eigen::VectorXd up = zeta, down = zeta;
        up(j) += hstep;
        down(j) -= hstep;
        J.col(j) = (flatten(untransform(up, h, lay), lay) - flatten(untransform(down, h, lay), lay)) / (2 * hstep);
      }
      const double numeric = std::abs(J.determinant());
      CHECK(std::exp(log_abs_det_jacobian(zeta, h, lay)) == Approx(numeric).epsilon(1e-6));
      Eigen::VectorXd shifted = zeta;
      shifted.segment(lay.beta(), static_cast<Eigen::Index>(lay.variant().d)).array() += 0.7;
      CHECK(log_abs_det_jacobian(shifted, h, lay) == log_abs_det_jacobian(zeta, h, lay));
    }
  }
}

TEST_CASE("log joint is the sum of its parts") {
  Hyperparams h;
  for (const auto& vc : variant_cases()) {
    CAPTURE(std::string(vc.name));
    ParamLayout lay(vc.variant);
    Rng rng(13);
    const auto outcomes = fixtures::filled_outcomes(vc.study, rng);
    const Eigen::VectorXd zeta = fixtures::random_vector(lay.dim(), rng);
    const auto theta = untransform(zeta, h, lay);
    double parts = log_pseudo_likelihood(theta, vc.study, outcomes) + log_prior(theta, h, vc.variant) +
                   log_abs_det_jacobian(zeta, h, lay);
    if (vc.variant.nonignorable) parts += log_missingness_likelihood(theta.gamma, vc.study, outcomes);
    CHECK(log_joint(zeta, vc.study, outcomes, h, lay) == Approx(parts).epsilon(1e-12));
  }
}

TEST_CASE("flipping a well-predicted outcome lowers the log joint") {
  Hyperparams h;
  Rng rng(21);
  auto study = single_slice_study(fixtures::random_slice(4, 2, rng, 0.0));
  const auto v = variant_for(study, false, false);
  ParamLayout lay(v);
  const Eigen::VectorXd zeta = fixtures::random_vector(lay.dim(), rng);
  const auto theta = untransform(zeta, h, lay);
  auto& slice = study.slices[0];
  for (std::size_t i = 0; i < slice.size(); ++i) {
    if (slice.y[i] == 1 && conditional_mean(theta, slice, i, slice.y) > 0.5) {
      const Outcomes before{slice.y};
      Outcomes after = before;
      after[0][i] = 0;
      // Neighbors' autocovariates change too; compare only the spot's own term.
      const double own_before = math::bernoulli_logit_lpmf(1, linear_predictor(theta, slice, i, before[0]));
      const double own_after = math::bernoulli_logit_lpmf(0, linear_predictor(theta, slice, i, after[0]));
      CHECK(own_after < own_before);
      break;
    }
  }
}

TEST_CASE("analytic gradient matches central differences for every variant") {
  Hyperparams h;
  for (const auto& vc : variant_cases()) {
    CAPTURE(std::string(vc.name));
    ParamLayout lay(vc.variant);
    Rng rng(99);
    const auto outcomes = fixtures::filled_outcomes(vc.study, rng);
    double worst = 0.0;
    for (int rep = 0; rep < 50; ++rep) {
      const Eigen::VectorXd zeta = fixtures::random_vector(lay.dim(), rng);
      auto f = [&](const Eigen::VectorXd& z) { return log_joint(z, vc.study, outcomes, h, lay); };
      const auto fd = fixtures::central_difference(f, zeta);
      const auto g = grad_log_joint(zeta, vc.study, outcomes, h, lay);
      const double e = fixtures::max_rel_error(g, fd);
      worst = std::max(worst, e);
    }
    CHECK(worst < 1e-5);
  }
}

TEST_CASE("prior gradient of beta vanishes at zero with w = 0.5") {
  Hyperparams h;
  Rng rng(4);
  auto study = single_slice_study(fixtures::random_slice(3, 2, rng, 1.0));
  auto v = variant_for(study, false, false);
  ParamLayout lay(v);
  auto p = default_params(v, h);
  const auto zeta = transform(p, h, lay);
  const auto g = grad_log_joint(zeta, study, initial_outcomes(study), h, lay);
  CHECK(g.segment(lay.beta(), 2).norm() == Approx(0.0).scale(1.0));
}

TEST_CASE("unfilled missing outcome is a state error") {
  Hyperparams h;
  Rng rng(4);
  auto study = single_slice_study(fixtures::random_slice(3, 2, rng, 0.5));
  auto v = variant_for(study, false, false);
  ParamLayout lay(v);
  auto outcomes = initial_outcomes(study, -1);
  CHECK_THROWS_AS(log_joint(Eigen::VectorXd::Zero(lay.dim()), study, outcomes, h, lay), StateError);
}
