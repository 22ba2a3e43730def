#include "doctest.h"

#include <cmath>

#include "fixtures.hpp"
#include "fmtree/data.hpp"
#include "fmtree/mlr.hpp"
#include "fmtree/random.hpp"
#include "fmtree/special_functions.hpp"
#include "fmtree/treeboost.hpp"

using namespace fmtree;

namespace {

Eigen::MatrixXd smooth_design(Eigen::Index n, Rng& rng) {
  Eigen::MatrixXd x(n, 2);
  for (Eigen::Index i = 0; i < n; ++i) {
    x(i, 0) = rng.uniform() * 4.0;
    x(i, 1) = rng.uniform() * 4.0;
  }
  return x;
}

Eigen::VectorXd smooth_target(const Eigen::MatrixXd& x, Rng& rng) {
  Eigen::VectorXd y(x.rows());
  for (Eigen::Index i = 0; i < x.rows(); ++i) y(i) = std::sin(x(i, 0)) + 0.5 * x(i, 1) + 0.1 * rng.normal();
  return y;
}

// Projects drawn from the reference log-linear equation, optionally with noise.
Dataset mlr_projects(std::size_t n, std::uint64_t seed, double noise) {
  Rng rng(seed);
  std::vector<Project> rows;
  for (std::size_t i = 0; i < n; ++i) {
    Project p;
    p.id = "m" + std::to_string(i);
    p.size_ucp = 20.0 + 500.0 * rng.uniform();
    p.productivity = 10.0 + 25.0 * rng.uniform();
    p.complexity = 1.0 + 4.0 * rng.uniform();
    p.effort_ph = std::exp(1.8 + 1.24 * std::log(p.size_ucp) + 0.007 * p.productivity + 0.12 * p.complexity +
                           noise * rng.normal());
    rows.push_back(p);
  }
  return Dataset(rows);
}

} // namespace

TEST_SUITE("baselines") {

TEST_CASE("huber loss and location") {
  Eigen::VectorXd r(4);
  r << 0.5, -1.0, 3.0, -4.0;
  // quadratic below delta=2, linear above
  CHECK(huber_loss(r, 2.0) == doctest::Approx(0.125 + 0.5 + (2.0 * 3.0 - 2.0) + (2.0 * 4.0 - 2.0)));

  Rng rng(2);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> v(15);
    for (auto& x : v) x = rng.normal() * 5.0 + (rng.uniform() < 0.2 ? 30.0 : 0.0);
    const double delta = 0.5 + 3.0 * rng.uniform();
    const double t = huber_location(v, delta);
    Eigen::VectorXd ev = Eigen::Map<Eigen::VectorXd>(v.data(), 15);
    const double at = huber_loss(ev.array() - t, delta);
    // grid search oracle around the minimizer
    for (double s = -1.0; s <= 1.0; s += 0.01) CHECK(at <= huber_loss(ev.array() - (t + s), delta) + 1e-9);
  }
  CHECK(huber_location({1.0, 2.0, 10.0}, 0.0) == 2.0);
}

TEST_CASE("constant targets predict that constant") {
  Rng rng(1);
  const auto x = smooth_design(30, rng);
  const auto model = fit_treeboost(x, Eigen::VectorXd::Constant(30, 12.5), TreeboostConfig{});
  for (Eigen::Index i = 0; i < 30; ++i) CHECK(model.score(x.row(i)) == 12.5);
}

TEST_CASE("vanishing shrinkage leaves f0") {
  Rng rng(2);
  const auto x = smooth_design(40, rng);
  const auto y = smooth_target(x, rng);
  TreeboostConfig cfg;
  cfg.shrinkage = 1e-12;
  cfg.n_trees = 1;
  const auto model = fit_treeboost(x, y, cfg);
  for (Eigen::Index i = 0; i < 40; ++i) CHECK(model.score(x.row(i)) == doctest::Approx(model.f0).epsilon(1e-6));
}

TEST_CASE("series arithmetic") {
  TreeboostModel m;
  m.f0 = 100.0;
  m.shrinkage = 0.1;
  Eigen::RowVectorXd x = Eigen::RowVectorXd::Zero(3);
  CHECK(m.score(x) == 100.0);
  RegressionTree t;
  t.nodes.push_back({-1, 0.0, -1, -1, 5.0});
  m.trees.push_back(t);
  CHECK(m.score(x) == doctest::Approx(100.5));
}

TEST_CASE("deterministic training loss with full sample and no trimming") {
  Rng rng(3);
  const auto x = smooth_design(150, rng);
  const auto y = smooth_target(x, rng);
  TreeboostConfig cfg;
  cfg.n_trees = 200;
  cfg.stochastic_fraction = 1.0;
  cfg.influence_trimming = 0.0;
  const auto model = fit_treeboost(x, y, cfg);
  REQUIRE(model.trace.size() == 200);
  for (const auto& round : model.trace) CHECK(round.loss_after <= round.loss_before + 1e-12);
  CHECK(model.trace.back().loss_after < model.trace.front().loss_before);
}

TEST_CASE("fixed seed gives bit-identical models") {
  Rng rng(4);
  const auto x = smooth_design(80, rng);
  const auto y = smooth_target(x, rng);
  TreeboostConfig cfg;
  cfg.n_trees = 100;
  cfg.seed = 9;
  const auto a = to_json(fit_treeboost(x, y, cfg));
  const auto b = to_json(fit_treeboost(x, y, cfg));
  CHECK(a.dump() == b.dump());
  cfg.seed = 10;
  CHECK(a.dump() != to_json(fit_treeboost(x, y, cfg)).dump());
}

TEST_CASE("identical projects get identical treeboost predictions") {
  const auto train = generate_piecewise_benchmark(59, 2);
  TreeboostConfig cfg;
  cfg.n_trees = 50;
  const auto model = fit_treeboost(train, cfg);
  Project copy = train[5];
  copy.id = "other";
  CHECK(predict_treeboost(model, copy) == predict_treeboost(model, train[5]));
  const auto back = treeboost_model_from_json(to_json(model));
  CHECK(predict_treeboost(back, train) == predict_treeboost(model, train));
  CHECK_THROWS(fit_treeboost(Dataset(std::vector<Project>(train.begin(), train.begin() + 5)), cfg));
}

TEST_CASE("treeboost config validation") {
  TreeboostConfig cfg;
  cfg.stochastic_fraction = 0.0;
  CHECK_THROWS(cfg.validate());
  cfg = TreeboostConfig{};
  cfg.shrinkage = 1.5;
  CHECK_THROWS(cfg.validate());
  cfg = TreeboostConfig{};
  cfg.n_trees = -1;
  CHECK_THROWS(cfg.validate());
  cfg = TreeboostConfig{};
  cfg.huber_quantile = 1.0;
  CHECK_THROWS(cfg.validate());
  CHECK(treeboost_config_from_json(to_json(TreeboostConfig{})).n_trees == 1000);
}

TEST_CASE("mlr recovers the generating coefficients") {
  const auto model = fit_mlr(mlr_projects(60, 1, 0.0));
  CHECK(std::abs(model.intercept - 1.8) < 1e-6);
  CHECK(std::abs(model.coef_ln_size - 1.24) < 1e-6);
  CHECK(std::abs(model.coef_productivity - 0.007) < 1e-6);
  CHECK(std::abs(model.coef_complexity - 0.12) < 1e-6);
  CHECK(model.r2 == doctest::Approx(1.0));
}

TEST_CASE("mlr diagnostics under independent features") {
  const auto model = fit_mlr(mlr_projects(5000, 2, 0.3));
  CHECK((model.vif.array() < 1.1).all());
  CHECK((model.vif.array() >= 1.0).all());
  CHECK(model.p_values(1) < 1e-10);
  CHECK(model.adjusted_r2 < model.r2);
  CHECK(model.residual_se == doctest::Approx(0.3).epsilon(0.05));
  // t = coef / se
  for (int i = 0; i < 4; ++i) CHECK(model.t_stats(i) == doctest::Approx(model.coefficients()(i) / model.std_errors(i)));
}

TEST_CASE("mlr standard errors match the textbook formula") {
  const auto data = mlr_projects(30, 3, 0.2);
  const auto model = fit_mlr(data);
  const Eigen::MatrixXd x = mlr_design(data);
  Eigen::VectorXd y(30);
  for (Eigen::Index i = 0; i < 30; ++i) y(i) = std::log(data[static_cast<std::size_t>(i)].effort_ph);
  const Eigen::VectorXd beta = (x.transpose() * x).ldlt().solve(x.transpose() * y);
  const double s2 = (y - x * beta).squaredNorm() / 26.0;
  const Eigen::MatrixXd cov = s2 * (x.transpose() * x).inverse();
  for (int i = 0; i < 4; ++i) {
    CHECK(model.coefficients()(i) == doctest::Approx(beta(i)).epsilon(1e-8));
    CHECK(model.std_errors(i) == doctest::Approx(std::sqrt(cov(i, i))).epsilon(1e-8));
    CHECK(model.p_values(i) == doctest::Approx(student_t_two_sided_p(model.t_stats(i), 26.0)));
  }
}

TEST_CASE("mlr preconditions") {
  auto rows = mlr_projects(10, 4, 0.1).projects();
  CHECK_THROWS(fit_mlr(Dataset(std::vector<Project>(rows.begin(), rows.begin() + 4))));
  for (auto& p : rows) p.complexity = 2.0;
  CHECK_THROWS(fit_mlr(Dataset(rows)));  // constant column is collinear with the intercept

  Project zero = rows[0];
  zero.size_ucp = 0.0;
  CHECK_THROWS_AS(predict_mlr(reference_mlr_model(), zero), DataError);
}

TEST_CASE("reference equation predictions") {
  const auto ref = reference_mlr_model();
  Project p{"x", 1.0, 0.0, 0.0, 1.0};
  CHECK(predict_mlr(ref, p) == doctest::Approx(std::exp(1.8)));
  CHECK(predict_mlr(ref, p) == doctest::Approx(6.0496).epsilon(1e-4));
  p = {"y", 100.0, 10.0, 2.0, 1.0};
  CHECK(predict_mlr(ref, p) == doctest::Approx(std::exp(1.8 + 1.24 * std::log(100.0) + 0.07 + 0.24)));
  CHECK(predict_mlr(ref, p) == doctest::Approx(2.49e3).epsilon(0.002));
}

TEST_CASE("mlr json round-trip") {
  const auto model = fit_mlr(mlr_projects(40, 5, 0.2));
  const auto j = to_json(model);
  const auto back = mlr_model_from_json(j);
  CHECK(back.coefficients() == model.coefficients());
  CHECK(j.at("kind") == "mlr");
}

TEST_CASE("special functions") {
  CHECK(normal_cdf(0.0) == doctest::Approx(0.5));
  CHECK(normal_cdf(1.959963984540054) == doctest::Approx(0.975));
  for (double p : {1e-6, 0.01, 0.3, 0.5, 0.9, 0.999}) CHECK(normal_cdf(normal_quantile(p)) == doctest::Approx(p));
  CHECK(incomplete_beta(1.0, 1.0, 0.3) == doctest::Approx(0.3));
  CHECK(incomplete_beta(2.0, 3.0, 0.4) == doctest::Approx(0.5248));
  // t with 1 dof is Cauchy: P(|T| > 1) = 0.5
  CHECK(student_t_two_sided_p(1.0, 1.0) == doctest::Approx(0.5));
  CHECK(student_t_two_sided_p(2.228138851986, 10.0) == doctest::Approx(0.05).epsilon(1e-6));
}

} // TEST_SUITE
