#include "doctest.h"

#include <cmath>

#include "fmtree/data.hpp"
#include "fmtree/fmt_model.hpp"
#include "fmtree/random.hpp"

using namespace fmtree;

namespace {

Dataset linear_projects(std::size_t n, std::uint64_t seed, std::size_t id_offset = 0) {
  Rng rng(seed);
  std::vector<Project> rows;
  for (std::size_t i = 0; i < n; ++i) {
    Project p;
    p.id = "lin-" + std::to_string(i + id_offset);
    p.size_ucp = 50.0 + 400.0 * rng.uniform();
    p.productivity = 10.0 + 25.0 * rng.uniform();
    p.complexity = 1.0 + static_cast<double>(rng.uniform_index(5));
    p.effort_ph = 100.0 + 20.0 * p.size_ucp + 15.0 * p.productivity + 60.0 * p.complexity;
    rows.push_back(p);
  }
  return Dataset(rows);
}

} // namespace

TEST_SUITE("fmt") {

TEST_CASE("default training exposes nine routing columns") {
  const auto split = split_holdout(generate_piecewise_benchmark(84, 1), 59, 1);
  const auto model = train_fmt(split.train, FcmConfig{}, TreeConfig{});
  CHECK(model.tree.routing_dim() == 9);
  CHECK(model.tree.regression_dim() == 3);
  const auto names = model.routing_names();
  REQUIRE(names.size() == 9);
  CHECK(names[0] == "size_ucp|C1");
  CHECK(names[4] == "productivity|C2");
  CHECK(names[8] == "complexity|C3");
  CHECK(model.fuzzy.cluster_count() == 3);
}

TEST_CASE("constant effort gives a constant predictor") {
  auto rows = linear_projects(30, 2).projects();
  for (auto& p : rows) p.effort_ph = 777.0;
  const Dataset train(rows);
  const auto model = train_fmt(train, FcmConfig{}, TreeConfig{});
  CHECK(model.tree.leaf_count() == 1);
  for (const auto& p : linear_projects(10, 3)) CHECK(predict_fmt(model, p) == doctest::Approx(777.0));
}

TEST_CASE("linear ground truth is reproduced on unseen projects") {
  const auto model = train_fmt(linear_projects(59, 4), FcmConfig{}, TreeConfig{});
  const auto test = linear_projects(25, 5, 1000);
  const auto pred = predict_fmt(model, test);
  const auto actual = effort_vector(test);
  CHECK(((pred - actual).array().abs() / actual.array()).maxCoeff() < 1e-4);
}

TEST_CASE("unsmoothed pure-leaf tree returns each training project's leaf value") {
  const auto train = generate_piecewise_benchmark(40, 6);
  const auto s = Standardizer::fit(feature_matrix(train));
  const auto z = s.apply(feature_matrix(train));
  const auto fuzzy = build_fuzzy_model(fcm_cluster(z, FcmConfig{}), z, s);
  const auto routing = membership_matrix(fuzzy, feature_matrix(train));
  TreeConfig cfg;
  cfg.min_instances = 2;
  cfg.smoothing_k = 0.0;
  const auto tree = build_tree(routing, feature_matrix(train), effort_vector(train), cfg);
  CHECK(tree.leaf_count() > 1);
  for (std::size_t i = 0; i < train.size(); ++i) {
    const auto r = static_cast<Eigen::Index>(i);
    const auto& leaf = tree.nodes()[static_cast<std::size_t>(tree.leaf_index(routing.row(r)))];
    CHECK(smooth_predict(tree, routing.row(r), feature_row(train[i]), cfg) ==
          leaf.model.evaluate(feature_row(train[i])));
  }
}

TEST_CASE("prediction is a pure function of the features") {
  const auto train = generate_piecewise_benchmark(59, 7);
  const auto model = train_fmt(train, FcmConfig{}, TreeConfig{});
  Project a = train[3];
  Project b = a;
  b.id = "copy";
  b.effort_ph = 1.0;
  CHECK(predict_fmt(model, a) == predict_fmt(model, b));
}

TEST_CASE("seeded benchmark test predictions are finite and positive") {
  const auto split = split_holdout(generate_piecewise_benchmark(84, 3), 59, 3);
  FcmConfig fcm;
  fcm.seed = 3;
  const auto model = train_fmt(split.train, fcm, TreeConfig{});
  const auto pred = predict_fmt(model, split.test);
  CHECK(pred.size() == 25);
  CHECK(pred.allFinite());
  CHECK((pred.array() >= kMinEffort).all());
}

TEST_CASE("model json round-trip predicts identically") {
  const auto split = split_holdout(generate_piecewise_benchmark(84, 8), 59, 8);
  const auto model = train_fmt(split.train, FcmConfig{}, TreeConfig{});
  const auto back = fmt_model_from_json(to_json(model));
  CHECK(predict_fmt(back, split.test) == predict_fmt(model, split.test));
  CHECK(to_json(back) == to_json(model));
  CHECK(fcm_config_from_json(to_json(FcmConfig{})).clusters == 3);
  CHECK(tree_config_from_json(to_json(TreeConfig{})).smoothing_k == 15.0);
}

TEST_CASE("training is reproducible for a fixed seed") {
  const auto train = generate_piecewise_benchmark(59, 9);
  FcmConfig fcm;
  fcm.seed = 77;
  CHECK(to_json(train_fmt(train, fcm, TreeConfig{})) == to_json(train_fmt(train, fcm, TreeConfig{})));
}

} // TEST_SUITE
