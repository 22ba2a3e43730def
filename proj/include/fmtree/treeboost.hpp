#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>
#include "json.hpp"

#include "fmtree/data.hpp"

namespace fmtree {

struct TreeboostConfig {
  int n_trees = 1000;
  double huber_quantile = 0.95;
  double shrinkage = 0.1;
  double stochastic_fraction = 0.5;
  double influence_trimming = 0.01;
  int max_depth = 3;
  int min_leaf = 2;
  std::uint64_t seed = 0;

  void validate() const;
};

/// Least-squares regression tree with additive leaf values.
struct RegressionTree {
  struct Node {
    Eigen::Index feature = -1;
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    double value = 0.0;
    bool is_leaf() const { return left < 0; }
  };
  std::vector<Node> nodes;

  double predict(const Eigen::Ref<const Eigen::RowVectorXd>& x) const;
};

/// Per-round training diagnostics. Both losses use the round's cutoff.
struct BoostRound {
  double delta = 0.0;
  double loss_before = 0.0;
  double loss_after = 0.0;
  std::size_t rows_used = 0;
};

/// F(x) = f0 + shrinkage * sum_m tree_m(x).
struct TreeboostModel {
  double f0 = 0.0;
  double shrinkage = 0.1;
  std::vector<RegressionTree> trees;
  std::vector<BoostRound> trace;

  double score(const Eigen::Ref<const Eigen::RowVectorXd>& x) const;
};

double huber_loss(const Eigen::Ref<const Eigen::VectorXd>& residuals, double delta);

/// Minimizer t of sum_i huber_delta(r_i - t). Median when delta is 0.
double huber_location(std::vector<double> residuals, double delta);

/// Stochastic gradient boosting with Huber loss on an arbitrary design.
/// Per round: cutoff delta = huber_quantile quantile of |y - F|, clipped
/// pseudo-residuals, trimming of the influence_trimming fraction with the
/// smallest |pseudo-residual|, a seeded stochastic_fraction subsample, a
/// depth-bounded least-squares tree, and exact Huber location leaf values.
TreeboostModel fit_treeboost(const Eigen::Ref<const Eigen::MatrixXd>& x, const Eigen::Ref<const Eigen::VectorXd>& y,
                             const TreeboostConfig& config);

/// On the three project features; needs at least 10 projects.
TreeboostModel fit_treeboost(const Dataset& train, const TreeboostConfig& config);

/// Floored at 1 PH.
double predict_treeboost(const TreeboostModel& model, const Project& project);
Eigen::VectorXd predict_treeboost(const TreeboostModel& model, const Dataset& projects);

nlohmann::json to_json(const TreeboostConfig& config);
TreeboostConfig treeboost_config_from_json(const nlohmann::json& j);
nlohmann::json to_json(const TreeboostModel& model);
TreeboostModel treeboost_model_from_json(const nlohmann::json& j);

} // namespace fmtree
