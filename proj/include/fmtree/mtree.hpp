#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include "json.hpp"

namespace fmtree {

class TreeError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

struct TreeConfig {
  int min_instances = 4;        // smallest leaf; nodes below 2x this are not split
  double sd_fraction = 0.05;    // stop when sd(node) <= sd_fraction * sd(all)
  double smoothing_k = 15.0;
  double pruning_factor = 1.0;  // error inflation (n + pruning_factor * v) / (n - v)

  void validate() const;
};

struct LinearModel {
  double intercept = 0.0;
  Eigen::VectorXd coefficients;

  double evaluate(const Eigen::Ref<const Eigen::RowVectorXd>& x) const {
    return intercept + x.dot(coefficients.transpose());
  }

  /// Intercept plus non-zero coefficients.
  int parameter_count() const;
};

/// Least squares of y on [1, x]. Columns are centered and scaled inside the
/// fit; constant columns get a zero coefficient; a 1e-8 ridge on the scaled
/// normal equations keeps rank-deficient fits solvable.
LinearModel fit_linear_model(const Eigen::Ref<const Eigen::MatrixXd>& x,
                             const Eigen::Ref<const Eigen::VectorXd>& y);

template <typename Derived>
double population_sd(const Eigen::DenseBase<Derived>& v) {
  if (v.size() == 0) return 0.0;
  const double mean = v.derived().mean();
  return std::sqrt((v.derived().array() - mean).square().mean());
}

struct TreeNode {
  Eigen::Index feature = -1;  // routing column; -1 on leaves
  double threshold = 0.0;     // left: value <= threshold
  double split_sdr = 0.0;
  int left = -1;
  int right = -1;
  LinearModel model;
  std::size_t instance_count = 0;
  double model_error = 0.0;   // mean absolute training error of `model`

  bool is_leaf() const { return left < 0; }
};

/// Binary tree routed on one feature space with linear models over another.
/// Node 0 is the root.
class ModelTree {
public:
  ModelTree(std::vector<TreeNode> nodes, Eigen::Index routing_dim, Eigen::Index regression_dim,
            double target_sd);

  const std::vector<TreeNode>& nodes() const { return nodes_; }
  const TreeNode& root() const { return nodes_.front(); }
  Eigen::Index routing_dim() const { return routing_dim_; }
  Eigen::Index regression_dim() const { return regression_dim_; }
  double target_sd() const { return target_sd_; }

  std::size_t leaf_count() const;
  std::size_t depth() const;

  /// Node indices from the root to the leaf reached by `routing_row`.
  std::vector<int> path(const Eigen::Ref<const Eigen::RowVectorXd>& routing_row) const;
  int leaf_index(const Eigen::Ref<const Eigen::RowVectorXd>& routing_row) const;

private:
  std::vector<TreeNode> nodes_;
  Eigen::Index routing_dim_;
  Eigen::Index regression_dim_;
  double target_sd_;
};

/// Grows the tree by standard-deviation reduction over midpoints of
/// consecutive distinct routing values. Both children of a split must hold at
/// least `min_instances` rows. Ties go to the lowest feature, then the lowest
/// threshold. Every node keeps its own linear model for pruning/smoothing.
ModelTree build_tree(const Eigen::Ref<const Eigen::MatrixXd>& routing,
                     const Eigen::Ref<const Eigen::MatrixXd>& regression,
                     const Eigen::Ref<const Eigen::VectorXd>& targets, const TreeConfig& config);

/// Complexity-adjusted error of a node's own model.
double adjusted_node_error(const TreeNode& node, const TreeConfig& config);

/// Complexity-adjusted error of the whole tree as currently shaped.
double pruning_criterion(const ModelTree& tree, const TreeConfig& config);

/// Bottom-up: a subtree collapses to its node model when that model's
/// adjusted error does not exceed the subtree's.
ModelTree prune(const ModelTree& tree, const TreeConfig& config);

/// Leaf prediction blended with every ancestor model on the way back to
/// the root: p <- (n_child * p + k * q_node) / (n_child + k).
double smooth_predict(const ModelTree& tree, const Eigen::Ref<const Eigen::RowVectorXd>& routing_row,
                      const Eigen::Ref<const Eigen::RowVectorXd>& regression_row, const TreeConfig& config);

Eigen::VectorXd smooth_predict_rows(const ModelTree& tree, const Eigen::Ref<const Eigen::MatrixXd>& routing,
                                    const Eigen::Ref<const Eigen::MatrixXd>& regression, const TreeConfig& config);

nlohmann::json to_json(const ModelTree& tree);
ModelTree model_tree_from_json(const nlohmann::json& j);

/// Indented plain-text rendering. Names default to x0.., r0.. when empty.
std::string render_text(const ModelTree& tree, const std::vector<std::string>& routing_names = {},
                        const std::vector<std::string>& regression_names = {});

} // namespace fmtree
