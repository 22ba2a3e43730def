#include "fmtree/mtree.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <iomanip>
#include <numeric>
#include <optional>
#include <sstream>

#include "fmtree/json_eigen.hpp"

namespace fmtree {

void TreeConfig::validate() const {
  if (min_instances < 2) throw TreeError("min_instances must be >= 2");
  if (!(sd_fraction > 0.0 && sd_fraction < 1.0)) throw TreeError("sd_fraction must lie in (0,1)");
  if (!(smoothing_k >= 0.0) || !std::isfinite(smoothing_k)) throw TreeError("smoothing_k must be >= 0");
  if (!(pruning_factor >= 0.0) || !std::isfinite(pruning_factor)) throw TreeError("pruning_factor must be >= 0");
}

int LinearModel::parameter_count() const {
  return 1 + static_cast<int>((coefficients.array() != 0.0).count());
}

LinearModel fit_linear_model(const Eigen::Ref<const Eigen::MatrixXd>& x,
                             const Eigen::Ref<const Eigen::VectorXd>& y) {
  const Eigen::Index n = x.rows();
  const Eigen::Index d = x.cols();
  LinearModel lm;
  lm.coefficients = Eigen::VectorXd::Zero(d);
  if (n == 0) return lm;

  const double y_mean = y.mean();
  lm.intercept = y_mean;
  const Eigen::RowVectorXd mean = x.colwise().mean();
  std::vector<Eigen::Index> active;
  Eigen::RowVectorXd scale(d);
  for (Eigen::Index j = 0; j < d; ++j) {
    scale(j) = std::sqrt((x.col(j).array() - mean(j)).square().mean());
    if (scale(j) > 0.0) active.push_back(j);
  }
  if (active.empty()) return lm;

  const auto p = static_cast<Eigen::Index>(active.size());
  Eigen::MatrixXd z(n, p);
  for (Eigen::Index a = 0; a < p; ++a) {
    const Eigen::Index j = active[static_cast<std::size_t>(a)];
    z.col(a) = (x.col(j).array() - mean(j)) / scale(j);
  }
  const Eigen::VectorXd yc = y.array() - y_mean;
  Eigen::MatrixXd gram = z.transpose() * z;
  gram.diagonal().array() += 1e-8;
  const Eigen::VectorXd beta = gram.ldlt().solve(z.transpose() * yc);

  for (Eigen::Index a = 0; a < p; ++a) {
    const Eigen::Index j = active[static_cast<std::size_t>(a)];
    lm.coefficients(j) = beta(a) / scale(j);
    lm.intercept -= lm.coefficients(j) * mean(j);
  }
  return lm;
}

// --- ModelTree ----------------------------------------------------------------

ModelTree::ModelTree(std::vector<TreeNode> nodes, Eigen::Index routing_dim, Eigen::Index regression_dim,
                     double target_sd)
    : nodes_(std::move(nodes)), routing_dim_(routing_dim), regression_dim_(regression_dim),
      target_sd_(target_sd) {
  if (nodes_.empty()) throw TreeError("tree has no nodes");
  const auto count = static_cast<int>(nodes_.size());
  for (const auto& node : nodes_) {
    if (node.model.coefficients.size() != regression_dim_) throw TreeError("leaf model dimension mismatch");
    if (node.is_leaf()) continue;
    if (node.left <= 0 || node.right <= 0 || node.left >= count || node.right >= count) {
      throw TreeError("malformed tree: child index out of range");
    }
    if (node.feature < 0 || node.feature >= routing_dim_) throw TreeError("malformed tree: bad split feature");
  }
}

std::size_t ModelTree::leaf_count() const {
  return static_cast<std::size_t>(
      std::count_if(nodes_.begin(), nodes_.end(), [](const TreeNode& n) { return n.is_leaf(); }));
}

std::size_t ModelTree::depth() const {
  std::function<std::size_t(int)> walk = [&](int i) -> std::size_t {
    const auto& n = nodes_[static_cast<std::size_t>(i)];
    return n.is_leaf() ? 0 : 1 + std::max(walk(n.left), walk(n.right));
  };
  return walk(0);
}

std::vector<int> ModelTree::path(const Eigen::Ref<const Eigen::RowVectorXd>& routing_row) const {
  if (routing_row.size() != routing_dim_) {
    throw TreeError("routing row has " + std::to_string(routing_row.size()) + " values, tree expects " +
                    std::to_string(routing_dim_));
  }
  std::vector<int> out{0};
  int i = 0;
  while (!nodes_[static_cast<std::size_t>(i)].is_leaf()) {
    const auto& n = nodes_[static_cast<std::size_t>(i)];
    i = routing_row(n.feature) <= n.threshold ? n.left : n.right;
    out.push_back(i);
  }
  return out;
}

int ModelTree::leaf_index(const Eigen::Ref<const Eigen::RowVectorXd>& routing_row) const {
  return path(routing_row).back();
}

// --- building -----------------------------------------------------------------

namespace {

struct Split {
  Eigen::Index feature;
  double threshold;
  double sdr;
};

class TreeBuilder {
public:
  TreeBuilder(const Eigen::Ref<const Eigen::MatrixXd>& routing, const Eigen::Ref<const Eigen::MatrixXd>& regression,
              const Eigen::Ref<const Eigen::VectorXd>& targets, const TreeConfig& config)
      : routing_(routing), regression_(regression), targets_(targets), config_(config) {
    stop_sd_ = config.sd_fraction * population_sd(targets);
  }

  std::vector<TreeNode> run() {
    std::vector<Eigen::Index> rows(static_cast<std::size_t>(targets_.size()));
    std::iota(rows.begin(), rows.end(), Eigen::Index{0});
    grow(rows);
    return std::move(nodes_);
  }

private:
  int grow(const std::vector<Eigen::Index>& rows) {
    const auto n = static_cast<Eigen::Index>(rows.size());
    Eigen::MatrixXd x(n, regression_.cols());
    Eigen::VectorXd y(n);
    for (Eigen::Index r = 0; r < n; ++r) {
      x.row(r) = regression_.row(rows[static_cast<std::size_t>(r)]);
      y(r) = targets_(rows[static_cast<std::size_t>(r)]);
    }

    const int index = static_cast<int>(nodes_.size());
    nodes_.emplace_back();
    TreeNode node;
    node.instance_count = rows.size();
    node.model = fit_linear_model(x, y);
    double abs_err = 0.0;
    for (Eigen::Index r = 0; r < n; ++r) abs_err += std::abs(y(r) - node.model.evaluate(x.row(r)));
    node.model_error = abs_err / static_cast<double>(n);

    const auto split = (n >= 2 * config_.min_instances && population_sd(y) > stop_sd_) ? best_split(rows, y)
                                                                                      : std::nullopt;
    if (split) {
      std::vector<Eigen::Index> left, right;
      for (auto r : rows) (routing_(r, split->feature) <= split->threshold ? left : right).push_back(r);
      node.feature = split->feature;
      node.threshold = split->threshold;
      node.split_sdr = split->sdr;
      node.left = grow(left);
      node.right = grow(right);
    }
    nodes_[static_cast<std::size_t>(index)] = std::move(node);
    return index;
  }

  std::optional<Split> best_split(const std::vector<Eigen::Index>& rows, const Eigen::VectorXd& y) const {
    const auto n = static_cast<Eigen::Index>(rows.size());
    const double mean = y.mean();
    const Eigen::VectorXd yc = y.array() - mean;
    const double sd_all = std::sqrt(yc.squaredNorm() / static_cast<double>(n));
    const Eigen::Index min_child = config_.min_instances;

    std::optional<Split> best;
    std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
    for (Eigen::Index f = 0; f < routing_.cols(); ++f) {
      std::iota(order.begin(), order.end(), Eigen::Index{0});
      std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
        return routing_(rows[static_cast<std::size_t>(a)], f) < routing_(rows[static_cast<std::size_t>(b)], f);
      });
      const double total = yc.sum();
      const double total_sq = yc.squaredNorm();
      double sum = 0.0, sum_sq = 0.0;
      for (Eigen::Index i = 0; i + 1 < n; ++i) {
        const double v = yc(order[static_cast<std::size_t>(i)]);
        sum += v;
        sum_sq += v * v;
        const Eigen::Index nl = i + 1;
        const Eigen::Index nr = n - nl;
        if (nl < min_child || nr < min_child) continue;
        const double a = routing_(rows[static_cast<std::size_t>(order[static_cast<std::size_t>(i)])], f);
        const double b = routing_(rows[static_cast<std::size_t>(order[static_cast<std::size_t>(i + 1)])], f);
        if (!(a < b)) continue;

        const double var_l = std::max(0.0, sum_sq / nl - (sum / nl) * (sum / nl));
        const double rs = total - sum, rs_sq = total_sq - sum_sq;
        const double var_r = std::max(0.0, rs_sq / nr - (rs / nr) * (rs / nr));
        const double sdr = sd_all - (static_cast<double>(nl) / n) * std::sqrt(var_l) -
                           (static_cast<double>(nr) / n) * std::sqrt(var_r);
        if (!best || sdr > best->sdr) {
          double threshold = a + 0.5 * (b - a);
          if (!(threshold < b)) threshold = a;
          best = Split{f, threshold, sdr};
        }
      }
    }
    if (best && !(best->sdr > 0.0)) return std::nullopt;
    return best;
  }

  const Eigen::Ref<const Eigen::MatrixXd>& routing_;
  const Eigen::Ref<const Eigen::MatrixXd>& regression_;
  const Eigen::Ref<const Eigen::VectorXd>& targets_;
  const TreeConfig& config_;
  double stop_sd_ = 0.0;
  std::vector<TreeNode> nodes_;
};

double inflation(std::size_t n, int v, double pruning_factor) {
  const auto nd = static_cast<double>(n);
  if (n <= static_cast<std::size_t>(v)) return 10.0;
  return (nd + pruning_factor * v) / (nd - v);
}

double subtree_error(const std::vector<TreeNode>& nodes, int i, const TreeConfig& config) {
  const auto& node = nodes[static_cast<std::size_t>(i)];
  if (node.is_leaf()) return adjusted_node_error(node, config);
  const auto& l = nodes[static_cast<std::size_t>(node.left)];
  const auto& r = nodes[static_cast<std::size_t>(node.right)];
  return (static_cast<double>(l.instance_count) * subtree_error(nodes, node.left, config) +
          static_cast<double>(r.instance_count) * subtree_error(nodes, node.right, config)) /
         static_cast<double>(node.instance_count);
}

} // namespace

ModelTree build_tree(const Eigen::Ref<const Eigen::MatrixXd>& routing,
                     const Eigen::Ref<const Eigen::MatrixXd>& regression,
                     const Eigen::Ref<const Eigen::VectorXd>& targets, const TreeConfig& config) {
  config.validate();
  const Eigen::Index n = targets.size();
  if (routing.rows() != n || regression.rows() != n) throw TreeError("routing, regression and targets must be row-aligned");
  if (n < config.min_instances) {
    throw TreeError("need at least " + std::to_string(config.min_instances) + " rows, got " + std::to_string(n));
  }
  if (!targets.allFinite()) throw TreeError("targets contain non-finite values");
  if (!routing.allFinite() || !regression.allFinite()) throw TreeError("features contain non-finite values");

  TreeBuilder builder(routing, regression, targets, config);
  return {builder.run(), routing.cols(), regression.cols(), population_sd(targets)};
}

double adjusted_node_error(const TreeNode& node, const TreeConfig& config) {
  return node.model_error * inflation(node.instance_count, node.model.parameter_count(), config.pruning_factor);
}

double pruning_criterion(const ModelTree& tree, const TreeConfig& config) {
  return subtree_error(tree.nodes(), 0, config);
}

ModelTree prune(const ModelTree& tree, const TreeConfig& config) {
  config.validate();
  const auto& src = tree.nodes();
  // Round-off slack so exact fits at parent and children compare as equal.
  const double slack = 1e-9 * std::max(tree.target_sd(), 1e-300);

  std::vector<TreeNode> out;
  // Returns (index in `out`, adjusted subtree error).
  std::function<std::pair<int, double>(int)> visit = [&](int i) -> std::pair<int, double> {
    const auto& node = src[static_cast<std::size_t>(i)];
    const int index = static_cast<int>(out.size());
    out.push_back(node);
    const double own = adjusted_node_error(node, config);
    if (node.is_leaf()) return {index, own};

    const auto [li, le] = visit(node.left);
    const auto [ri, re] = visit(node.right);
    const double n_l = static_cast<double>(src[static_cast<std::size_t>(node.left)].instance_count);
    const double n_r = static_cast<double>(src[static_cast<std::size_t>(node.right)].instance_count);
    const double combined = (n_l * le + n_r * re) / static_cast<double>(node.instance_count);

    if (own <= combined + slack) {
      out.resize(static_cast<std::size_t>(index) + 1);
      auto& leaf = out.back();
      leaf.feature = -1;
      leaf.threshold = 0.0;
      leaf.split_sdr = 0.0;
      leaf.left = leaf.right = -1;
      return {index, own};
    }
    out[static_cast<std::size_t>(index)].left = li;
    out[static_cast<std::size_t>(index)].right = ri;
    return {index, combined};
  };
  visit(0);
  return {std::move(out), tree.routing_dim(), tree.regression_dim(), tree.target_sd()};
}

double smooth_predict(const ModelTree& tree, const Eigen::Ref<const Eigen::RowVectorXd>& routing_row,
                      const Eigen::Ref<const Eigen::RowVectorXd>& regression_row, const TreeConfig& config) {
  if (regression_row.size() != tree.regression_dim()) {
    throw TreeError("regression row has " + std::to_string(regression_row.size()) + " values, tree expects " +
                    std::to_string(tree.regression_dim()));
  }
  const auto p = tree.path(routing_row);
  const auto& nodes = tree.nodes();
  double pred = nodes[static_cast<std::size_t>(p.back())].model.evaluate(regression_row);
  const double k = config.smoothing_k;
  if (k == 0.0) return pred;
  for (std::size_t i = p.size() - 1; i-- > 0;) {
    const double n_child = static_cast<double>(nodes[static_cast<std::size_t>(p[i + 1])].instance_count);
    const double q = nodes[static_cast<std::size_t>(p[i])].model.evaluate(regression_row);
    pred = (n_child * pred + k * q) / (n_child + k);
  }
  return pred;
}

Eigen::VectorXd smooth_predict_rows(const ModelTree& tree, const Eigen::Ref<const Eigen::MatrixXd>& routing,
                                    const Eigen::Ref<const Eigen::MatrixXd>& regression, const TreeConfig& config) {
  if (routing.rows() != regression.rows()) throw TreeError("routing and regression rows differ");
  Eigen::VectorXd out(routing.rows());
  for (Eigen::Index i = 0; i < routing.rows(); ++i) {
    out(i) = smooth_predict(tree, routing.row(i), regression.row(i), config);
  }
  return out;
}

// --- serialization ------------------------------------------------------------

namespace {

nlohmann::json node_to_json(const std::vector<TreeNode>& nodes, int i) {
  const auto& n = nodes[static_cast<std::size_t>(i)];
  nlohmann::json j{{"instances", n.instance_count},
                   {"model", {{"intercept", n.model.intercept}, {"coefficients", vector_to_json(n.model.coefficients)}}},
                   {"model_error", n.model_error}};
  if (!n.is_leaf()) {
    j["split"] = {{"feature", n.feature}, {"threshold", n.threshold}, {"sdr", n.split_sdr}};
    j["left"] = node_to_json(nodes, n.left);
    j["right"] = node_to_json(nodes, n.right);
  }
  return j;
}

int node_from_json(const nlohmann::json& j, std::vector<TreeNode>& nodes) {
  const int index = static_cast<int>(nodes.size());
  nodes.emplace_back();
  TreeNode n;
  n.instance_count = j.at("instances").get<std::size_t>();
  n.model.intercept = j.at("model").at("intercept").get<double>();
  n.model.coefficients = vector_from_json(j.at("model").at("coefficients"));
  n.model_error = j.at("model_error").get<double>();
  if (j.contains("split")) {
    n.feature = j.at("split").at("feature").get<Eigen::Index>();
    n.threshold = j.at("split").at("threshold").get<double>();
    n.split_sdr = j.at("split").at("sdr").get<double>();
    n.left = node_from_json(j.at("left"), nodes);
    n.right = node_from_json(j.at("right"), nodes);
  }
  nodes[static_cast<std::size_t>(index)] = std::move(n);
  return index;
}

} // namespace

nlohmann::json to_json(const ModelTree& tree) {
  return {{"routing_dim", tree.routing_dim()},
          {"regression_dim", tree.regression_dim()},
          {"target_sd", tree.target_sd()},
          {"root", node_to_json(tree.nodes(), 0)}};
}

ModelTree model_tree_from_json(const nlohmann::json& j) {
  try {
    std::vector<TreeNode> nodes;
    node_from_json(j.at("root"), nodes);
    return {std::move(nodes), j.at("routing_dim").get<Eigen::Index>(), j.at("regression_dim").get<Eigen::Index>(),
            j.at("target_sd").get<double>()};
  } catch (const nlohmann::json::exception& e) {
    throw TreeError(std::string("malformed tree JSON: ") + e.what());
  }
}

std::string render_text(const ModelTree& tree, const std::vector<std::string>& routing_names,
                        const std::vector<std::string>& regression_names) {
  auto rname = [&](Eigen::Index f) {
    return f < static_cast<Eigen::Index>(routing_names.size()) ? routing_names[static_cast<std::size_t>(f)]
                                                               : "x" + std::to_string(f);
  };
  auto gname = [&](Eigen::Index f) {
    return f < static_cast<Eigen::Index>(regression_names.size()) ? regression_names[static_cast<std::size_t>(f)]
                                                                  : "r" + std::to_string(f);
  };

  std::ostringstream os;
  os << std::setprecision(6);
  int leaf_no = 0;
  std::vector<std::string> models;
  std::function<void(int, int)> walk = [&](int i, int depth) {
    const auto& n = tree.nodes()[static_cast<std::size_t>(i)];
    const std::string indent(static_cast<std::size_t>(depth) * 4, ' ');
    if (n.is_leaf()) {
      ++leaf_no;
      os << indent << "LM" << leaf_no << " (n=" << n.instance_count << ")\n";
      std::ostringstream lm;
      lm << std::setprecision(6) << "LM" << leaf_no << ": y = " << n.model.intercept;
      for (Eigen::Index c = 0; c < n.model.coefficients.size(); ++c) {
        const double w = n.model.coefficients(c);
        if (w == 0.0) continue;
        lm << (w < 0 ? " - " : " + ") << std::abs(w) << " * " << gname(c);
      }
      models.push_back(lm.str());
      return;
    }
    os << indent << rname(n.feature) << " <= " << n.threshold << " (n=" << n.instance_count << ")\n";
    walk(n.left, depth + 1);
    os << indent << rname(n.feature) << " >  " << n.threshold << "\n";
    walk(n.right, depth + 1);
  };
  walk(0, 0);
  os << "\n";
  for (const auto& m : models) os << m << "\n";
  return os.str();
}

} // namespace fmtree
