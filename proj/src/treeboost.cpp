#include "fmtree/treeboost.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>

#include "fmtree/random.hpp"

namespace fmtree {

void TreeboostConfig::validate() const {
  if (n_trees < 0) throw DataError("n_trees must be >= 0");
  if (!(huber_quantile > 0.0 && huber_quantile < 1.0)) throw DataError("huber_quantile must lie in (0,1)");
  if (!(shrinkage > 0.0 && shrinkage <= 1.0)) throw DataError("shrinkage must lie in (0,1]");
  if (!(stochastic_fraction > 0.0 && stochastic_fraction <= 1.0)) {
    throw DataError("stochastic_fraction must lie in (0,1]");
  }
  if (!(influence_trimming >= 0.0 && influence_trimming < 1.0)) {
    throw DataError("influence_trimming must lie in [0,1)");
  }
  if (max_depth < 1) throw DataError("max_depth must be >= 1");
  if (min_leaf < 1) throw DataError("min_leaf must be >= 1");
}

double RegressionTree::predict(const Eigen::Ref<const Eigen::RowVectorXd>& x) const {
  std::size_t i = 0;
  while (!nodes[i].is_leaf()) {
    i = static_cast<std::size_t>(x(nodes[i].feature) <= nodes[i].threshold ? nodes[i].left : nodes[i].right);
  }
  return nodes[i].value;
}

double TreeboostModel::score(const Eigen::Ref<const Eigen::RowVectorXd>& x) const {
  double sum = 0.0;
  for (const auto& t : trees) sum += t.predict(x);
  return f0 + shrinkage * sum;
}

double huber_loss(const Eigen::Ref<const Eigen::VectorXd>& residuals, double delta) {
  double loss = 0.0;
  for (Eigen::Index i = 0; i < residuals.size(); ++i) {
    const double a = std::abs(residuals(i));
    loss += a <= delta ? 0.5 * a * a : delta * (a - 0.5 * delta);
  }
  return loss;
}

namespace {

double median_of(std::vector<double> v) {
  const std::size_t n = v.size();
  std::sort(v.begin(), v.end());
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

// Linear-interpolated quantile of sorted data.
double quantile_sorted(const std::vector<double>& sorted, double q) {
  if (sorted.size() == 1) return sorted.front();
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (pos - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

class StageTreeBuilder {
public:
  StageTreeBuilder(const Eigen::Ref<const Eigen::MatrixXd>& x, const Eigen::VectorXd& target,
                   const Eigen::VectorXd& residual, double delta, const TreeboostConfig& config)
      : x_(x), target_(target), residual_(residual), delta_(delta), config_(config) {}

  RegressionTree build(std::vector<Eigen::Index> rows) {
    grow(std::move(rows), 0);
    return std::move(tree_);
  }

private:
  struct Cut {
    Eigen::Index feature;
    double threshold;
    double gain;
  };

  int grow(std::vector<Eigen::Index> rows, int depth) {
    const int index = static_cast<int>(tree_.nodes.size());
    tree_.nodes.emplace_back();
    const auto cut = depth < config_.max_depth ? best_cut(rows) : std::nullopt;
    if (!cut) {
      std::vector<double> r;
      r.reserve(rows.size());
      for (auto i : rows) r.push_back(residual_(i));
      tree_.nodes[static_cast<std::size_t>(index)].value = huber_location(std::move(r), delta_);
      return index;
    }
    std::vector<Eigen::Index> left, right;
    for (auto i : rows) (x_(i, cut->feature) <= cut->threshold ? left : right).push_back(i);
    const int l = grow(std::move(left), depth + 1);
    const int r = grow(std::move(right), depth + 1);
    auto& node = tree_.nodes[static_cast<std::size_t>(index)];
    node.feature = cut->feature;
    node.threshold = cut->threshold;
    node.left = l;
    node.right = r;
    return index;
  }

  std::optional<Cut> best_cut(const std::vector<Eigen::Index>& rows) const {
    const auto n = static_cast<std::ptrdiff_t>(rows.size());
    const auto min_leaf = static_cast<std::ptrdiff_t>(config_.min_leaf);
    if (n < 2 * min_leaf) return std::nullopt;
    double total = 0.0;
    for (auto i : rows) total += target_(i);

    std::optional<Cut> best;
    std::vector<Eigen::Index> order(rows);
    for (Eigen::Index f = 0; f < x_.cols(); ++f) {
      std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) { return x_(a, f) < x_(b, f); });
      double left_sum = 0.0;
      for (std::ptrdiff_t k = 0; k + 1 < n; ++k) {
        left_sum += target_(order[static_cast<std::size_t>(k)]);
        const std::ptrdiff_t nl = k + 1, nr = n - nl;
        if (nl < min_leaf || nr < min_leaf) continue;
        const double a = x_(order[static_cast<std::size_t>(k)], f);
        const double b = x_(order[static_cast<std::size_t>(k + 1)], f);
        if (!(a < b)) continue;
        // SSE reduction, up to a constant: sum_l^2/n_l + sum_r^2/n_r - total^2/n
        const double right_sum = total - left_sum;
        const double gain = left_sum * left_sum / static_cast<double>(nl) +
                            right_sum * right_sum / static_cast<double>(nr) - total * total / static_cast<double>(n);
        if (!best || gain > best->gain) {
          double t = a + 0.5 * (b - a);
          if (!(t < b)) t = a;
          best = Cut{f, t, gain};
        }
      }
    }
    if (best && !(best->gain > 1e-12 * (1.0 + total * total / static_cast<double>(n)))) return std::nullopt;
    return best;
  }

  const Eigen::Ref<const Eigen::MatrixXd>& x_;
  const Eigen::VectorXd& target_;
  const Eigen::VectorXd& residual_;
  double delta_;
  const TreeboostConfig& config_;
  RegressionTree tree_;
};

} // namespace

double huber_location(std::vector<double> r, double delta) {
  if (r.empty()) return 0.0;
  const double med = median_of(r);
  if (!(delta > 0.0)) return med;
  // psi(t) = sum clip(r_i - t, -delta, delta) is non-increasing in t.
  auto psi = [&](double t) {
    double s = 0.0;
    for (double v : r) s += std::clamp(v - t, -delta, delta);
    return s;
  };
  double lo = *std::min_element(r.begin(), r.end());
  double hi = *std::max_element(r.begin(), r.end());
  if (lo == hi) return lo;
  for (int it = 0; it < 200 && hi - lo > 1e-15 * (std::abs(lo) + std::abs(hi)); ++it) {
    const double mid = 0.5 * (lo + hi);
    (psi(mid) > 0.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

TreeboostModel fit_treeboost(const Eigen::Ref<const Eigen::MatrixXd>& x, const Eigen::Ref<const Eigen::VectorXd>& y,
                             const TreeboostConfig& config) {
  config.validate();
  const Eigen::Index n = y.size();
  if (x.rows() != n) throw DataError("fit_treeboost: x and y row counts differ");
  if (n == 0) throw DataError("fit_treeboost: empty training set");
  if (!x.allFinite() || !y.allFinite()) throw DataError("fit_treeboost: non-finite training data");

  TreeboostModel model;
  model.shrinkage = config.shrinkage;
  model.f0 = median_of(std::vector<double>(y.data(), y.data() + n));
  if ((y.array() == y(0)).all()) return model;

  Rng rng(config.seed);
  Eigen::VectorXd f = Eigen::VectorXd::Constant(n, model.f0);
  model.trees.reserve(static_cast<std::size_t>(config.n_trees));
  model.trace.reserve(static_cast<std::size_t>(config.n_trees));
  std::vector<double> abs_r(static_cast<std::size_t>(n));
  std::vector<Eigen::Index> all(static_cast<std::size_t>(n));
  std::iota(all.begin(), all.end(), Eigen::Index{0});

  for (int m = 0; m < config.n_trees; ++m) {
    const Eigen::VectorXd residual = y - f;
    for (Eigen::Index i = 0; i < n; ++i) abs_r[static_cast<std::size_t>(i)] = std::abs(residual(i));
    std::sort(abs_r.begin(), abs_r.end());
    const double delta = quantile_sorted(abs_r, config.huber_quantile);
    const Eigen::VectorXd pseudo = residual.unaryExpr([&](double r) { return std::clamp(r, -delta, delta); });

    std::vector<Eigen::Index> rows = all;
    const auto trimmed = static_cast<std::size_t>(std::floor(config.influence_trimming * static_cast<double>(n)));
    if (trimmed > 0) {
      std::stable_sort(rows.begin(), rows.end(),
                       [&](Eigen::Index a, Eigen::Index b) { return std::abs(pseudo(a)) < std::abs(pseudo(b)); });
      rows.erase(rows.begin(), rows.begin() + static_cast<std::ptrdiff_t>(trimmed));
    }
    if (config.stochastic_fraction < 1.0) {
      const auto keep = std::max<std::size_t>(
          1, static_cast<std::size_t>(std::llround(config.stochastic_fraction * static_cast<double>(rows.size()))));
      for (std::size_t i = 0; i < keep; ++i) {
        const auto j = i + static_cast<std::size_t>(rng.uniform_index(rows.size() - i));
        std::swap(rows[i], rows[j]);
      }
      rows.resize(keep);
    }
    std::sort(rows.begin(), rows.end());

    BoostRound round;
    round.delta = delta;
    round.loss_before = huber_loss(residual, delta);
    round.rows_used = rows.size();

    RegressionTree tree = StageTreeBuilder(x, pseudo, residual, delta, config).build(std::move(rows));
    for (Eigen::Index i = 0; i < n; ++i) f(i) += config.shrinkage * tree.predict(x.row(i));
    round.loss_after = huber_loss(y - f, delta);
    model.trees.push_back(std::move(tree));
    model.trace.push_back(round);
  }
  return model;
}

TreeboostModel fit_treeboost(const Dataset& train, const TreeboostConfig& config) {
  if (train.size() < 10) throw DataError("treeboost needs at least 10 training projects");
  return fit_treeboost(feature_matrix(train), effort_vector(train), config);
}

double predict_treeboost(const TreeboostModel& model, const Project& project) {
  const Eigen::RowVector3d x = feature_row(project);
  if (!x.allFinite()) throw DataError("project '" + project.id + "' has non-finite features");
  return std::max(model.score(x), 1.0);
}

Eigen::VectorXd predict_treeboost(const TreeboostModel& model, const Dataset& projects) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(projects.size()));
  for (std::size_t i = 0; i < projects.size(); ++i) out(static_cast<Eigen::Index>(i)) = predict_treeboost(model, projects[i]);
  return out;
}

nlohmann::json to_json(const TreeboostConfig& c) {
  return {{"n_trees", c.n_trees},
          {"huber_quantile", c.huber_quantile},
          {"shrinkage", c.shrinkage},
          {"stochastic_fraction", c.stochastic_fraction},
          {"influence_trimming", c.influence_trimming},
          {"max_depth", c.max_depth},
          {"min_leaf", c.min_leaf},
          {"seed", c.seed}};
}

TreeboostConfig treeboost_config_from_json(const nlohmann::json& j) {
  TreeboostConfig c;
  c.n_trees = j.at("n_trees").get<int>();
  c.huber_quantile = j.at("huber_quantile").get<double>();
  c.shrinkage = j.at("shrinkage").get<double>();
  c.stochastic_fraction = j.at("stochastic_fraction").get<double>();
  c.influence_trimming = j.at("influence_trimming").get<double>();
  c.max_depth = j.at("max_depth").get<int>();
  c.min_leaf = j.at("min_leaf").get<int>();
  c.seed = j.at("seed").get<std::uint64_t>();
  c.validate();
  return c;
}

nlohmann::json to_json(const TreeboostModel& model) {
  auto trees = nlohmann::json::array();
  for (const auto& t : model.trees) {
    auto nodes = nlohmann::json::array();
    for (const auto& n : t.nodes) {
      if (n.is_leaf()) {
        nodes.push_back({{"value", n.value}});
      } else {
        nodes.push_back({{"feature", n.feature}, {"threshold", n.threshold}, {"left", n.left}, {"right", n.right}});
      }
    }
    trees.push_back(std::move(nodes));
  }
  return {{"kind", "treeboost"}, {"f0", model.f0}, {"shrinkage", model.shrinkage}, {"trees", std::move(trees)}};
}

TreeboostModel treeboost_model_from_json(const nlohmann::json& j) {
  try {
    if (j.at("kind").get<std::string>() != "treeboost") throw DataError("model kind is not 'treeboost'");
    TreeboostModel m;
    m.f0 = j.at("f0").get<double>();
    m.shrinkage = j.at("shrinkage").get<double>();
    for (const auto& jt : j.at("trees")) {
      RegressionTree t;
      for (const auto& jn : jt) {
        RegressionTree::Node n;
        if (jn.contains("value")) {
          n.value = jn.at("value").get<double>();
        } else {
          n.feature = jn.at("feature").get<Eigen::Index>();
          n.threshold = jn.at("threshold").get<double>();
          n.left = jn.at("left").get<int>();
          n.right = jn.at("right").get<int>();
        }
        t.nodes.push_back(n);
      }
      const auto count = static_cast<int>(t.nodes.size());
      for (const auto& n : t.nodes) {
        if (!n.is_leaf() && (n.left <= 0 || n.right <= 0 || n.left >= count || n.right >= count || n.feature < 0 ||
                             n.feature >= 3)) {
          throw DataError("malformed treeboost tree");
        }
      }
      if (t.nodes.empty()) throw DataError("empty treeboost tree");
      m.trees.push_back(std::move(t));
    }
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("malformed treeboost model JSON: ") + e.what());
  }
}

} // namespace fmtree
