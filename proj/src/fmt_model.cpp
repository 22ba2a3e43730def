#include "fmtree/fmt_model.hpp"

#include <algorithm>
#include <cmath>

namespace fmtree {

std::vector<std::string> FmtModel::routing_names() const {
  std::vector<std::string> names;
  for (Eigen::Index j = 0; j < fuzzy.feature_count(); ++j) {
    for (Eigen::Index c = 0; c < fuzzy.cluster_count(); ++c) {
      names.push_back(feature_names[static_cast<std::size_t>(j)] + "|C" + std::to_string(c + 1));
    }
  }
  return names;
}

FmtModel train_fmt_tree(const Dataset& train, const FuzzyInferenceModel& fuzzy, const FcmConfig& fcm_config,
                        const TreeConfig& tree_config) {
  const Eigen::MatrixXd raw = feature_matrix(train);
  const Eigen::MatrixXd routing = membership_matrix(fuzzy, raw);
  const Eigen::VectorXd effort = effort_vector(train);
  ModelTree tree = prune(build_tree(routing, raw, effort, tree_config), tree_config);
  return FmtModel{fuzzy, std::move(tree), fcm_config, tree_config};
}

FmtModel train_fmt(const Dataset& train, const FcmConfig& fcm_config, const TreeConfig& tree_config) {
  fcm_config.validate();
  tree_config.validate();
  const auto needed = static_cast<std::size_t>(std::max(fcm_config.clusters, tree_config.min_instances));
  if (train.size() < needed) {
    throw DataError("training set has " + std::to_string(train.size()) + " projects, need at least " +
                    std::to_string(needed));
  }
  const Eigen::MatrixXd raw = feature_matrix(train);
  const Standardizer standardizer = Standardizer::fit(raw);
  const Eigen::MatrixXd z = standardizer.apply(raw);
  const FuzzyPartition partition = fcm_cluster(z, fcm_config);
  const FuzzyInferenceModel fuzzy = build_fuzzy_model(partition, z, standardizer);
  return train_fmt_tree(train, fuzzy, fcm_config, tree_config);
}

double predict_fmt(const FmtModel& model, const Project& project) {
  const Eigen::RowVector3d raw = feature_row(project);
  if (!raw.allFinite()) throw DataError("project '" + project.id + "' has non-finite features");
  const Eigen::MatrixXd mu = membership_matrix(model.fuzzy, raw);
  const double pred = smooth_predict(model.tree, mu.row(0), raw, model.tree_config);
  return std::max(pred, kMinEffort);
}

Eigen::VectorXd predict_fmt(const FmtModel& model, const Dataset& projects) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(projects.size()));
  for (std::size_t i = 0; i < projects.size(); ++i) {
    out(static_cast<Eigen::Index>(i)) = predict_fmt(model, projects[i]);
  }
  return out;
}

nlohmann::json to_json(const FcmConfig& c) {
  return {{"clusters", c.clusters},
          {"fuzzifier", c.fuzzifier},
          {"tolerance", c.tolerance},
          {"max_iterations", c.max_iterations},
          {"seed", c.seed}};
}

FcmConfig fcm_config_from_json(const nlohmann::json& j) {
  FcmConfig c;
  c.clusters = j.at("clusters").get<int>();
  c.fuzzifier = j.at("fuzzifier").get<double>();
  c.tolerance = j.at("tolerance").get<double>();
  c.max_iterations = j.at("max_iterations").get<int>();
  c.seed = j.at("seed").get<std::uint64_t>();
  c.validate();
  return c;
}

nlohmann::json to_json(const TreeConfig& c) {
  return {{"min_instances", c.min_instances},
          {"sd_fraction", c.sd_fraction},
          {"smoothing_k", c.smoothing_k},
          {"pruning_factor", c.pruning_factor}};
}

TreeConfig tree_config_from_json(const nlohmann::json& j) {
  TreeConfig c;
  c.min_instances = j.at("min_instances").get<int>();
  c.sd_fraction = j.at("sd_fraction").get<double>();
  c.smoothing_k = j.at("smoothing_k").get<double>();
  c.pruning_factor = j.at("pruning_factor").get<double>();
  c.validate();
  return c;
}

nlohmann::json to_json(const FmtModel& model) {
  return {{"kind", "fmt"},
          {"feature_names", model.feature_names},
          {"fcm_config", to_json(model.fcm_config)},
          {"tree_config", to_json(model.tree_config)},
          {"fuzzy", to_json(model.fuzzy)},
          {"tree", to_json(model.tree)}};
}

FmtModel fmt_model_from_json(const nlohmann::json& j) {
  try {
    if (j.at("kind").get<std::string>() != "fmt") throw DataError("model kind is not 'fmt'");
    FmtModel m{fuzzy_model_from_json(j.at("fuzzy")), model_tree_from_json(j.at("tree")),
               fcm_config_from_json(j.at("fcm_config")), tree_config_from_json(j.at("tree_config")),
               j.at("feature_names").get<std::vector<std::string>>()};
    if (m.tree.routing_dim() != m.fuzzy.feature_count() * m.fuzzy.cluster_count() ||
        m.tree.regression_dim() != m.fuzzy.feature_count() ||
        static_cast<Eigen::Index>(m.feature_names.size()) != m.fuzzy.feature_count()) {
      throw DataError("fmt model: tree and fuzzy model dimensions disagree");
    }
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("malformed fmt model JSON: ") + e.what());
  }
}

} // namespace fmtree
