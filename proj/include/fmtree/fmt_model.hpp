#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>
#include "json.hpp"

#include "fmtree/data.hpp"
#include "fmtree/fcm.hpp"
#include "fmtree/mtree.hpp"

namespace fmtree {

/// Fuzzy model tree: FCM-derived Gaussian memberships route projects through
/// a model tree whose linear models are fit on the raw project features.
struct FmtModel {
  FuzzyInferenceModel fuzzy;
  ModelTree tree;
  FcmConfig fcm_config;
  TreeConfig tree_config;
  std::vector<std::string> feature_names = kFeatureNames;

  /// Routing columns, e.g. "size_ucp|C1", in membership-matrix order.
  std::vector<std::string> routing_names() const;
};

/// Predictions below this are raised to it.
inline constexpr double kMinEffort = 1.0;

FmtModel train_fmt(const Dataset& train, const FcmConfig& fcm_config, const TreeConfig& tree_config);

/// Fits only the tree stage on an existing fuzzy model.
FmtModel train_fmt_tree(const Dataset& train, const FuzzyInferenceModel& fuzzy, const FcmConfig& fcm_config,
                        const TreeConfig& tree_config);

double predict_fmt(const FmtModel& model, const Project& project);
Eigen::VectorXd predict_fmt(const FmtModel& model, const Dataset& projects);

nlohmann::json to_json(const FmtModel& model);
FmtModel fmt_model_from_json(const nlohmann::json& j);

nlohmann::json to_json(const FcmConfig& config);
FcmConfig fcm_config_from_json(const nlohmann::json& j);
nlohmann::json to_json(const TreeConfig& config);
TreeConfig tree_config_from_json(const nlohmann::json& j);

} // namespace fmtree
