#pragma once

#include <array>
#include <string>

#include <Eigen/Dense>
#include "json.hpp"

#include "fmtree/data.hpp"

namespace fmtree {

/// ln(effort) = intercept + b1 ln(size) + b2 productivity + b3 complexity,
/// with the usual OLS diagnostics.
struct MlrModel {
  static constexpr std::array<const char*, 4> kTermNames{"intercept", "ln_size", "productivity", "complexity"};

  double intercept = 0.0;
  double coef_ln_size = 0.0;
  double coef_productivity = 0.0;
  double coef_complexity = 0.0;

  std::size_t observations = 0;
  double r2 = 0.0;
  double adjusted_r2 = 0.0;
  double residual_se = 0.0;
  Eigen::Vector4d std_errors = Eigen::Vector4d::Zero();
  Eigen::Vector4d t_stats = Eigen::Vector4d::Zero();
  Eigen::Vector4d p_values = Eigen::Vector4d::Zero();
  Eigen::Vector3d vif = Eigen::Vector3d::Ones();  // ln_size, productivity, complexity

  Eigen::Vector4d coefficients() const { return {intercept, coef_ln_size, coef_productivity, coef_complexity}; }
};

inline constexpr double kMlrAlpha = 0.05;
inline constexpr double kVifAlarm = 4.0;

/// Log-space design matrix [1, ln size, productivity, complexity].
Eigen::MatrixXd mlr_design(const Dataset& data);

/// Throws DataError for non-positive size/effort, fewer than 5 rows, or a
/// rank-deficient design.
MlrModel fit_mlr(const Dataset& train);

double predict_mlr(const MlrModel& model, const Project& project);
Eigen::VectorXd predict_mlr(const MlrModel& model, const Dataset& projects);

/// Reference coefficients (1.8, 1.24, 0.007, 0.12) of the log-linear effort equation.
MlrModel reference_mlr_model();

nlohmann::json to_json(const MlrModel& model);
MlrModel mlr_model_from_json(const nlohmann::json& j);

} // namespace fmtree
