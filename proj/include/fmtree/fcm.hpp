#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>
#include "json.hpp"

namespace fmtree {

class FcmError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

struct FcmConfig {
  int clusters = 3;
  double fuzzifier = 2.0;
  double tolerance = 1e-6;
  int max_iterations = 300;
  std::uint64_t seed = 0;

  void validate() const;
};

/// Result of fuzzy c-means on an n x d feature matrix.
struct FuzzyPartition {
  Eigen::MatrixXd centers;      // k x d
  Eigen::MatrixXd memberships;  // n x k, rows sum to 1
  std::vector<double> objective_trace;
  double fuzzifier = 2.0;
  int iterations = 0;
  bool converged = false;
};

/// Bezdek alternating optimization. Each iteration recomputes centers from
/// the current memberships, then memberships from those centers, and records
/// J_m = sum_i sum_c u_ic^m ||x_i - v_c||^2 for the pair. Stops when the
/// largest membership change drops below `tolerance`.
FuzzyPartition fcm_cluster(const Eigen::Ref<const Eigen::MatrixXd>& features, const FcmConfig& config);

/// Fuzzy objective for a given partition.
double fcm_objective(const Eigen::Ref<const Eigen::MatrixXd>& features,
                     const Eigen::Ref<const Eigen::MatrixXd>& centers,
                     const Eigen::Ref<const Eigen::MatrixXd>& memberships, double fuzzifier);

/// Per-column affine map to zero mean and unit (population) sd. Constant
/// columns keep unit scale.
struct Standardizer {
  Eigen::RowVectorXd mean;
  Eigen::RowVectorXd scale;

  static Standardizer fit(const Eigen::Ref<const Eigen::MatrixXd>& x);
  static Standardizer identity(Eigen::Index d);

  Eigen::MatrixXd apply(const Eigen::Ref<const Eigen::MatrixXd>& x) const;
  Eigen::Index dimension() const { return mean.size(); }
};

template <typename Scalar>
Scalar gaussian_membership(Scalar x, Scalar center, Scalar sigma) {
  const Scalar z = (x - center) / sigma;
  return std::exp(Scalar(-0.5) * z * z);
}

/// Gaussian membership functions per (feature, cluster), in the space the
/// partition was computed in. Inputs are mapped through `standardizer`
/// before evaluation.
class FuzzyInferenceModel {
public:
  FuzzyInferenceModel(Eigen::MatrixXd centers, Eigen::MatrixXd sigmas, Standardizer standardizer);

  Eigen::Index feature_count() const { return centers_.cols(); }
  Eigen::Index cluster_count() const { return centers_.rows(); }

  /// k x d; entry (c, j) is the center of cluster c's function on feature j.
  const Eigen::MatrixXd& centers() const { return centers_; }
  const Eigen::MatrixXd& sigmas() const { return sigmas_; }
  const Standardizer& standardizer() const { return standardizer_; }

  /// Membership of a raw feature value in cluster c's function on feature j.
  double evaluate(Eigen::Index feature, Eigen::Index cluster, double raw_value) const;

  /// Same model with clusters reordered: new cluster c is old cluster order[c].
  FuzzyInferenceModel permuted(const std::vector<Eigen::Index>& order) const;

private:
  Eigen::MatrixXd centers_;
  Eigen::MatrixXd sigmas_;
  Standardizer standardizer_;
};

/// Projects each cluster center onto every feature axis and takes the
/// membership-weighted (u^m) spread around it as the Gaussian width. Widths
/// are floored at 1e-6 x the feature range (1e-6 for constant features).
FuzzyInferenceModel build_fuzzy_model(const FuzzyPartition& partition,
                                      const Eigen::Ref<const Eigen::MatrixXd>& features,
                                      const Standardizer& standardizer);
FuzzyInferenceModel build_fuzzy_model(const FuzzyPartition& partition,
                                      const Eigen::Ref<const Eigen::MatrixXd>& features);

/// m x (d*k) matrix of memberships for raw feature rows. Column j*k + c is
/// feature j in cluster c.
Eigen::MatrixXd membership_matrix(const FuzzyInferenceModel& model,
                                  const Eigen::Ref<const Eigen::MatrixXd>& raw_features);

nlohmann::json to_json(const FuzzyInferenceModel& model);
FuzzyInferenceModel fuzzy_model_from_json(const nlohmann::json& j);

} // namespace fmtree
