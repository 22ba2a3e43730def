#include "fmtree/fcm.hpp"

#include <algorithm>
#include <limits>
#include <string>

#include "fmtree/json_eigen.hpp"
#include "fmtree/random.hpp"

namespace fmtree {

void FcmConfig::validate() const {
  if (clusters < 1) throw FcmError("cluster count must be >= 1");
  if (!(fuzzifier > 1.0) || !std::isfinite(fuzzifier)) throw FcmError("fuzzifier must be > 1");
  if (!(tolerance > 0.0)) throw FcmError("tolerance must be positive");
  if (max_iterations < 1) throw FcmError("max_iterations must be positive");
}

namespace {

Eigen::MatrixXd squared_distances(const Eigen::Ref<const Eigen::MatrixXd>& x,
                                  const Eigen::Ref<const Eigen::MatrixXd>& centers) {
  Eigen::MatrixXd d2(x.rows(), centers.rows());
  for (Eigen::Index c = 0; c < centers.rows(); ++c) {
    d2.col(c) = (x.rowwise() - centers.row(c)).rowwise().squaredNorm();
  }
  return d2;
}

Eigen::MatrixXd update_centers(const Eigen::Ref<const Eigen::MatrixXd>& x,
                               const Eigen::MatrixXd& u, double m) {
  const Eigen::MatrixXd um = u.array().pow(m).matrix();
  Eigen::MatrixXd centers = um.transpose() * x;
  const Eigen::VectorXd weight = um.colwise().sum().transpose();
  for (Eigen::Index c = 0; c < centers.rows(); ++c) centers.row(c) /= weight(c);
  return centers;
}

Eigen::MatrixXd update_memberships(const Eigen::MatrixXd& d2, double m) {
  const Eigen::Index n = d2.rows();
  const Eigen::Index k = d2.cols();
  const double exponent = 1.0 / (m - 1.0);
  Eigen::MatrixXd u(n, k);
  Eigen::VectorXd logw(k);
  for (Eigen::Index i = 0; i < n; ++i) {
    Eigen::Index zero_at = -1;
    for (Eigen::Index c = 0; c < k; ++c) {
      if (d2(i, c) == 0.0) {
        zero_at = c;
        break;
      }
    }
    if (zero_at >= 0) {
      u.row(i).setZero();
      u(i, zero_at) = 1.0;
      continue;
    }
    // u_ic = d2_ic^(-1/(m-1)) / sum_q d2_iq^(-1/(m-1)), evaluated in log space.
    for (Eigen::Index c = 0; c < k; ++c) logw(c) = -exponent * std::log(d2(i, c));
    const double top = logw.maxCoeff();
    const Eigen::ArrayXd w = (logw.array() - top).exp();
    u.row(i) = (w / w.sum()).matrix().transpose();
  }
  return u;
}

} // namespace

double fcm_objective(const Eigen::Ref<const Eigen::MatrixXd>& features,
                     const Eigen::Ref<const Eigen::MatrixXd>& centers,
                     const Eigen::Ref<const Eigen::MatrixXd>& memberships, double fuzzifier) {
  return (memberships.array().pow(fuzzifier) * squared_distances(features, centers).array()).sum();
}

FuzzyPartition fcm_cluster(const Eigen::Ref<const Eigen::MatrixXd>& features, const FcmConfig& config) {
  config.validate();
  const Eigen::Index n = features.rows();
  const Eigen::Index k = config.clusters;
  if (features.cols() == 0) throw FcmError("feature matrix has no columns");
  if (n < k) {
    throw FcmError("need at least as many rows as clusters (" + std::to_string(n) + " < " +
                   std::to_string(k) + ")");
  }
  if (!features.allFinite()) throw FcmError("feature matrix contains non-finite values");
  if (k >= 2 && (features.rowwise() - features.row(0)).cwiseAbs().maxCoeff() == 0.0) {
    throw FcmError("degenerate geometry: all points identical with " + std::to_string(k) +
                   " clusters");
  }

  Rng rng(config.seed);
  Eigen::MatrixXd u(n, k);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index c = 0; c < k; ++c) u(i, c) = 1e-3 + rng.uniform();
    u.row(i) /= u.row(i).sum();
  }

  FuzzyPartition result;
  result.fuzzifier = config.fuzzifier;
  for (int it = 1; it <= config.max_iterations; ++it) {
    Eigen::MatrixXd centers = update_centers(features, u, config.fuzzifier);
    const Eigen::MatrixXd d2 = squared_distances(features, centers);
    Eigen::MatrixXd next = update_memberships(d2, config.fuzzifier);

    const double change = (next - u).cwiseAbs().maxCoeff();
    result.objective_trace.push_back((next.array().pow(config.fuzzifier) * d2.array()).sum());
    u = std::move(next);
    result.centers = std::move(centers);
    result.iterations = it;
    if (change < config.tolerance) {
      result.converged = true;
      break;
    }
  }
  result.memberships = std::move(u);
  return result;
}

// --- standardization --------------------------------------------------------

Standardizer Standardizer::fit(const Eigen::Ref<const Eigen::MatrixXd>& x) {
  Standardizer s;
  s.mean = x.colwise().mean();
  s.scale.resize(x.cols());
  for (Eigen::Index j = 0; j < x.cols(); ++j) {
    const double sd = std::sqrt((x.col(j).array() - s.mean(j)).square().mean());
    s.scale(j) = sd > 0.0 ? sd : 1.0;
  }
  return s;
}

Standardizer Standardizer::identity(Eigen::Index d) {
  return {Eigen::RowVectorXd::Zero(d), Eigen::RowVectorXd::Ones(d)};
}

Eigen::MatrixXd Standardizer::apply(const Eigen::Ref<const Eigen::MatrixXd>& x) const {
  if (x.cols() != mean.size()) throw FcmError("standardizer dimension mismatch");
  return ((x.rowwise() - mean).array().rowwise() / scale.array()).matrix();
}

// --- fuzzy inference model -----------------------------------------------------

FuzzyInferenceModel::FuzzyInferenceModel(Eigen::MatrixXd centers, Eigen::MatrixXd sigmas,
                                         Standardizer standardizer)
    : centers_(std::move(centers)), sigmas_(std::move(sigmas)), standardizer_(std::move(standardizer)) {
  if (centers_.rows() != sigmas_.rows() || centers_.cols() != sigmas_.cols()) {
    throw FcmError("centers and sigmas must have the same shape");
  }
  if (standardizer_.dimension() != centers_.cols()) throw FcmError("standardizer dimension mismatch");
  if (!(sigmas_.array() > 0.0).all() || !sigmas_.allFinite()) throw FcmError("all sigmas must be positive");
  if (!centers_.allFinite()) throw FcmError("non-finite cluster center");
}

double FuzzyInferenceModel::evaluate(Eigen::Index feature, Eigen::Index cluster, double raw_value) const {
  const double z = (raw_value - standardizer_.mean(feature)) / standardizer_.scale(feature);
  return gaussian_membership(z, centers_(cluster, feature), sigmas_(cluster, feature));
}

FuzzyInferenceModel FuzzyInferenceModel::permuted(const std::vector<Eigen::Index>& order) const {
  if (static_cast<Eigen::Index>(order.size()) != cluster_count()) throw FcmError("permutation size mismatch");
  Eigen::MatrixXd c(centers_.rows(), centers_.cols());
  Eigen::MatrixXd s(sigmas_.rows(), sigmas_.cols());
  for (Eigen::Index i = 0; i < cluster_count(); ++i) {
    c.row(i) = centers_.row(order[static_cast<std::size_t>(i)]);
    s.row(i) = sigmas_.row(order[static_cast<std::size_t>(i)]);
  }
  return {std::move(c), std::move(s), standardizer_};
}

FuzzyInferenceModel build_fuzzy_model(const FuzzyPartition& partition,
                                      const Eigen::Ref<const Eigen::MatrixXd>& features,
                                      const Standardizer& standardizer) {
  const Eigen::Index n = features.rows();
  const Eigen::Index d = features.cols();
  const Eigen::Index k = partition.centers.rows();
  if (partition.memberships.rows() != n || partition.memberships.cols() != k ||
      partition.centers.cols() != d) {
    throw FcmError("partition does not match the feature matrix dimensions");
  }
  const Eigen::MatrixXd um = partition.memberships.array().pow(partition.fuzzifier).matrix();
  Eigen::MatrixXd sigmas(k, d);
  for (Eigen::Index j = 0; j < d; ++j) {
    const double range = features.col(j).maxCoeff() - features.col(j).minCoeff();
    const double floor = range > 0.0 ? 1e-6 * range : 1e-6;
    for (Eigen::Index c = 0; c < k; ++c) {
      const double var = (um.col(c).array() *
                          (features.col(j).array() - partition.centers(c, j)).square()).sum() /
                         um.col(c).sum();
      sigmas(c, j) = std::max(std::sqrt(var), floor);
    }
  }
  return {partition.centers, std::move(sigmas), standardizer};
}

FuzzyInferenceModel build_fuzzy_model(const FuzzyPartition& partition,
                                      const Eigen::Ref<const Eigen::MatrixXd>& features) {
  return build_fuzzy_model(partition, features, Standardizer::identity(features.cols()));
}

Eigen::MatrixXd membership_matrix(const FuzzyInferenceModel& model,
                                  const Eigen::Ref<const Eigen::MatrixXd>& raw_features) {
  const Eigen::Index d = model.feature_count();
  const Eigen::Index k = model.cluster_count();
  if (raw_features.cols() != d) {
    throw FcmError("membership_matrix: expected " + std::to_string(d) + " features, got " +
                   std::to_string(raw_features.cols()));
  }
  if (!raw_features.allFinite()) throw FcmError("membership_matrix: non-finite feature value");
  const Eigen::MatrixXd z = model.standardizer().apply(raw_features);
  Eigen::MatrixXd mu(raw_features.rows(), d * k);
  for (Eigen::Index j = 0; j < d; ++j) {
    for (Eigen::Index c = 0; c < k; ++c) {
      const double center = model.centers()(c, j);
      const double sigma = model.sigmas()(c, j);
      mu.col(j * k + c) = z.col(j).unaryExpr([&](double v) { return gaussian_membership(v, center, sigma); });
    }
  }
  return mu;
}

nlohmann::json to_json(const FuzzyInferenceModel& model) {
  return {{"clusters", model.cluster_count()},
          {"features", model.feature_count()},
          {"centers", matrix_to_json(model.centers())},
          {"sigmas", matrix_to_json(model.sigmas())},
          {"standardization",
           {{"mean", vector_to_json(model.standardizer().mean)},
            {"scale", vector_to_json(model.standardizer().scale)}}}};
}

FuzzyInferenceModel fuzzy_model_from_json(const nlohmann::json& j) {
  try {
    Standardizer s;
    s.mean = vector_from_json(j.at("standardization").at("mean")).transpose();
    s.scale = vector_from_json(j.at("standardization").at("scale")).transpose();
    return {matrix_from_json(j.at("centers")), matrix_from_json(j.at("sigmas")), std::move(s)};
  } catch (const nlohmann::json::exception& e) {
    throw FcmError(std::string("malformed fuzzy model JSON: ") + e.what());
  }
}

} // namespace fmtree
