#include "fmtree/mlr.hpp"

#include <cmath>
#include <limits>

#include "fmtree/special_functions.hpp"

namespace fmtree {

namespace {

// R^2 of y regressed on [1, x]. Returns 1 for an exact fit.
double r_squared(const Eigen::MatrixXd& x, const Eigen::VectorXd& y) {
  Eigen::MatrixXd design(x.rows(), x.cols() + 1);
  design.col(0).setOnes();
  design.rightCols(x.cols()) = x;
  const Eigen::VectorXd beta = design.colPivHouseholderQr().solve(y);
  const double sst = (y.array() - y.mean()).square().sum();
  const double sse = (y - design * beta).squaredNorm();
  if (!(sst > 0.0)) return 1.0;
  return 1.0 - sse / sst;
}

} // namespace

Eigen::MatrixXd mlr_design(const Dataset& data) {
  Eigen::MatrixXd x(static_cast<Eigen::Index>(data.size()), 4);
  for (std::size_t i = 0; i < data.size(); ++i) {
    const auto& p = data[i];
    if (!(p.size_ucp > 0.0)) throw DataError("non-positive size for project '" + p.id + "' (log undefined)");
    x.row(static_cast<Eigen::Index>(i)) << 1.0, std::log(p.size_ucp), p.productivity, p.complexity;
  }
  return x;
}

MlrModel fit_mlr(const Dataset& train) {
  const auto n = static_cast<Eigen::Index>(train.size());
  if (n < 5) throw DataError("MLR needs at least 5 training projects");
  const Eigen::MatrixXd x = mlr_design(train);
  Eigen::VectorXd y(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& p = train[static_cast<std::size_t>(i)];
    if (!(p.effort_ph > 0.0)) throw DataError("non-positive effort for project '" + p.id + "' (log undefined)");
    y(i) = std::log(p.effort_ph);
  }

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(x);
  qr.setThreshold(1e-10);
  if (qr.rank() < 4) throw DataError("MLR design is collinear (rank " + std::to_string(qr.rank()) + " < 4)");
  const Eigen::VectorXd beta = qr.solve(y);

  MlrModel m;
  m.intercept = beta(0);
  m.coef_ln_size = beta(1);
  m.coef_productivity = beta(2);
  m.coef_complexity = beta(3);
  m.observations = static_cast<std::size_t>(n);

  const Eigen::VectorXd resid = y - x * beta;
  const double sse = resid.squaredNorm();
  const double sst = (y.array() - y.mean()).square().sum();
  const double dof = static_cast<double>(n - 4);
  m.r2 = sst > 0.0 ? 1.0 - sse / sst : 1.0;
  m.adjusted_r2 = 1.0 - (1.0 - m.r2) * static_cast<double>(n - 1) / dof;
  const double sigma2 = sse / dof;
  m.residual_se = std::sqrt(sigma2);

  const Eigen::MatrixXd xtx_inv = (x.transpose() * x).ldlt().solve(Eigen::MatrixXd::Identity(4, 4));
  for (int k = 0; k < 4; ++k) {
    m.std_errors(k) = std::sqrt(std::max(0.0, sigma2 * xtx_inv(k, k)));
    if (m.std_errors(k) > 0.0) {
      m.t_stats(k) = beta(k) / m.std_errors(k);
    } else {
      m.t_stats(k) = beta(k) == 0.0 ? 0.0 : std::copysign(std::numeric_limits<double>::infinity(), beta(k));
    }
    m.p_values(k) = beta(k) == 0.0 && m.std_errors(k) == 0.0 ? 1.0 : student_t_two_sided_p(m.t_stats(k), dof);
  }

  const Eigen::MatrixXd predictors = x.rightCols(3);
  for (int j = 0; j < 3; ++j) {
    Eigen::MatrixXd others(n, 2);
    int c = 0;
    for (int k = 0; k < 3; ++k) {
      if (k != j) others.col(c++) = predictors.col(k);
    }
    const double rj = r_squared(others, predictors.col(j));
    m.vif(j) = rj < 1.0 ? 1.0 / (1.0 - rj) : std::numeric_limits<double>::infinity();
  }
  return m;
}

double predict_mlr(const MlrModel& model, const Project& project) {
  if (!(project.size_ucp > 0.0)) throw DataError("non-positive size for project '" + project.id + "'");
  if (!std::isfinite(project.productivity) || !std::isfinite(project.complexity)) {
    throw DataError("project '" + project.id + "' has non-finite features");
  }
  return std::exp(model.intercept + model.coef_ln_size * std::log(project.size_ucp) +
                  model.coef_productivity * project.productivity + model.coef_complexity * project.complexity);
}

Eigen::VectorXd predict_mlr(const MlrModel& model, const Dataset& projects) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(projects.size()));
  for (std::size_t i = 0; i < projects.size(); ++i) out(static_cast<Eigen::Index>(i)) = predict_mlr(model, projects[i]);
  return out;
}

MlrModel reference_mlr_model() {
  MlrModel m;
  m.intercept = 1.8;
  m.coef_ln_size = 1.24;
  m.coef_productivity = 0.007;
  m.coef_complexity = 0.12;
  return m;
}

namespace {

nlohmann::json finite_or_null(double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr); }

double number_or_inf(const nlohmann::json& j) {
  return j.is_null() ? std::numeric_limits<double>::infinity() : j.get<double>();
}

} // namespace

nlohmann::json to_json(const MlrModel& m) {
  nlohmann::json terms = nlohmann::json::object();
  const Eigen::Vector4d beta = m.coefficients();
  for (int k = 0; k < 4; ++k) {
    terms[MlrModel::kTermNames[static_cast<std::size_t>(k)]] = {
        {"coefficient", beta(k)},
        {"std_error", m.std_errors(k)},
        {"t_stat", finite_or_null(m.t_stats(k))},
        {"p_value", m.p_values(k)},
        {"significant", m.p_values(k) < kMlrAlpha}};
  }
  nlohmann::json vif = nlohmann::json::object();
  bool alarm = false;
  for (int j = 0; j < 3; ++j) {
    vif[MlrModel::kTermNames[static_cast<std::size_t>(j + 1)]] = finite_or_null(m.vif(j));
    alarm = alarm || !(m.vif(j) < kVifAlarm);
  }
  return {{"kind", "mlr"},
          {"intercept", m.intercept},
          {"coef_ln_size", m.coef_ln_size},
          {"coef_productivity", m.coef_productivity},
          {"coef_complexity", m.coef_complexity},
          {"diagnostics",
           {{"observations", m.observations},
            {"r2", m.r2},
            {"adjusted_r2", m.adjusted_r2},
            {"residual_se", m.residual_se},
            {"alpha", kMlrAlpha},
            {"terms", std::move(terms)},
            {"vif", std::move(vif)},
            {"vif_threshold", kVifAlarm},
            {"multicollinearity", alarm}}}};
}

MlrModel mlr_model_from_json(const nlohmann::json& j) {
  try {
    if (j.at("kind").get<std::string>() != "mlr") throw DataError("model kind is not 'mlr'");
    MlrModel m;
    m.intercept = j.at("intercept").get<double>();
    m.coef_ln_size = j.at("coef_ln_size").get<double>();
    m.coef_productivity = j.at("coef_productivity").get<double>();
    m.coef_complexity = j.at("coef_complexity").get<double>();
    if (j.contains("diagnostics")) {
      const auto& d = j.at("diagnostics");
      m.observations = d.at("observations").get<std::size_t>();
      m.r2 = d.at("r2").get<double>();
      m.adjusted_r2 = d.at("adjusted_r2").get<double>();
      m.residual_se = d.at("residual_se").get<double>();
      for (int k = 0; k < 4; ++k) {
        const auto& t = d.at("terms").at(MlrModel::kTermNames[static_cast<std::size_t>(k)]);
        m.std_errors(k) = t.at("std_error").get<double>();
        m.t_stats(k) = number_or_inf(t.at("t_stat"));
        m.p_values(k) = t.at("p_value").get<double>();
      }
      for (int k = 0; k < 3; ++k) m.vif(k) = number_or_inf(d.at("vif").at(MlrModel::kTermNames[static_cast<std::size_t>(k + 1)]));
    }
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("malformed mlr model JSON: ") + e.what());
  }
}

} // namespace fmtree
