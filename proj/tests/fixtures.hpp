#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <vector>

#include <Eigen/Dense>

#include "fmtree/random.hpp"

namespace fixtures {

inline const Eigen::Matrix<double, 3, 2> kPlantedCenters =
    (Eigen::Matrix<double, 3, 2>() << 0.0, 0.0, 5.0, 0.0, 2.5, 4.0).finished();

/// 100 points around each planted center with isotropic noise.
inline Eigen::MatrixXd planted_points(std::uint64_t seed, double noise = 0.3) {
  fmtree::Rng rng(seed);
  Eigen::MatrixXd x(300, 2);
  for (Eigen::Index i = 0; i < 300; ++i) {
    const auto c = i / 100;
    x(i, 0) = kPlantedCenters(c, 0) + noise * rng.normal();
    x(i, 1) = kPlantedCenters(c, 1) + noise * rng.normal();
  }
  return x;
}

/// Largest distance between recovered and planted centers under the best
/// of the 3! matchings.
inline double matched_center_error(const Eigen::MatrixXd& centers) {
  std::array<int, 3> perm{0, 1, 2};
  double best = INFINITY;
  do {
    double worst = 0.0;
    for (int c = 0; c < 3; ++c) {
      worst = std::max(worst, (centers.row(perm[c]) - kPlantedCenters.row(c)).norm());
    }
    best = std::min(best, worst);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

inline bool non_increasing(const std::vector<double>& v, double slack = 0.0) {
  for (std::size_t i = 1; i < v.size(); ++i) {
    if (v[i] > v[i - 1] + slack) return false;
  }
  return true;
}

/// Exact two-sided signed-rank p-value by enumerating all 2^n sign vectors.
/// Zero differences dropped; tied |d| get average ranks.
inline double brute_force_wilcoxon_p(const std::vector<double>& a, const std::vector<double>& b) {
  std::vector<double> d;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i] != b[i]) d.push_back(a[i] - b[i]);
  }
  const std::size_t n = d.size();
  if (n == 0) return 1.0;
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](auto i, auto j) { return std::abs(d[i]) < std::abs(d[j]); });
  std::vector<double> rank(n);
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j + 1 < n && std::abs(d[order[j + 1]]) == std::abs(d[order[i]])) ++j;
    for (std::size_t k = i; k <= j; ++k) rank[order[k]] = 0.5 * static_cast<double>(i + j) + 1.0;
    i = j + 1;
  }
  double w = 0.0, total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    total += rank[i];
    if (d[i] > 0) w += rank[i];
  }
  const double mean = total / 2.0;
  const double observed = std::abs(w - mean);
  std::size_t extreme = 0;
  const std::size_t count = std::size_t{1} << n;
  for (std::size_t mask = 0; mask < count; ++mask) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (mask & (std::size_t{1} << i)) s += rank[i];
    }
    if (std::abs(s - mean) >= observed - 1e-9) ++extreme;
  }
  return std::min(1.0, static_cast<double>(extreme) / static_cast<double>(count));
}

} // namespace fixtures
