#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include "json.hpp"

namespace fmtree {

/// Raised for malformed or invalid input data. Messages carry the row number
/// where one applies.
class DataError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// One observed project.
struct Project {
  std::string id;
  double size_ucp = 0.0;     // Use Case Points
  double productivity = 0.0;
  double complexity = 0.0;
  double effort_ph = 0.0;    // person-hours

  bool operator==(const Project&) const = default;
};

enum class SourceLabel { Ind1, Ind2, Edu, Mixed, Synthetic };

std::string_view to_string(SourceLabel label);
SourceLabel source_label_from_string(std::string_view name);

/// Non-empty, id-unique, immutable collection of projects.
class Dataset {
public:
  explicit Dataset(std::vector<Project> projects, SourceLabel label = SourceLabel::Mixed);

  const std::vector<Project>& projects() const noexcept { return projects_; }
  SourceLabel source_label() const noexcept { return label_; }
  std::size_t size() const noexcept { return projects_.size(); }
  const Project& operator[](std::size_t i) const { return projects_[i]; }
  auto begin() const noexcept { return projects_.begin(); }
  auto end() const noexcept { return projects_.end(); }

  bool operator==(const Dataset&) const = default;

private:
  std::vector<Project> projects_;
  SourceLabel label_;
};

/// Effort moments of one data source.
struct SourceProfile {
  double min_effort = 0.0;
  double max_effort = 0.0;
  double mean_effort = 0.0;
  double sd_effort = 0.0;
  double skewness = 0.0;

  void validate() const;
};

// Effort characteristics of the three reference data sources.
// Ind1's maximum is printed as "129,35" in the source table and is read as
// 129,350 PH.
inline constexpr SourceProfile kInd1Profile{4648.0, 129350.0, 36849.0, 39350.0, 1.37};
inline constexpr SourceProfile kInd2Profile{570.0, 224890.0, 20573.0, 47327.0, 3.26};
inline constexpr SourceProfile kEduProfile{850.0, 2380.0, 1689.0, 496.0, -0.24};

/// Looks up "ind1", "ind2" or "edu" (case-insensitive).
SourceProfile profile_by_name(std::string_view name);

// --- CSV / JSON -----------------------------------------------------------

/// Parses a CSV with header columns id,size_ucp,productivity,complexity,effort_ph
/// in any order and any case.
Dataset parse_dataset(std::string_view csv_text, SourceLabel label = SourceLabel::Mixed);

/// Renders with a fixed header order and round-trip exact number formatting.
std::string render_csv(const Dataset& dataset);

nlohmann::json to_json(const Dataset& dataset);
Dataset dataset_from_json(const nlohmann::json& j, SourceLabel label = SourceLabel::Mixed);

Dataset load_dataset(const std::string& path);

// --- splitting and features -----------------------------------------------

struct HoldoutSplit {
  Dataset train;
  Dataset test;
};

/// Seeded random holdout. Row order inside each side follows the original
/// dataset order.
HoldoutSplit split_holdout(const Dataset& dataset, std::size_t train_count, std::uint64_t seed);

/// n x 3 matrix (size_ucp, productivity, complexity).
Eigen::MatrixXd feature_matrix(const Dataset& dataset);
Eigen::RowVector3d feature_row(const Project& project);
Eigen::VectorXd effort_vector(const Dataset& dataset);

inline const std::vector<std::string> kFeatureNames{"size_ucp", "productivity", "complexity"};

// --- synthetic data -------------------------------------------------------

/// Draws n projects whose effort distribution matches the profile's mean,
/// standard deviation and skewness after clamping to [min, max].
Dataset generate_synthetic(const SourceProfile& profile, std::size_t n, std::uint64_t seed);

/// Benchmark with effort piecewise linear in size: a cheaper regime below
/// 250 UCP and a steeper one above it, plus productivity and complexity
/// terms and 5% multiplicative noise.
Dataset generate_piecewise_benchmark(std::size_t n, std::uint64_t seed);

/// Sample moments used by reports and tests.
struct SampleMoments {
  double mean = 0.0;
  double sd = 0.0;       // n-1 denominator
  double skewness = 0.0; // adjusted Fisher-Pearson
  double min = 0.0;
  double max = 0.0;
};
SampleMoments sample_moments(const Eigen::Ref<const Eigen::VectorXd>& x);

} // namespace fmtree
