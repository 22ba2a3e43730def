#pragma once

#include <array>
#include <stdexcept>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace fmtree::ucp {

class UcpError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

enum class Complexity { Simple, Average, Complex };

Complexity complexity_from_string(std::string_view name);
std::string_view to_string(Complexity c);

inline constexpr std::array<double, 3> kActorWeights{1.0, 2.0, 3.0};
inline constexpr std::array<double, 3> kUseCaseWeights{5.0, 10.0, 15.0};

// Karner's technical (T1..T13) and environmental (E1..E8) factor weights.
inline constexpr std::array<double, 13> kTechnicalWeights{2.0, 1.0, 1.0, 1.0, 1.0, 0.5, 0.5,
                                                          2.0, 1.0, 1.0, 1.0, 1.0, 1.0};
inline constexpr std::array<double, 8> kEnvironmentalWeights{1.5, 0.5, 1.0, 0.5,
                                                             1.0, 2.0, -1.0, -1.0};

inline constexpr double kDefaultProductivityRatio = 20.0;

struct UseCaseModel {
  std::vector<Complexity> actors;
  std::vector<Complexity> use_cases;
  std::array<int, 13> technical_ratings{};
  std::array<int, 8> environmental_ratings{};

  /// Throws UcpError when there are no use cases or a rating is outside [0,5].
  void validate() const;
};

struct UnadjustedPoints {
  double uwa = 0.0;
  double uuc = 0.0;
  double uucp = 0.0;
};

struct AdjustmentFactors {
  double tcf = 0.0;
  double ef = 0.0;
};

struct UcpBreakdown {
  double uwa = 0.0;
  double uuc = 0.0;
  double uucp = 0.0;
  double tcf = 0.0;
  double ef = 0.0;
  double ucp = 0.0;
};

UnadjustedPoints compute_uucp(const UseCaseModel& model);
AdjustmentFactors compute_adjustment_factors(const UseCaseModel& model);
UcpBreakdown compute_ucp(const UseCaseModel& model);

/// Effort in person-hours as ucp * ratio.
double classical_effort(double ucp, double ratio = kDefaultProductivityRatio);

/// {actors: [...], use_cases: [...], technical: [13 ints], environmental: [8 ints]}
UseCaseModel use_case_model_from_json(const nlohmann::json& j);
nlohmann::json to_json(const UseCaseModel& model);
nlohmann::json to_json(const UcpBreakdown& breakdown);

} // namespace fmtree::ucp
