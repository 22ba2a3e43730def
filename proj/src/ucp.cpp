#include "fmtree/ucp.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <string>

namespace fmtree::ucp {

namespace {

double weight_of(const std::array<double, 3>& table, Complexity c) {
  return table[static_cast<std::size_t>(c)];
}

template <std::size_t N>
void check_ratings(const std::array<int, N>& ratings, std::string_view kind) {
  for (std::size_t i = 0; i < N; ++i) {
    if (ratings[i] < 0 || ratings[i] > 5) {
      throw UcpError(std::string(kind) + " rating " + std::to_string(i + 1) + " is " +
                     std::to_string(ratings[i]) + ", expected 0..5");
    }
  }
}

template <std::size_t N>
std::array<int, N> ratings_from_json(const nlohmann::json& j, std::string_view key) {
  const auto& arr = j.at(std::string(key));
  if (!arr.is_array() || arr.size() != N) {
    throw UcpError(std::string(key) + " must be an array of " + std::to_string(N) + " integers");
  }
  std::array<int, N> out{};
  for (std::size_t i = 0; i < N; ++i) {
    if (!arr[i].is_number_integer()) throw UcpError(std::string(key) + " entries must be integers");
    out[i] = arr[i].get<int>();
  }
  return out;
}

} // namespace

Complexity complexity_from_string(std::string_view raw) {
  std::string name(raw);
  std::transform(name.begin(), name.end(), name.begin(), [](unsigned char c) { return std::tolower(c); });
  if (name == "simple") return Complexity::Simple;
  if (name == "average") return Complexity::Average;
  if (name == "complex") return Complexity::Complex;
  throw UcpError("unknown complexity class '" + std::string(raw) + "'");
}

std::string_view to_string(Complexity c) {
  switch (c) {
  case Complexity::Simple: return "simple";
  case Complexity::Average: return "average";
  case Complexity::Complex: return "complex";
  }
  return "simple";
}

void UseCaseModel::validate() const {
  if (use_cases.empty()) throw UcpError("use-case model needs at least one use case");
  check_ratings(technical_ratings, "technical");
  check_ratings(environmental_ratings, "environmental");
}

UnadjustedPoints compute_uucp(const UseCaseModel& model) {
  if (model.use_cases.empty()) throw UcpError("use-case model needs at least one use case");
  UnadjustedPoints p;
  for (auto a : model.actors) p.uwa += weight_of(kActorWeights, a);
  for (auto u : model.use_cases) p.uuc += weight_of(kUseCaseWeights, u);
  p.uucp = p.uwa + p.uuc;
  return p;
}

AdjustmentFactors compute_adjustment_factors(const UseCaseModel& model) {
  check_ratings(model.technical_ratings, "technical");
  check_ratings(model.environmental_ratings, "environmental");
  double tfactor = 0.0;
  for (std::size_t i = 0; i < kTechnicalWeights.size(); ++i) {
    tfactor += kTechnicalWeights[i] * model.technical_ratings[i];
  }
  double efactor = 0.0;
  for (std::size_t i = 0; i < kEnvironmentalWeights.size(); ++i) {
    efactor += kEnvironmentalWeights[i] * model.environmental_ratings[i];
  }
  return {0.6 + 0.01 * tfactor, 1.4 - 0.03 * efactor};
}

UcpBreakdown compute_ucp(const UseCaseModel& model) {
  model.validate();
  const auto u = compute_uucp(model);
  const auto f = compute_adjustment_factors(model);
  return {u.uwa, u.uuc, u.uucp, f.tcf, f.ef, u.uucp * f.tcf * f.ef};
}

double classical_effort(double ucp, double ratio) {
  if (!(ucp > 0.0) || !std::isfinite(ucp)) throw UcpError("ucp must be positive");
  if (!(ratio > 0.0) || !std::isfinite(ratio)) throw UcpError("productivity ratio must be positive");
  return ucp * ratio;
}

UseCaseModel use_case_model_from_json(const nlohmann::json& j) {
  UseCaseModel m;
  try {
    for (const auto& a : j.at("actors")) m.actors.push_back(complexity_from_string(a.get<std::string>()));
    for (const auto& u : j.at("use_cases")) {
      m.use_cases.push_back(complexity_from_string(u.get<std::string>()));
    }
    m.technical_ratings = ratings_from_json<13>(j, "technical");
    m.environmental_ratings = ratings_from_json<8>(j, "environmental");
  } catch (const nlohmann::json::exception& e) {
    throw UcpError(std::string("malformed use-case model: ") + e.what());
  }
  m.validate();
  return m;
}

nlohmann::json to_json(const UseCaseModel& model) {
  nlohmann::json j;
  j["actors"] = nlohmann::json::array();
  for (auto a : model.actors) j["actors"].push_back(std::string(to_string(a)));
  j["use_cases"] = nlohmann::json::array();
  for (auto u : model.use_cases) j["use_cases"].push_back(std::string(to_string(u)));
  j["technical"] = model.technical_ratings;
  j["environmental"] = model.environmental_ratings;
  return j;
}

nlohmann::json to_json(const UcpBreakdown& b) {
  return {{"uwa", b.uwa}, {"uuc", b.uuc}, {"uucp", b.uucp},
          {"tcf", b.tcf}, {"ef", b.ef},   {"ucp", b.ucp}};
}

} // namespace fmtree::ucp
