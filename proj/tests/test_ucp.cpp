#include "doctest.h"

#include <numeric>

#include "fmtree/random.hpp"
#include "fmtree/ucp.hpp"

using namespace fmtree;
using namespace fmtree::ucp;

namespace {

UseCaseModel worked_example() {
  UseCaseModel m;
  m.actors = {Complexity::Simple, Complexity::Simple, Complexity::Complex};
  m.use_cases = {Complexity::Average, Complexity::Average, Complexity::Average};
  m.technical_ratings.fill(3);
  m.environmental_ratings.fill(3);
  return m;
}

} // namespace

TEST_SUITE("ucp") {

TEST_CASE("unadjusted points") {
  const auto u = compute_uucp(worked_example());
  CHECK(u.uwa == 5.0);
  CHECK(u.uuc == 30.0);
  CHECK(u.uucp == 35.0);

  UseCaseModel small;
  small.actors = {Complexity::Simple};
  small.use_cases = {Complexity::Simple};
  CHECK(compute_uucp(small).uucp == 6.0);

  UseCaseModel empty;
  empty.actors = {Complexity::Simple};
  CHECK_THROWS_AS(compute_uucp(empty), UcpError);
}

TEST_CASE("adjustment factors") {
  UseCaseModel m = worked_example();
  m.technical_ratings.fill(0);
  m.environmental_ratings.fill(0);
  CHECK(compute_adjustment_factors(m).tcf == doctest::Approx(0.6));
  CHECK(compute_adjustment_factors(m).ef == doctest::Approx(1.4));

  const auto f = compute_adjustment_factors(worked_example());
  CHECK(f.tcf == doctest::Approx(1.02));
  // weighted environmental sum 3 * 4.5 = 13.5
  CHECK(f.ef == doctest::Approx(1.4 - 0.03 * 13.5));
}

TEST_CASE("worked example end to end") {
  const auto b = compute_ucp(worked_example());
  CHECK(b.uucp == 35.0);
  CHECK(b.tcf == doctest::Approx(1.02));
  CHECK(b.ef == doctest::Approx(0.995));
  CHECK(b.ucp == doctest::Approx(35.5215).epsilon(1e-9));
  CHECK(classical_effort(b.ucp) == doctest::Approx(710.43));
}

TEST_CASE("unit technical factor leaves uucp scaled only by ef") {
  UseCaseModel m = worked_example();
  m.technical_ratings[0] = 2;  // 42 - 2 = 40 -> tcf = 1
  const auto b = compute_ucp(m);
  CHECK(b.tcf == doctest::Approx(1.0));
  CHECK(b.ucp == doctest::Approx(35.0 * b.ef));
}

TEST_CASE("ratings outside 0..5 are rejected") {
  UseCaseModel m = worked_example();
  m.technical_ratings[4] = 6;
  CHECK_THROWS_AS(compute_ucp(m), UcpError);
  m = worked_example();
  m.environmental_ratings[7] = -1;
  CHECK_THROWS_AS(compute_ucp(m), UcpError);
}

TEST_CASE("classical effort") {
  CHECK(classical_effort(120.0, 20.0) == 2400.0);
  CHECK(classical_effort(1.0, 20.0) == 20.0);
  CHECK(classical_effort(100.0, 15.0) == 1500.0);
  CHECK_THROWS(classical_effort(10.0, 0.0));
}

TEST_CASE("factor ranges and product over random models") {
  double positive = 0.0, negative = 0.0;
  for (double w : kEnvironmentalWeights) (w > 0 ? positive : negative) += w;
  Rng rng(17);
  for (int trial = 0; trial < 500; ++trial) {
    UseCaseModel m;
    const auto na = rng.uniform_index(6), nu = 1 + rng.uniform_index(20);
    for (std::uint64_t i = 0; i < na; ++i) m.actors.push_back(static_cast<Complexity>(rng.uniform_index(3)));
    for (std::uint64_t i = 0; i < nu; ++i) m.use_cases.push_back(static_cast<Complexity>(rng.uniform_index(3)));
    for (auto& r : m.technical_ratings) r = static_cast<int>(rng.uniform_index(6));
    for (auto& r : m.environmental_ratings) r = static_cast<int>(rng.uniform_index(6));
    const auto b = compute_ucp(m);
    CHECK(b.tcf >= 0.6 - 1e-12);
    CHECK(b.tcf <= 0.6 + 0.05 * 14.0 + 1e-12);
    CHECK(b.ef >= 1.4 - 0.15 * positive - 1e-12);
    CHECK(b.ef <= 1.4 - 0.15 * negative + 1e-12);
    CHECK(b.ucp == doctest::Approx(b.uucp * b.tcf * b.ef));
    CHECK(b.uucp == b.uwa + b.uuc);
  }
}

TEST_CASE("json model parsing") {
  const auto j = nlohmann::json::parse(R"({"actors":["simple","SIMPLE","complex"],
    "use_cases":["average","average","average"],
    "technical":[3,3,3,3,3,3,3,3,3,3,3,3,3],"environmental":[3,3,3,3,3,3,3,3]})");
  const auto m = use_case_model_from_json(j);
  CHECK(compute_ucp(m).ucp == doctest::Approx(35.5215));
  CHECK(use_case_model_from_json(to_json(m)).actors == m.actors);

  auto bad = j;
  bad["actors"][0] = "huge";
  CHECK_THROWS(use_case_model_from_json(bad));
  bad = j;
  bad["technical"].erase(0);
  CHECK_THROWS(use_case_model_from_json(bad));
}

} // TEST_SUITE
