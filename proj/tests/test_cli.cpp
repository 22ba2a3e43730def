#include "doctest.h"

#include <algorithm>

#include "cli_harness.hpp"
#include "fmtree/data.hpp"
#include "json.hpp"

using fixtures::run_cli;
using fixtures::slurp;

namespace {

std::size_t line_count(const std::string& s) { return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n')); }

} // namespace

TEST_SUITE("cli") {

TEST_CASE("synth writes the requested rows and reports moments") {
  const auto dir = fixtures::scratch_dir("synth");
  const auto path = (dir / "edu.csv").string();
  const auto r = run_cli({"synth", "edu", "1000", "--seed", "7", "--out", path});
  CHECK(r.code == 0);
  CHECK(r.out.find("mean=") != std::string::npos);
  const auto text = slurp(path);
  CHECK(line_count(text) == 1001);
  CHECK(fmtree::parse_dataset(text).size() == 1000);

  const auto again = (dir / "edu2.csv").string();
  CHECK(run_cli({"synth", "edu", "1000", "--seed", "7", "--out", again}).code == 0);
  CHECK(slurp(again) == text);
}

TEST_CASE("synth rejects unknown profiles with usage") {
  const auto r = run_cli({"synth", "foo", "10"});
  CHECK(r.code != 0);
  CHECK(r.err.find("Usage") != std::string::npos);
  CHECK(r.err.find("foo") != std::string::npos);
  CHECK(r.out.empty());
}

TEST_CASE("synth without --out streams csv to stdout") {
  const auto r = run_cli({"synth", "ind1", "5", "--seed", "1"});
  CHECK(r.code == 0);
  CHECK(line_count(r.out) == 6);
  CHECK(r.err.find("mean=") != std::string::npos);
}

TEST_CASE("compare emits text and json reports for four models") {
  const auto dir = fixtures::scratch_dir("compare");
  const auto data = (dir / "pw.csv").string();
  REQUIRE(run_cli({"synth", "piecewise", "84", "--seed", "3", "--out", data}).code == 0);
  const auto r = run_cli({"compare", data, "--seed", "3", "--train-count", "59", "--out", (dir / "out").string()});
  REQUIRE(r.code == 0);
  for (const char* name : {"FMT", "Treeboost", "MLR", "UCP", "MMRE", "MdMRE", "Pred(0.25)", "Pred(0.5)", "Win"}) {
    CHECK(r.out.find(name) != std::string::npos);
  }
  const auto report = nlohmann::json::parse(slurp(dir / "out" / "report.json"));
  CHECK(report.at("metrics").size() == 4);
  for (const auto& [model, m] : report.at("metrics").items()) {
    CHECK(m.contains("mmre"));
    CHECK(m.contains("mdmre"));
    CHECK(m.contains("pred25"));
    CHECK(m.contains("pred50"));
  }
  CHECK(report.at("test_count") == 25);
  CHECK(nlohmann::json::parse(slurp(dir / "out" / "wtl.json")).size() == 4);
  CHECK(slurp(dir / "out" / "boxplot.svg").find("<svg") == 0);

  const auto r2 = run_cli({"compare", data, "--seed", "3", "--train-count", "59", "--out", (dir / "out2").string()});
  CHECK(r2.out == r.out);
  for (const char* f : {"report.json", "metrics.txt", "wtl.txt", "boxplot.svg", "predictions.csv", "fmt_model.json"}) {
    CHECK(slurp(dir / "out" / f) == slurp(dir / "out2" / f));
  }
}

TEST_CASE("compare validates overrides before running") {
  const auto dir = fixtures::scratch_dir("compare-bad");
  const auto data = (dir / "pw.csv").string();
  REQUIRE(run_cli({"synth", "piecewise", "30", "--out", data}).code == 0);
  CHECK(run_cli({"compare", data, "--train-count", "0"}).code != 0);
  CHECK(run_cli({"compare", data, "--train-count", "30"}).code != 0);
  CHECK(run_cli({"compare", data, "--clusters", "0"}).code != 0);
  CHECK(run_cli({"compare", data, "--fuzzifier", "1"}).code != 0);
  CHECK(run_cli({"compare", data, "--shrinkage", "0"}).code != 0);
  CHECK(run_cli({"compare", (dir / "missing.csv").string()}).code != 0);
  CHECK_FALSE(std::filesystem::exists(dir / "out"));
}

TEST_CASE("train, predict and evaluate round trip") {
  const auto dir = fixtures::scratch_dir("train");
  const auto data = (dir / "pw.csv").string();
  REQUIRE(run_cli({"synth", "piecewise", "40", "--seed", "4", "--out", data}).code == 0);
  for (const char* kind : {"fmt", "treeboost", "mlr", "ucp"}) {
    const auto model = (dir / (std::string(kind) + ".json")).string();
    const auto preds = (dir / (std::string(kind) + ".csv")).string();
    REQUIRE(run_cli({"train", kind, data, "--trees", "50", "--out", model}).code == 0);
    CHECK(nlohmann::json::parse(slurp(model)).at("kind") == kind);
    REQUIRE(run_cli({"predict", model, data, "--model", kind, "--out", preds}).code == 0);
    CHECK(line_count(slurp(preds)) == 41);
    const auto ev = run_cli({"evaluate", preds, data});
    CHECK(ev.code == 0);
    CHECK(nlohmann::json::parse(ev.out).at("mres").size() == 40);
  }
  const auto wrong = run_cli({"predict", (dir / "mlr.json").string(), data, "--model", "fmt"});
  CHECK(wrong.code != 0);
  CHECK(wrong.err.find("mlr") != std::string::npos);
  CHECK(run_cli({"train", "forest", data}).code != 0);
}

TEST_CASE("evaluate names ids missing from either side") {
  const auto dir = fixtures::scratch_dir("evaluate");
  const auto data = (dir / "d.csv").string();
  {
    std::ofstream(data) << "id,size_ucp,productivity,complexity,effort_ph\na,100,20,3,2000\nb,120,20,3,2400\n";
    std::ofstream(dir / "p.csv") << "id,predicted_ph\na,2100\nzz,5\n";
  }
  const auto r = run_cli({"evaluate", (dir / "p.csv").string(), data});
  CHECK(r.code != 0);
  CHECK(r.err.find("b") != std::string::npos);
  CHECK(r.err.find("zz") != std::string::npos);
  CHECK(r.out.empty());
}

TEST_CASE("ucp prints the worked example") {
  const auto dir = fixtures::scratch_dir("ucp");
  const auto path = dir / "uc.json";
  std::ofstream(path) << R"({"actors":["simple","simple","complex"],"use_cases":["average","average","average"],
    "technical":[3,3,3,3,3,3,3,3,3,3,3,3,3],"environmental":[3,3,3,3,3,3,3,3]})";
  const auto r = run_cli({"ucp", path.string()});
  CHECK(r.code == 0);
  CHECK(r.out.find("35.5215") != std::string::npos);
  CHECK(r.out.find("710.4300") != std::string::npos);
  CHECK(run_cli({"ucp", path.string(), "--ratio", "-3"}).code != 0);
  CHECK(run_cli({"ucp", (dir / "none.json").string()}).code != 0);
}

TEST_CASE("no subcommand is an error") {
  CHECK(run_cli({}).code != 0);
  CHECK(run_cli({"--help"}).code == 0);
}

} // TEST_SUITE
