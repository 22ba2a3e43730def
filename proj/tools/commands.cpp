#include "commands.hpp"

#include <array>
#include <charconv>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <set>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"

#include "fmtree/data.hpp"
#include "fmtree/eval.hpp"
#include "fmtree/fmt_model.hpp"
#include "fmtree/mlr.hpp"
#include "fmtree/treeboost.hpp"
#include "fmtree/ucp.hpp"

namespace fmtree::cli {

namespace {

enum class LogLevel { Quiet = 0, Error = 1, Warn = 2, Info = 3, Debug = 4 };

LogLevel log_level() {
  const char* env = std::getenv("FMT_LOG");
  if (!env) return LogLevel::Warn;
  const std::string v(env);
  if (v == "quiet") return LogLevel::Quiet;
  if (v == "error") return LogLevel::Error;
  if (v == "info") return LogLevel::Info;
  if (v == "debug") return LogLevel::Debug;
  return LogLevel::Warn;
}

void log(std::ostream& err, LogLevel level, const std::string& msg) {
  static const LogLevel current = log_level();
  if (static_cast<int>(level) > static_cast<int>(current)) return;
  static constexpr std::array<const char*, 5> tags{"", "error", "warn", "info", "debug"};
  err << "[" << tags[static_cast<std::size_t>(level)] << "] " << msg << "\n";
}

int fail(std::ostream& err, const std::string& msg) {
  log(err, LogLevel::Error, msg);
  return 1;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw std::runtime_error("cannot write '" + path.string() + "'");
  f << content;
  if (!f) throw std::runtime_error("failed writing '" + path.string() + "'");
}

std::string number(double v) {
  std::array<char, 64> buf{};
  const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), ptr);
}

std::string render_predictions(const Dataset& data, const Eigen::VectorXd& pred) {
  std::string out = "id,predicted_ph\n";
  for (std::size_t i = 0; i < data.size(); ++i) {
    out += data[i].id + "," + number(pred(static_cast<Eigen::Index>(i))) + "\n";
  }
  return out;
}

std::string render_moments(const SampleMoments& m) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(2) << "mean=" << m.mean << " sd=" << m.sd << " skewness=" << std::setprecision(3)
     << m.skewness << std::setprecision(2) << " min=" << m.min << " max=" << m.max << "\n";
  return os.str();
}

Eigen::VectorXd predict_ucp(const Dataset& data, double ratio) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(data.size()));
  for (std::size_t i = 0; i < data.size(); ++i) {
    out(static_cast<Eigen::Index>(i)) = ucp::classical_effort(data[i].size_ucp, ratio);
  }
  return out;
}

Eigen::VectorXd predict_with(const nlohmann::json& model, const Dataset& data) {
  const auto kind = model_kind_from_string(model.at("kind").get<std::string>());
  switch (kind) {
  case ModelKind::Fmt: return predict_fmt(fmt_model_from_json(model), data);
  case ModelKind::Treeboost: return predict_treeboost(treeboost_model_from_json(model), data);
  case ModelKind::Mlr: return predict_mlr(mlr_model_from_json(model), data);
  case ModelKind::Ucp: return predict_ucp(data, model.at("ratio").get<double>());
  }
  throw std::runtime_error("unknown model kind");
}

std::vector<double> to_std(const Eigen::VectorXd& v) { return {v.data(), v.data() + v.size()}; }

} // namespace

ModelKind model_kind_from_string(const std::string& name) {
  if (name == "fmt") return ModelKind::Fmt;
  if (name == "treeboost") return ModelKind::Treeboost;
  if (name == "mlr") return ModelKind::Mlr;
  if (name == "ucp") return ModelKind::Ucp;
  throw std::invalid_argument("unknown model kind '" + name + "' (expected fmt, treeboost, mlr or ucp)");
}

std::string to_string(ModelKind kind) {
  switch (kind) {
  case ModelKind::Fmt: return "fmt";
  case ModelKind::Treeboost: return "treeboost";
  case ModelKind::Mlr: return "mlr";
  case ModelKind::Ucp: return "ucp";
  }
  return "fmt";
}

void RunConfig::validate() const {
  fcm.validate();
  tree.validate();
  treeboost.validate();
  if (!(ratio > 0.0) || !std::isfinite(ratio)) throw std::invalid_argument("--ratio must be positive");
  if (train_count == 0) throw std::invalid_argument("--train-count must be positive");
}

// --- commands ---------------------------------------------------------------------

int cmd_synth(const std::string& profile, std::size_t n, const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  try {
    cfg.validate();
    const Dataset data = profile == "piecewise" ? generate_piecewise_benchmark(n, cfg.seed)
                                                : generate_synthetic(profile_by_name(profile), n, cfg.seed);
    const auto moments = render_moments(sample_moments(effort_vector(data)));
    if (cfg.out.empty()) {
      out << render_csv(data);
      err << moments;
    } else {
      write_file(cfg.out, render_csv(data));
      out << moments;
    }
    return 0;
  } catch (const std::exception& e) {
    return fail(err, std::string("synth: ") + e.what());
  }
}

int cmd_train(const std::string& dataset_path, const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  try {
    cfg.validate();
    const Dataset data = load_dataset(dataset_path);
    log(err, LogLevel::Info, "training " + to_string(cfg.model) + " on " + std::to_string(data.size()) + " projects");
    nlohmann::json model;
    switch (cfg.model) {
    case ModelKind::Fmt: model = to_json(train_fmt(data, cfg.fcm, cfg.tree)); break;
    case ModelKind::Treeboost: model = to_json(fit_treeboost(data, cfg.treeboost)); break;
    case ModelKind::Mlr: model = to_json(fit_mlr(data)); break;
    case ModelKind::Ucp: model = {{"kind", "ucp"}, {"ratio", cfg.ratio}}; break;
    }
    const auto text = model.dump(2) + "\n";
    if (cfg.out.empty()) {
      out << text;
    } else {
      write_file(cfg.out, text);
    }
    return 0;
  } catch (const std::exception& e) {
    return fail(err, std::string("train: ") + e.what());
  }
}

int cmd_predict(const std::string& model_path, const std::string& dataset_path, const RunConfig& cfg,
                std::ostream& out, std::ostream& err) {
  try {
    cfg.validate();
    const auto model = nlohmann::json::parse(read_file(model_path));
    if (cfg.expect_kind && model.at("kind").get<std::string>() != to_string(*cfg.expect_kind)) {
      throw std::runtime_error("model file holds a '" + model.at("kind").get<std::string>() + "' model, expected '" +
                               to_string(*cfg.expect_kind) + "'");
    }
    const Dataset data = load_dataset(dataset_path);
    const auto text = render_predictions(data, predict_with(model, data));
    if (cfg.out.empty()) {
      out << text;
    } else {
      write_file(cfg.out, text);
    }
    return 0;
  } catch (const std::exception& e) {
    return fail(err, std::string("predict: ") + e.what());
  }
}

int cmd_evaluate(const std::string& predictions_path, const std::string& dataset_path, const RunConfig& cfg,
                 std::ostream& out, std::ostream& err) {
  try {
    cfg.validate();
    const Dataset data = load_dataset(dataset_path);
    const auto text = read_file(predictions_path);

    std::map<std::string, double> predicted;
    std::istringstream lines(text);
    std::string line;
    std::size_t row = 0;
    while (std::getline(lines, line)) {
      ++row;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (line.empty() || row == 1) continue;
      const auto comma = line.find(',');
      if (comma == std::string::npos) throw std::runtime_error("malformed prediction at row " + std::to_string(row));
      const std::string id = line.substr(0, comma);
      const std::string value = line.substr(comma + 1);
      double v = 0.0;
      const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
      if (ec != std::errc{} || ptr != value.data() + value.size()) {
        throw std::runtime_error("non-numeric prediction at row " + std::to_string(row));
      }
      predicted[id] = v;
    }

    std::vector<std::string> missing, extra;
    std::set<std::string> ids;
    for (const auto& p : data) {
      ids.insert(p.id);
      if (!predicted.count(p.id)) missing.push_back(p.id);
    }
    for (const auto& [id, _] : predicted) {
      if (!ids.count(id)) extra.push_back(id);
    }
    if (!missing.empty() || !extra.empty()) {
      std::string msg = "id sets differ;";
      if (!missing.empty()) {
        msg += " missing predictions for:";
        for (const auto& id : missing) msg += " " + id;
      }
      if (!extra.empty()) {
        msg += (missing.empty() ? "" : ";");
        msg += " predictions without actuals:";
        for (const auto& id : extra) msg += " " + id;
      }
      return fail(err, "evaluate: " + msg);
    }

    std::vector<double> actual, pred;
    for (const auto& p : data) {
      actual.push_back(p.effort_ph);
      pred.push_back(predicted.at(p.id));
    }
    const EvalReport report = evaluate(actual, pred);
    const auto json_text = to_json(report).dump(2) + "\n";
    if (cfg.out.empty()) {
      out << json_text;
    } else {
      write_file(cfg.out, json_text);
      out << render_metrics_table({{"model", report}});
    }
    return 0;
  } catch (const std::exception& e) {
    return fail(err, std::string("evaluate: ") + e.what());
  }
}

int cmd_ucp(const std::string& model_path, const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  try {
    cfg.validate();
    const auto model = ucp::use_case_model_from_json(nlohmann::json::parse(read_file(model_path)));
    const auto b = ucp::compute_ucp(model);
    const double effort = ucp::classical_effort(b.ucp, cfg.ratio);
    auto j = ucp::to_json(b);
    j["ratio"] = cfg.ratio;
    j["effort_ph"] = effort;
    if (!cfg.out.empty()) write_file(cfg.out, j.dump(2) + "\n");
    out << std::fixed << std::setprecision(4) << "UWA   " << b.uwa << "\nUUC   " << b.uuc << "\nUUCP  " << b.uucp
        << "\nTCF   " << b.tcf << "\nEF    " << b.ef << "\nUCP   " << b.ucp << "\nEffort (ratio " << cfg.ratio
        << ") " << effort << " PH\n";
    return 0;
  } catch (const std::exception& e) {
    return fail(err, std::string("ucp: ") + e.what());
  }
}

int cmd_compare(const std::string& dataset_path, const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  try {
    cfg.validate();
    const Dataset data = load_dataset(dataset_path);
    const auto split = split_holdout(data, cfg.train_count, cfg.seed);
    log(err, LogLevel::Info,
        "split " + std::to_string(split.train.size()) + " train / " + std::to_string(split.test.size()) + " test");

    FcmConfig fcm = cfg.fcm;
    fcm.seed = cfg.seed;
    TreeboostConfig tb = cfg.treeboost;
    tb.seed = cfg.seed;

    const FmtModel fmt = train_fmt(split.train, fcm, cfg.tree);
    const TreeboostModel boost = fit_treeboost(split.train, tb);
    const MlrModel mlr = fit_mlr(split.train);
    log(err, LogLevel::Debug, "fmt tree:\n" + render_text(fmt.tree, fmt.routing_names(), fmt.feature_names));

    const std::vector<std::pair<std::string, Eigen::VectorXd>> predictions{
        {"FMT", predict_fmt(fmt, split.test)},
        {"Treeboost", predict_treeboost(boost, split.test)},
        {"MLR", predict_mlr(mlr, split.test)},
        {"UCP", predict_ucp(split.test, cfg.ratio)}};

    const auto actual = to_std(effort_vector(split.test));
    std::vector<std::pair<std::string, EvalReport>> reports;
    MethodMres mres;
    std::vector<std::pair<std::string, BoxplotSummary>> boxes;
    for (const auto& [name, p] : predictions) {
      auto report = evaluate(actual, to_std(p));
      mres.emplace_back(name, report.mres);
      boxes.emplace_back(name, report.boxplot);
      reports.emplace_back(name, std::move(report));
    }
    const auto wtl = win_tie_loss(mres, kAllMeasures, kDefaultAlpha);

    const auto metrics_text = render_metrics_table(reports);
    const auto wtl_text = render_wtl_table(wtl);
    out << "Performance on " << split.test.size() << " test projects (" << split.train.size() << " training)\n"
        << metrics_text << "\nWin-tie-loss\n"
        << wtl_text;

    if (!cfg.out.empty()) {
      const std::filesystem::path dir(cfg.out);
      std::filesystem::create_directories(dir);
      nlohmann::json metrics = nlohmann::json::object();
      for (const auto& [name, r] : reports) metrics[name] = to_json(r);
      nlohmann::json report{{"dataset", dataset_path},
                            {"seed", cfg.seed},
                            {"train_count", split.train.size()},
                            {"test_count", split.test.size()},
                            {"model_order", {"FMT", "Treeboost", "MLR", "UCP"}},
                            {"metrics", metrics},
                            {"win_tie_loss", to_json(wtl)},
                            {"mlr", to_json(mlr)}};
      std::string pred_csv = "id,actual_ph,fmt,treeboost,mlr,ucp\n";
      for (std::size_t i = 0; i < split.test.size(); ++i) {
        pred_csv += split.test[i].id + "," + number(actual[i]);
        for (const auto& [_, p] : predictions) pred_csv += "," + number(p(static_cast<Eigen::Index>(i)));
        pred_csv += "\n";
      }
      write_file(dir / "metrics.txt", metrics_text);
      write_file(dir / "wtl.txt", wtl_text);
      write_file(dir / "metrics.json", metrics.dump(2) + "\n");
      write_file(dir / "wtl.json", to_json(wtl).dump(2) + "\n");
      write_file(dir / "report.json", report.dump(2) + "\n");
      write_file(dir / "predictions.csv", pred_csv);
      write_file(dir / "boxplot.svg", render_boxplot_svg(boxes, "Absolute residuals (PH)"));
      write_file(dir / "fmt_model.json", to_json(fmt).dump(2) + "\n");
    }
    return 0;
  } catch (const std::exception& e) {
    return fail(err, std::string("compare: ") + e.what());
  }
}

// --- argument parsing ---------------------------------------------------------

int run(int argc, char** argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Fuzzy model tree effort estimation from Use Case Points"};
  app.require_subcommand(1);

  RunConfig cfg;
  std::string model_name = "fmt";
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--seed", cfg.seed, "Random seed");
    sub->add_option("--out", cfg.out, "Output path (file or directory)");
  };
  auto add_model_flags = [&](CLI::App* sub) {
    sub->add_option("--clusters", cfg.fcm.clusters, "FCM cluster count");
    sub->add_option("--fuzzifier", cfg.fcm.fuzzifier, "FCM fuzzifier m");
    sub->add_option("--trees", cfg.treeboost.n_trees, "Treeboost rounds");
    sub->add_option("--shrinkage", cfg.treeboost.shrinkage, "Treeboost shrinkage");
    sub->add_option("--ratio", cfg.ratio, "Classical UCP productivity ratio (PH/UCP)");
  };

  std::string profile, path_a, path_b;
  std::size_t count = 0;

  auto* synth = app.add_subcommand("synth", "Generate a synthetic dataset (ind1, ind2, edu, piecewise)");
  synth->add_option("profile", profile)->required();
  synth->add_option("n", count)->required();
  add_common(synth);

  auto* compare = app.add_subcommand("compare", "Train FMT/Treeboost/MLR, score them and classical UCP");
  compare->add_option("dataset", path_a)->required();
  compare->add_option("--train-count", cfg.train_count, "Training projects");
  add_common(compare);
  add_model_flags(compare);

  auto* train = app.add_subcommand("train", "Train a model and write it as JSON");
  train->add_option("model", model_name, "fmt | treeboost | mlr | ucp")->required();
  train->add_option("dataset", path_a)->required();
  add_common(train);
  add_model_flags(train);

  auto* predict = app.add_subcommand("predict", "Predict effort with a saved model");
  predict->add_option("model_file", path_a)->required();
  predict->add_option("dataset", path_b)->required();
  std::string expect_kind;
  predict->add_option("--model", expect_kind, "Require the model file to be of this kind");
  add_common(predict);

  auto* evaluate_cmd = app.add_subcommand("evaluate", "Score predictions against actual efforts");
  evaluate_cmd->add_option("predictions", path_a)->required();
  evaluate_cmd->add_option("dataset", path_b)->required();
  add_common(evaluate_cmd);

  auto* ucp_cmd = app.add_subcommand("ucp", "Size a use-case model and apply the productivity ratio");
  ucp_cmd->add_option("use_case_model", path_a)->required();
  ucp_cmd->add_option("--ratio", cfg.ratio, "Productivity ratio (PH/UCP)");
  add_common(ucp_cmd);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << app.help();
    return fail(err, e.what());
  }

  try {
    cfg.model = model_kind_from_string(model_name);
    if (!expect_kind.empty()) cfg.expect_kind = model_kind_from_string(expect_kind);
    cfg.validate();
    if (*synth && profile != "piecewise") {
      try {
        profile_by_name(profile);
      } catch (const std::exception&) {
        err << synth->help();
        throw std::invalid_argument("unknown profile '" + profile + "' (expected ind1, ind2, edu or piecewise)");
      }
    }
  } catch (const std::exception& e) {
    return fail(err, e.what());
  }

  if (*synth) return cmd_synth(profile, count, cfg, out, err);
  if (*compare) return cmd_compare(path_a, cfg, out, err);
  if (*train) return cmd_train(path_a, cfg, out, err);
  if (*predict) return cmd_predict(path_a, path_b, cfg, out, err);
  if (*evaluate_cmd) return cmd_evaluate(path_a, path_b, cfg, out, err);
  if (*ucp_cmd) return cmd_ucp(path_a, cfg, out, err);
  return fail(err, "no subcommand");
}

} // namespace fmtree::cli
