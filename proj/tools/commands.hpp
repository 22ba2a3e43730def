#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "fmtree/fcm.hpp"
#include "fmtree/mtree.hpp"
#include "fmtree/treeboost.hpp"

namespace fmtree::cli {

enum class ModelKind { Fmt, Treeboost, Mlr, Ucp };

ModelKind model_kind_from_string(const std::string& name);
std::string to_string(ModelKind kind);

/// Options shared by all subcommands. Overrides are validated by
/// `validate()` before any command does work.
struct RunConfig {
  std::string out;
  ModelKind model = ModelKind::Fmt;
  std::optional<ModelKind> expect_kind;  // predict: reject other model kinds
  std::uint64_t seed = 1;
  std::size_t train_count = 59;
  double ratio = 20.0;
  FcmConfig fcm;
  TreeConfig tree;
  TreeboostConfig treeboost;

  void validate() const;
};

int cmd_synth(const std::string& profile, std::size_t n, const RunConfig& cfg, std::ostream& out, std::ostream& err);
int cmd_compare(const std::string& dataset_path, const RunConfig& cfg, std::ostream& out, std::ostream& err);
int cmd_train(const std::string& dataset_path, const RunConfig& cfg, std::ostream& out, std::ostream& err);
int cmd_predict(const std::string& model_path, const std::string& dataset_path, const RunConfig& cfg,
                std::ostream& out, std::ostream& err);
int cmd_evaluate(const std::string& predictions_path, const std::string& dataset_path, const RunConfig& cfg,
                 std::ostream& out, std::ostream& err);
int cmd_ucp(const std::string& model_path, const RunConfig& cfg, std::ostream& out, std::ostream& err);

/// Parses argv and dispatches; returns the process exit code.
int run(int argc, char** argv, std::ostream& out, std::ostream& err);

} // namespace fmtree::cli
