#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "tieforge/corpus/synth.hpp"
#include "tieforge/trainer/config.hpp"

namespace tieforge::cli {

// Exit statuses shared by every subcommand.
inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitInvalid = 2;

struct SynthOptions {
  corpus::SynthSpec spec = corpus::SynthSpec::benchmark();
  std::filesystem::path out = "synth";
};

struct GraphOptions {
  std::filesystem::path train;
  std::filesystem::path relations;
  std::filesystem::path out = "graph";
  double theta = 0.18;
  bool renormalize = false;
};

struct TrainOptions {
  std::filesystem::path train;
  std::filesystem::path relations;
  std::filesystem::path out = "run";
  std::filesystem::path word_vectors;  // optional
  trainer::TrainConfig config;
};

struct EvalOptions {
  std::filesystem::path checkpoint;
  std::filesystem::path test;
  std::filesystem::path relations;  // optional consistency check
  std::filesystem::path ties;       // optional ground truth
  std::filesystem::path out = "eval";
  bool export_embeddings = false;
};

// Output file names inside the --out directory.
inline constexpr const char* kTrainFile = "train.jsonl";
inline constexpr const char* kTestFile = "test.jsonl";
inline constexpr const char* kRelationsFile = "relations.tsv";
inline constexpr const char* kTiesFile = "ties.tsv";
inline constexpr const char* kCheckpointFile = "model.ckpt";
inline constexpr const char* kLossTraceFile = "loss_trace.csv";
inline constexpr const char* kPrCurveFile = "pr_curve.csv";
inline constexpr const char* kReportFile = "ties_report.txt";
inline constexpr const char* kProjectionFile = "projection.tsv";
inline constexpr const char* kEffectiveConfigFile = "effective_config.ini";

int cmd_synth(const SynthOptions& options, std::ostream& out, std::ostream& err);
int cmd_build_graph(const GraphOptions& options, std::ostream& out, std::ostream& err);
int cmd_train(const TrainOptions& options, std::ostream& out, std::ostream& err);
int cmd_eval(const EvalOptions& options, std::ostream& out, std::ostream& err);

// Parses `FROM:TO:P` rules and `A:B` exclusions given as relation indices.
corpus::Implication parse_rule(const std::string& text);
corpus::Exclusion parse_exclusion(const std::string& text);

// Full command line: subcommands, --config file, TIEFORGE_LOG.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace tieforge::cli
