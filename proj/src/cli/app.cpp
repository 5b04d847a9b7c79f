#include <cstdlib>
#include <ostream>

#include <CLI11.hpp>
#include <spdlog/sinks/ostream_sink.h>
#include <spdlog/spdlog.h>

#include "tieforge/cli/commands.hpp"
#include "tieforge/errors.hpp"

namespace tieforge::cli {
namespace {

void configure_logging(std::ostream& err) {
  auto sink = std::make_shared<spdlog::sinks::ostream_sink_mt>(err);
  auto logger = std::make_shared<spdlog::logger>("tieforge", sink);
  logger->set_pattern("[%l] %v");
  spdlog::level::level_enum level = spdlog::level::info;
  if (const char* env = std::getenv("TIEFORGE_LOG")) {
    const std::string v = env;
    if (v == "error") level = spdlog::level::err;
    else if (v == "debug") level = spdlog::level::debug;
    else if (v != "info") err << "warning: TIEFORGE_LOG must be error, info or debug; using info\n";
  }
  logger->set_level(level);
  spdlog::set_default_logger(logger);
}

void add_train_flags(CLI::App& cmd, trainer::TrainConfig& c, std::string& activation, std::string& precision,
                     bool& graph_off) {
  cmd.add_option("--learning-rate", c.learning_rate, "SGD learning rate")->capture_default_str();
  cmd.add_option("--theta", c.theta, "Transition filter threshold")->capture_default_str();
  cmd.add_option("--lambda", c.lambda, "Weight of the exclusion penalty")->capture_default_str();
  cmd.add_option("--gcn-layers", c.gcn_layers, "Number of GCN layers")->capture_default_str();
  cmd.add_option("--kernel", c.kernel, "Convolution kernel width")->capture_default_str();
  cmd.add_option("--feature-maps", c.feature_maps, "Convolution feature maps")->capture_default_str();
  cmd.add_option("--word-dim", c.word_dim, "Word embedding size")->capture_default_str();
  cmd.add_option("--pos-dim", c.pos_dim, "Position embedding size")->capture_default_str();
  cmd.add_option("--max-distance", c.max_distance, "Position clip distance")->capture_default_str();
  cmd.add_option("--batch-size", c.batch_size, "Training units per batch")->capture_default_str();
  cmd.add_option("--epochs", c.epochs, "Training epochs")->capture_default_str();
  cmd.add_option("--seed", c.seed, "Initialisation and shuffle seed")->capture_default_str();
  cmd.add_flag("--graph-off", graph_off, "Identity graph and lambda 0 (PCNN+ATT ablation)");
  cmd.add_flag("--renormalize", c.renormalize, "Row-normalise the filtered transition matrix");
  cmd.add_option("--clip-norm", c.clip_norm, "Global gradient norm clip (<= 0 disables)")->capture_default_str();
  cmd.add_option("--activation", activation, "GCN activation")
      ->check(CLI::IsMember({"tanh", "relu"}))
      ->capture_default_str();
  cmd.add_option("--precision", precision, "Parameter precision")
      ->check(CLI::IsMember({"f64", "f32"}))
      ->capture_default_str();
  cmd.add_flag("--debug-checks", c.debug_checks, "Assert finite gradients every batch");
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Relation extraction with force-directed relation graphs"};
  app.set_config("--config", "", "Read options from a key = value config file");
  app.require_subcommand(1);

  SynthOptions synth;
  std::vector<std::string> rules, exclusions;
  auto* synth_cmd = app.add_subcommand("synth", "Generate a corpus with planted relation ties");
  synth_cmd->add_option("--relations", synth.spec.num_relations, "Relation count including NA")->capture_default_str();
  synth_cmd->add_option("--bags", synth.spec.num_bags, "Entity pairs to generate")->capture_default_str();
  synth_cmd->add_option("--vocab-size", synth.spec.vocab_size, "Noise vocabulary size")->capture_default_str();
  synth_cmd->add_option("--entity-pool", synth.spec.entity_pool, "Distinct entity names")->capture_default_str();
  synth_cmd->add_option("--triggers", synth.spec.triggers_per_relation, "Trigger tokens per relation")
      ->capture_default_str();
  synth_cmd->add_option("--min-sentences", synth.spec.min_sentences, "Fewest sentences per bag")->capture_default_str();
  synth_cmd->add_option("--max-sentences", synth.spec.max_sentences, "Most sentences per bag")->capture_default_str();
  synth_cmd->add_option("--min-length", synth.spec.min_length, "Shortest sentence")->capture_default_str();
  synth_cmd->add_option("--max-length", synth.spec.max_length, "Longest sentence")->capture_default_str();
  synth_cmd->add_option("--na-fraction", synth.spec.na_fraction, "Fraction of NA bags")->capture_default_str();
  synth_cmd->add_option("--test-fraction", synth.spec.test_fraction, "Fraction of bags held out")
      ->capture_default_str();
  synth_cmd->add_option("--trigger-rate", synth.spec.trigger_rate, "Chance a sentence carries a trigger")
      ->capture_default_str();
  synth_cmd->add_option("--cooccurrence-noise", synth.spec.cooccurrence_noise, "Chance of an extra relation")
      ->capture_default_str();
  synth_cmd->add_option("--seed", synth.spec.seed, "Generator seed")->capture_default_str();
  synth_cmd->add_option("--rule", rules, "Implication FROM:TO:P (replaces the benchmark rules)");
  synth_cmd->add_option("--exclude", exclusions, "Exclusion A:B (replaces the benchmark exclusions)");
  synth_cmd->add_option("--out", synth.out, "Output directory")->capture_default_str();

  GraphOptions graph;
  auto* graph_cmd = app.add_subcommand("build-graph", "Dump co-occurrence, transition and exclusion matrices");
  graph_cmd->add_option("--train", graph.train, "Training corpus")->required();
  graph_cmd->add_option("--relations", graph.relations, "Relation mapping")->required();
  graph_cmd->add_option("--theta", graph.theta, "Transition filter threshold")->capture_default_str();
  graph_cmd->add_flag("--renormalize", graph.renormalize, "Row-normalise the filtered transition matrix");
  graph_cmd->add_option("--out", graph.out, "Output directory")->capture_default_str();

  TrainOptions train;
  std::string activation = "tanh", precision = "f64";
  bool graph_off = false;
  auto* train_cmd = app.add_subcommand("train", "Train a model and write a checkpoint");
  train_cmd->add_option("--train", train.train, "Training corpus")->required();
  train_cmd->add_option("--relations", train.relations, "Relation mapping")->required();
  train_cmd->add_option("--word-vectors", train.word_vectors, "Pretrained word vectors (text format)");
  train_cmd->add_option("--out", train.out, "Output directory")->capture_default_str();
  add_train_flags(*train_cmd, train.config, activation, precision, graph_off);

  EvalOptions eval;
  auto* eval_cmd = app.add_subcommand("eval", "Held-out PR evaluation of a checkpoint");
  eval_cmd->add_option("--checkpoint", eval.checkpoint, "Model checkpoint")->required();
  eval_cmd->add_option("--test", eval.test, "Test corpus")->required();
  eval_cmd->add_option("--relations", eval.relations, "Relation mapping to check against the checkpoint");
  eval_cmd->add_option("--ties", eval.ties, "Planted ties file for a recovery report");
  eval_cmd->add_flag("--export-embeddings", eval.export_embeddings, "Write a 2-D projection of H");
  eval_cmd->add_option("--out", eval.out, "Output directory")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      out << app.help();
      return kExitOk;
    }
    err << "error: " << e.what() << '\n';
    return kExitInvalid;
  }

  configure_logging(err);
  try {
    if (*synth_cmd) {
      if (!rules.empty()) {
        synth.spec.rules.clear();
        for (const auto& r : rules) synth.spec.rules.push_back(parse_rule(r));
      }
      if (!exclusions.empty()) {
        synth.spec.exclusions.clear();
        for (const auto& e : exclusions) synth.spec.exclusions.push_back(parse_exclusion(e));
      }
      return cmd_synth(synth, out, err);
    }
    if (*graph_cmd) return cmd_build_graph(graph, out, err);
    if (*train_cmd) {
      train.config.activation = trainer::parse_activation(activation);
      train.config.precision = trainer::parse_precision(precision);
      train.config.graph_enabled = !graph_off;
      return cmd_train(train, out, err);
    }
    return cmd_eval(eval, out, err);
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return kExitInvalid;
  }
}

}  // namespace tieforge::cli
