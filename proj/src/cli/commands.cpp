#include "tieforge/cli/commands.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

#include <spdlog/spdlog.h>

#include "tieforge/corpus/corpus.hpp"
#include "tieforge/errors.hpp"
#include "tieforge/evalkit/evaluation.hpp"
#include "tieforge/evalkit/ties_report.hpp"
#include "tieforge/tiesgraph/ties_graph.hpp"
#include "tieforge/trainer/checkpoint.hpp"
#include "tieforge/trainer/trainer.hpp"

namespace tieforge::cli {
namespace fs = std::filesystem;

namespace {

std::ofstream open_output(const fs::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  out << std::setprecision(17);
  return out;
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw Error("cannot create output directory " + dir.string());
}

void require_file(const fs::path& path, const char* what) {
  if (path.empty()) throw ConfigError(std::string("missing --") + what);
  if (!fs::is_regular_file(path)) throw ConfigError(std::string(what) + " file not found: " + path.string());
}

std::string fmt_real(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

void echo_config(const fs::path& dir, const std::string& section,
                 const std::vector<std::pair<std::string, std::string>>& entries) {
  auto out = open_output(dir / kEffectiveConfigFile);
  out << '[' << section << "]\n";
  for (const auto& [key, value] : entries) out << key << " = " << value << '\n';
}

std::string quoted(const fs::path& p) { return '"' + p.string() + '"'; }
std::string flag(bool b) { return b ? "true" : "false"; }

std::vector<std::pair<std::string, std::string>> train_config_entries(const trainer::TrainConfig& c) {
  return {{"learning-rate", fmt_real(c.learning_rate)},
          {"theta", fmt_real(c.theta)},
          {"lambda", fmt_real(c.lambda)},
          {"gcn-layers", std::to_string(c.gcn_layers)},
          {"kernel", std::to_string(c.kernel)},
          {"feature-maps", std::to_string(c.feature_maps)},
          {"word-dim", std::to_string(c.word_dim)},
          {"pos-dim", std::to_string(c.pos_dim)},
          {"max-distance", std::to_string(c.max_distance)},
          {"batch-size", std::to_string(c.batch_size)},
          {"epochs", std::to_string(c.epochs)},
          {"seed", std::to_string(c.seed)},
          {"graph-off", flag(!c.graph_enabled)},
          {"renormalize", flag(c.renormalize)},
          {"clip-norm", fmt_real(c.clip_norm)},
          {"activation", trainer::to_string(c.activation)},
          {"precision", trainer::to_string(c.precision)},
          {"debug-checks", flag(c.debug_checks)}};
}

template <typename Body>
int guarded(std::ostream& err, Body&& body) {
  try {
    return body();
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return kExitInvalid;
  } catch (const SpecError& e) {
    err << "error: " << e.what() << '\n';
    return kExitInvalid;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  }
}

}  // namespace

corpus::Implication parse_rule(const std::string& text) {
  corpus::Implication rule;
  char c1 = 0, c2 = 0;
  std::istringstream in(text);
  if (!(in >> rule.from >> c1 >> rule.to >> c2 >> rule.probability) || c1 != ':' || c2 != ':' || !in.eof()) {
    throw ConfigError("rule '" + text + "' is not FROM:TO:P");
  }
  return rule;
}

corpus::Exclusion parse_exclusion(const std::string& text) {
  corpus::Exclusion ex;
  char c = 0;
  std::istringstream in(text);
  if (!(in >> ex.a >> c >> ex.b) || c != ':' || !in.eof()) throw ConfigError("exclusion '" + text + "' is not A:B");
  return ex;
}

int cmd_synth(const SynthOptions& options, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const auto& spec = options.spec;
    spec.validate();
    ensure_dir(options.out);
    const auto corpus = corpus::generate_synthetic(spec);
    {
      auto f = open_output(options.out / kTrainFile);
      for (const auto& r : corpus.train) corpus::write_record(f, r);
    }
    {
      auto f = open_output(options.out / kTestFile);
      for (const auto& r : corpus.test) corpus::write_record(f, r);
    }
    corpus.relations.save(options.out / kRelationsFile);
    corpus.ties.save(options.out / kTiesFile, corpus.relations);

    std::vector<std::pair<std::string, std::string>> entries{
        {"relations", std::to_string(spec.num_relations)},
        {"bags", std::to_string(spec.num_bags)},
        {"vocab-size", std::to_string(spec.vocab_size)},
        {"entity-pool", std::to_string(spec.entity_pool)},
        {"triggers", std::to_string(spec.triggers_per_relation)},
        {"min-sentences", std::to_string(spec.min_sentences)},
        {"max-sentences", std::to_string(spec.max_sentences)},
        {"min-length", std::to_string(spec.min_length)},
        {"max-length", std::to_string(spec.max_length)},
        {"na-fraction", fmt_real(spec.na_fraction)},
        {"test-fraction", fmt_real(spec.test_fraction)},
        {"trigger-rate", fmt_real(spec.trigger_rate)},
        {"cooccurrence-noise", fmt_real(spec.cooccurrence_noise)},
        {"seed", std::to_string(spec.seed)}};
    std::string rules = "[", exclusions = "[";
    for (const auto& r : spec.rules) {
      rules += std::string(rules.size() > 1 ? "," : "") + '"' + std::to_string(r.from) + ":" +
               std::to_string(r.to) + ":" + fmt_real(r.probability) + '"';
    }
    for (const auto& e : spec.exclusions) {
      exclusions += std::string(exclusions.size() > 1 ? "," : "") + '"' + std::to_string(e.a) + ":" +
                    std::to_string(e.b) + '"';
    }
    entries.emplace_back("rule", rules + "]");
    entries.emplace_back("exclude", exclusions + "]");
    entries.emplace_back("out", quoted(options.out));
    echo_config(options.out, "synth", entries);

    out << "train_bags=" << corpus.train_bags << '\n'
        << "test_bags=" << corpus.test_bags << '\n'
        << "na_bags=" << corpus.na_bags << '\n'
        << "train_sentences=" << corpus.train.size() << '\n'
        << "test_sentences=" << corpus.test.size() << '\n';
    return kExitOk;
  });
}

int cmd_build_graph(const GraphOptions& options, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    require_file(options.train, "train");
    require_file(options.relations, "relations");
    const auto relations = corpus::RelationMap::load(options.relations);
    const auto loaded = corpus::load_corpus(options.train, relations, corpus::VocabularyMode::kBuild);
    const auto counts = graph::build_cooccurrence(loaded.bags, relations.size());
    const auto g = graph::build_graph(counts, options.theta, options.renormalize);
    ensure_dir(options.out);
    {
      auto f = open_output(options.out / "M.tsv");
      graph::write_count_matrix(f, g.m, g.k, relations);
    }
    {
      auto f = open_output(options.out / "N.tsv");
      graph::write_counts(f, g.n, relations);
    }
    {
      auto f = open_output(options.out / "P_hat.tsv");
      graph::write_real_matrix(f, g.p_hat, g.k, relations);
    }
    {
      auto f = open_output(options.out / "U.tsv");
      graph::write_real_matrix(f, g.u, g.k, relations);
    }
    echo_config(options.out, "build-graph",
                {{"train", quoted(options.train)},
                 {"relations", quoted(options.relations)},
                 {"theta", fmt_real(options.theta)},
                 {"renormalize", flag(options.renormalize)},
                 {"out", quoted(options.out)}});

    std::size_t cooccurring = 0;
    for (std::size_t i = 0; i < g.k; ++i) {
      for (std::size_t j = 0; j < g.k; ++j) cooccurring += (i != j && g.m[i * g.k + j] > 0);
    }
    out << "pairs=" << loaded.bags.size() << '\n'
        << "edges=" << cooccurring << '\n'
        << "filtered_edges=" << g.edge_count() << '\n';
    return kExitOk;
  });
}

int cmd_train(const TrainOptions& options, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    options.config.validate();
    require_file(options.train, "train");
    require_file(options.relations, "relations");
    const auto relations = corpus::RelationMap::load(options.relations);
    corpus::LoadOptions load;
    load.max_distance = options.config.max_distance;
    auto loaded = corpus::load_corpus(options.train, relations, corpus::VocabularyMode::kBuild, {}, load);
    const auto graph = graph::build_graph(loaded.bags, relations.size(), options.config.theta,
                                          options.config.renormalize);
    ensure_dir(options.out);

    auto params = trainer::init_params(
        trainer::ModelDims::from_config(options.config, loaded.vocabulary.size(), relations.size()),
        options.config.seed);
    if (!options.word_vectors.empty()) {
      const auto n = corpus::load_word_vectors(options.word_vectors, loaded.vocabulary, options.config.word_dim,
                                               params.tables.word->values());
      spdlog::info("loaded {} pretrained word vectors", n);
    }
    spdlog::info("training on {} bags, {} relations, {} graph edges", loaded.bags.size(), relations.size(),
                 graph.edge_count());

    trainer::TrainResult result;
    try {
      result = trainer::train_from(std::move(params), loaded.bags, options.config, graph,
                                   [](const trainer::EpochStats& s) {
                                     spdlog::info("epoch {} mean loss {:.6f}", s.epoch, s.mean_loss);
                                   });
    } catch (const TrainingError& e) {
      err << "error: " << e.what() << '\n';
      return kExitFailure;
    }

    trainer::save_checkpoint(options.out / kCheckpointFile,
                             {options.config, result.params, result.graph, relations, loaded.vocabulary});
    {
      auto f = open_output(options.out / kLossTraceFile);
      f << "epoch,mean_loss,mean_nll,penalty\n";
      for (const auto& s : result.trace) f << s.epoch << ',' << s.mean_loss << ',' << s.mean_nll << ',' << s.penalty << '\n';
    }
    auto entries = train_config_entries(options.config);
    entries.emplace_back("train", quoted(options.train));
    entries.emplace_back("relations", quoted(options.relations));
    if (!options.word_vectors.empty()) entries.emplace_back("word-vectors", quoted(options.word_vectors));
    entries.emplace_back("out", quoted(options.out));
    echo_config(options.out, "train", entries);

    out << "bags=" << loaded.bags.size() << '\n'
        << "epochs=" << result.trace.size() << '\n'
        << "final_loss=" << (result.trace.empty() ? 0.0 : result.trace.back().mean_loss) << '\n'
        << "checkpoint=" << (options.out / kCheckpointFile).string() << '\n';
    return kExitOk;
  });
}

int cmd_eval(const EvalOptions& options, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    require_file(options.checkpoint, "checkpoint");
    require_file(options.test, "test");
    const auto ckpt = trainer::load_checkpoint(options.checkpoint);
    if (!options.relations.empty()) {
      require_file(options.relations, "relations");
      trainer::check_relations(ckpt, corpus::RelationMap::load(options.relations));
    }
    corpus::LoadOptions load;
    load.max_distance = ckpt.params.dims.max_distance;
    const auto test =
        corpus::load_corpus(options.test, ckpt.relations, corpus::VocabularyMode::kFrozen, ckpt.vocabulary, load);
    const trainer::Predictor predictor(ckpt.params, ckpt.graph);
    const auto records = eval::collect_predictions(test.bags, predictor);
    const auto curve = eval::pr_curve(records);

    ensure_dir(options.out);
    {
      auto f = open_output(options.out / kPrCurveFile);
      eval::write_pr_csv(f, curve);
    }
    out << std::setprecision(6) << "records=" << records.size() << '\n' << "auc=" << curve.auc << '\n';
    for (std::size_t n : {100, 200, 300}) {
      const std::size_t clamped = std::min(n, records.size());
      out << "P@" << n << '=' << eval::p_at_n(records, clamped) << '\n';
    }
    if (!options.ties.empty()) {
      require_file(options.ties, "ties");
      const auto ties = corpus::PlantedTies::load(options.ties, ckpt.relations);
      const auto report = eval::ties_recovery_report(predictor.relation_embeddings(), ties, ckpt.graph);
      auto f = open_output(options.out / kReportFile);
      eval::write_report(f, report);
      out << "margin=" << report.margin << '\n';
    }
    if (options.export_embeddings) {
      const auto projection = eval::project_embeddings(predictor.relation_embeddings());
      auto f = open_output(options.out / kProjectionFile);
      eval::write_projection(f, projection, ckpt.relations);
    }
    std::vector<std::pair<std::string, std::string>> entries{{"checkpoint", quoted(options.checkpoint)},
                                                             {"test", quoted(options.test)}};
    if (!options.relations.empty()) entries.emplace_back("relations", quoted(options.relations));
    if (!options.ties.empty()) entries.emplace_back("ties", quoted(options.ties));
    entries.emplace_back("export-embeddings", flag(options.export_embeddings));
    entries.emplace_back("out", quoted(options.out));
    echo_config(options.out, "eval", entries);
    return kExitOk;
  });
}

}  // namespace tieforge::cli
