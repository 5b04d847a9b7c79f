#include "tieforge/trainer/trainer.hpp"

#include <cmath>
#include <numeric>
#include <string>

#include <spdlog/spdlog.h>

#include "tieforge/errors.hpp"
#include "tieforge/random.hpp"

namespace tieforge::trainer {
namespace {

constexpr double kDivergenceLimit = 1e6;
constexpr std::uint64_t kShuffleStream = 0x5eed5eed5eedULL;

num::Var encode_bag(num::Tape& tape, const corpus::Bag& bag, const ModelParams& params) {
  if (bag.sentences.empty()) throw ContractError("bag " + bag.bag_id + " has no sentences");
  std::vector<num::Var> reps;
  reps.reserve(bag.sentences.size());
  for (const auto& s : bag.sentences) reps.push_back(encoder::encode_sentence(tape, s, params.tables, params.pcnn));
  return num::stack_rows(tape, reps);
}

double global_grad_norm(const std::vector<num::Var>& params) {
  double sq = 0.0;
  for (const auto& p : params) {
    for (double g : p->grad()) sq += g * g;
  }
  return std::sqrt(sq);
}

}  // namespace

graph::TiesGraph effective_graph(const graph::TiesGraph& graph, const TrainConfig& config) {
  return config.graph_enabled ? graph : graph::identity_graph(graph.k);
}

LossResult forward_loss(num::Tape& tape, std::span<const corpus::TrainingUnit> units,
                        const std::vector<corpus::Bag>& bags, const ModelParams& params,
                        const graph::TiesGraph& graph, double lambda) {
  if (units.empty()) throw ContractError("forward_loss: empty batch");
  if (graph.k != params.dims.relations) {
    throw DimensionError("forward_loss: graph has " + std::to_string(graph.k) + " relations, model " +
                         std::to_string(params.dims.relations));
  }
  LossResult result;
  result.h = graph::gcn_forward(tape, graph, params.gcn, params.dims.activation);
  std::vector<num::Var> nlls;
  nlls.reserve(units.size());
  for (const auto& unit : units) {
    const corpus::Bag& bag = bags.at(unit.bag_index);
    auto stacked = encode_bag(tape, bag, params);
    auto query = num::select_row(tape, result.h, unit.relation);
    auto attended = encoder::bag_attention_stacked(tape, stacked, query);
    auto logits = num::add(tape, num::matmul_bt(tape, attended.bag_rep, result.h), params.class_bias);
    result.logits.emplace_back(logits->values().begin(), logits->values().end());
    nlls.push_back(num::nll_from_logits(tape, logits, unit.relation));
  }
  result.nll = num::scale(tape, num::add_n(tape, nlls), 1.0 / static_cast<double>(units.size()));
  result.penalty = graph::exclusion_penalty(tape, result.h, graph);
  result.loss = num::add(tape, result.nll, num::scale(tape, result.penalty, lambda));
  return result;
}

TrainResult train(const std::vector<corpus::Bag>& bags, const TrainConfig& config, const graph::TiesGraph& graph,
                  std::size_t vocab_size, const EpochCallback& on_epoch) {
  config.validate();
  auto params = init_params(ModelDims::from_config(config, vocab_size, graph.k), config.seed);
  return train_from(std::move(params), bags, config, graph, on_epoch);
}

TrainResult train_from(ModelParams params, const std::vector<corpus::Bag>& bags, const TrainConfig& config,
                       const graph::TiesGraph& graph, const EpochCallback& on_epoch) {
  config.validate();
  TrainResult result{std::move(params), effective_graph(graph, config), {}};
  const double lambda = config.effective_lambda();
  const auto vars = result.params.all();
  if (config.precision == Precision::kF32) {
    for (const auto& v : vars) {
      for (double& x : v->values()) x = static_cast<float>(x);
    }
  }

  auto units = corpus::expand_training_units(bags);
  if (units.empty()) throw TrainingError("no training units");
  Rng shuffle(config.seed ^ kShuffleStream);
  std::size_t batch_id = 0;

  for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    for (std::size_t i = units.size() - 1; i > 0; --i) std::swap(units[i], units[shuffle.index(i + 1)]);
    double loss_sum = 0.0, nll_sum = 0.0, penalty_sum = 0.0;
    std::size_t batches = 0;
    for (std::size_t start = 0; start < units.size(); start += config.batch_size, ++batch_id, ++batches) {
      const std::size_t count = std::min(config.batch_size, units.size() - start);
      num::Tape tape;
      result.params.zero_grad();
      const auto step =
          forward_loss(tape, std::span(units).subspan(start, count), bags, result.params, result.graph, lambda);
      const double loss = step.loss->item();
      if (!std::isfinite(loss) || loss > kDivergenceLimit) {
        throw TrainingError("training diverged at batch " + std::to_string(batch_id) + " (epoch " +
                            std::to_string(epoch) + "): loss " + std::to_string(loss) +
                            (batches ? ", last finite epoch-mean " + std::to_string(loss_sum / batches) : ""));
      }
      tape.backward(step.loss);

      if (config.debug_checks) {
        const auto names = result.params.names();
        for (std::size_t v = 0; v < vars.size(); ++v) {
          if (!vars[v]->all_finite()) {
            throw TrainingError("non-finite gradient in " + names[v] + " at batch " + std::to_string(batch_id));
          }
        }
      }

      double rate = config.learning_rate;
      if (config.clip_norm > 0.0) {
        const double norm = global_grad_norm(vars);
        if (norm > config.clip_norm) rate *= config.clip_norm / norm;
      }
      for (const auto& v : vars) {
        auto values = v->values();
        const auto grad = v->grad();
        for (std::size_t i = 0; i < values.size(); ++i) values[i] -= rate * grad[i];
        if (config.precision == Precision::kF32) {
          for (double& x : values) x = static_cast<float>(x);
        }
      }

      loss_sum += loss;
      nll_sum += step.nll->item();
      penalty_sum += step.penalty->item();
    }
    EpochStats stats{epoch, loss_sum / static_cast<double>(batches), nll_sum / static_cast<double>(batches),
                     penalty_sum / static_cast<double>(batches)};
    spdlog::debug("epoch {} loss {:.6f} nll {:.6f} penalty {:.6g}", epoch, stats.mean_loss, stats.mean_nll,
                  stats.penalty);
    result.trace.push_back(stats);
    if (on_epoch) on_epoch(stats);
  }
  for (const auto& v : vars) v->drop_grad();
  return result;
}

Predictor::Predictor(ModelParams params, graph::TiesGraph graph)
    : params_(std::move(params)), graph_(std::move(graph)) {
  if (graph_.k != params_.dims.relations) {
    throw DimensionError("Predictor: graph has " + std::to_string(graph_.k) + " relations, model " +
                         std::to_string(params_.dims.relations));
  }
  num::Tape tape(false);
  h_ = graph::gcn_forward(tape, graph_, params_.gcn, params_.dims.activation);
}

std::vector<double> Predictor::predict(const corpus::Bag& bag) const {
  num::Tape tape(false);
  auto stacked = encode_bag(tape, bag, params_);
  const std::size_t k = graph_.k;
  auto scores = std::make_shared<num::Tensor>(num::Shape{k});
  for (std::size_t r = 0; r < k; ++r) {
    auto query = num::select_row(tape, h_, r);
    auto attended = encoder::bag_attention_stacked(tape, stacked, query);
    (*scores)[r] = num::matmul_bt(tape, attended.bag_rep, query)->item() + (*params_.class_bias)[r];
  }
  auto probs = num::softmax_row(tape, scores);
  return {probs->values().begin(), probs->values().end()};
}

std::vector<double> predict_bag(const corpus::Bag& bag, const ModelParams& params, const graph::TiesGraph& graph) {
  return Predictor(params, graph).predict(bag);
}

}  // namespace tieforge::trainer
