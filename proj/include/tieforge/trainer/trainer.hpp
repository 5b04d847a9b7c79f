#pragma once

#include <functional>
#include <span>
#include <vector>

#include "tieforge/corpus/corpus.hpp"
#include "tieforge/tiesgraph/ties_graph.hpp"
#include "tieforge/trainer/config.hpp"
#include "tieforge/trainer/model.hpp"

namespace tieforge::trainer {

struct LossResult {
  num::Var loss;     // mean NLL + λ·Ω
  num::Var nll;      // mean NLL over the batch
  num::Var penalty;  // Ω
  num::Var h;        // relation embeddings used for the batch
  std::vector<std::vector<double>> logits;
};

// Graph-off replaces P̂ with the identity.
graph::TiesGraph effective_graph(const graph::TiesGraph& graph, const TrainConfig& config);

LossResult forward_loss(num::Tape& tape, std::span<const corpus::TrainingUnit> units,
                        const std::vector<corpus::Bag>& bags, const ModelParams& params,
                        const graph::TiesGraph& graph, double lambda);

struct EpochStats {
  std::size_t epoch = 0;
  double mean_loss = 0.0;
  double mean_nll = 0.0;
  double penalty = 0.0;
};

struct TrainResult {
  ModelParams params;
  graph::TiesGraph graph;  // the graph the model was trained with
  std::vector<EpochStats> trace;
};

using EpochCallback = std::function<void(const EpochStats&)>;

// Mini-batch SGD over per-label training units. Deterministic given
// config.seed. Throws TrainingError on non-finite or exploding loss.
TrainResult train(const std::vector<corpus::Bag>& bags, const TrainConfig& config, const graph::TiesGraph& graph,
                  std::size_t vocab_size, const EpochCallback& on_epoch = {});

// Same, starting from caller-supplied parameters (e.g. pretrained tables).
TrainResult train_from(ModelParams params, const std::vector<corpus::Bag>& bags, const TrainConfig& config,
                       const graph::TiesGraph& graph, const EpochCallback& on_epoch = {});

// Inference with relation embeddings computed once.
class Predictor {
 public:
  Predictor(ModelParams params, graph::TiesGraph graph);

  // Softmax over o_r = b_rᵀh_r + bias_r, b_r attending with query h_r.
  std::vector<double> predict(const corpus::Bag& bag) const;
  const num::Tensor& relation_embeddings() const { return *h_; }
  std::size_t relations() const { return graph_.k; }

 private:
  ModelParams params_;
  graph::TiesGraph graph_;
  num::Var h_;
};

std::vector<double> predict_bag(const corpus::Bag& bag, const ModelParams& params, const graph::TiesGraph& graph);

}  // namespace tieforge::trainer
