#pragma once

#include <cstdint>
#include <vector>

#include "tieforge/encoder/encoder.hpp"
#include "tieforge/numcore/ops.hpp"
#include "tieforge/tiesgraph/ties_graph.hpp"
#include "tieforge/trainer/config.hpp"

namespace tieforge::trainer {

struct ModelDims {
  std::size_t vocab_size = 0;
  std::size_t relations = 0;
  std::size_t word_dim = 50;
  std::size_t pos_dim = 5;
  std::size_t max_distance = 30;
  std::size_t kernel = 3;
  std::size_t feature_maps = 320;
  std::size_t gcn_layers = 2;
  num::Activation activation = num::Activation::kTanh;

  static ModelDims from_config(const TrainConfig& config, std::size_t vocab_size, std::size_t relations);

  std::size_t input_dim() const { return word_dim + 2 * pos_dim; }
  // Relation embeddings share the sentence representation width.
  std::size_t relation_dim() const { return 3 * feature_maps; }
  std::size_t position_count() const { return 2 * max_distance + 1; }

  friend bool operator==(const ModelDims&, const ModelDims&) = default;
};

struct ModelParams {
  ModelDims dims;
  encoder::EmbeddingTables tables;
  encoder::PcnnParams pcnn;
  graph::GcnParams gcn;
  num::Var class_bias;  // k

  // Checkpoint order: word, pos1, pos2, filters, filter bias, H⁰, W⁰…, bias.
  std::vector<num::Var> all() const;
  std::vector<std::string> names() const;
  ModelParams clone() const;
  void zero_grad() const;
};

// All tensors zero-filled with the shapes implied by `dims`.
ModelParams zero_params(const ModelDims& dims);

// Glorot-uniform filters and GCN weights, uniform(−0.25, 0.25) tables and H⁰,
// zero biases.
ModelParams init_params(const ModelDims& dims, std::uint64_t seed);

bool bitwise_equal(const ModelParams& a, const ModelParams& b);

}  // namespace tieforge::trainer
