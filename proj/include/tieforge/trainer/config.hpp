#pragma once

#include <cstdint>
#include <string>

#include <nlohmann/json.hpp>

#include "tieforge/numcore/ops.hpp"

namespace tieforge::trainer {

enum class Precision { kF64, kF32 };

// Defaults for kernel, feature maps, embedding sizes, learning rate, theta,
// lambda and GCN depth are the FDG-RE reference configuration.
struct TrainConfig {
  double learning_rate = 0.19;
  double theta = 0.18;
  double lambda = 0.25;
  std::size_t gcn_layers = 2;
  std::size_t kernel = 3;
  std::size_t feature_maps = 320;
  std::size_t word_dim = 50;
  std::size_t pos_dim = 5;
  std::size_t max_distance = 30;
  std::size_t batch_size = 50;
  std::size_t epochs = 10;
  std::uint64_t seed = 1;
  bool graph_enabled = true;
  bool renormalize = false;
  double clip_norm = 5.0;  // <= 0 disables clipping
  num::Activation activation = num::Activation::kTanh;
  // kF32 rounds parameters to single precision after every update so that
  // 32-bit checkpoints are exact.
  Precision precision = Precision::kF64;
  // Verifies that every parameter gradient is finite after each batch.
  bool debug_checks = false;

  double effective_lambda() const { return graph_enabled ? lambda : 0.0; }
  // Throws ConfigError.
  void validate() const;
};

std::string to_string(num::Activation a);
std::string to_string(Precision p);
num::Activation parse_activation(const std::string& s);
Precision parse_precision(const std::string& s);

void to_json(nlohmann::json& j, const TrainConfig& c);
void from_json(const nlohmann::json& j, TrainConfig& c);

}  // namespace tieforge::trainer
