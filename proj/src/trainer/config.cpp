#include "tieforge/trainer/config.hpp"

#include "tieforge/errors.hpp"

namespace tieforge::trainer {

void TrainConfig::validate() const {
  const auto fail = [](const std::string& m) { throw ConfigError(m); };
  if (!(learning_rate > 0.0)) fail("learning_rate must be positive");
  if (!(theta >= 0.0 && theta < 1.0)) fail("theta must lie in [0,1)");
  if (!(lambda >= 0.0)) fail("lambda must be non-negative");
  if (gcn_layers == 0) fail("gcn_layers must be at least 1");
  if (kernel == 0 || kernel % 2 == 0) fail("kernel must be odd");
  if (feature_maps == 0 || word_dim == 0 || pos_dim == 0) fail("layer sizes must be positive");
  if (max_distance == 0) fail("max_distance must be positive");
  if (batch_size == 0) fail("batch_size must be positive");
}

std::string to_string(num::Activation a) { return a == num::Activation::kTanh ? "tanh" : "relu"; }
std::string to_string(Precision p) { return p == Precision::kF64 ? "f64" : "f32"; }

num::Activation parse_activation(const std::string& s) {
  if (s == "tanh") return num::Activation::kTanh;
  if (s == "relu") return num::Activation::kRelu;
  throw ConfigError("unknown activation '" + s + "'");
}

Precision parse_precision(const std::string& s) {
  if (s == "f64") return Precision::kF64;
  if (s == "f32") return Precision::kF32;
  throw ConfigError("unknown precision '" + s + "'");
}

void to_json(nlohmann::json& j, const TrainConfig& c) {
  j = nlohmann::json{{"learning_rate", c.learning_rate},
                     {"theta", c.theta},
                     {"lambda", c.lambda},
                     {"gcn_layers", c.gcn_layers},
                     {"kernel", c.kernel},
                     {"feature_maps", c.feature_maps},
                     {"word_dim", c.word_dim},
                     {"pos_dim", c.pos_dim},
                     {"max_distance", c.max_distance},
                     {"batch_size", c.batch_size},
                     {"epochs", c.epochs},
                     {"seed", c.seed},
                     {"graph_enabled", c.graph_enabled},
                     {"renormalize", c.renormalize},
                     {"clip_norm", c.clip_norm},
                     {"activation", to_string(c.activation)},
                     {"precision", to_string(c.precision)},
                     {"debug_checks", c.debug_checks}};
}

void from_json(const nlohmann::json& j, TrainConfig& c) {
  j.at("learning_rate").get_to(c.learning_rate);
  j.at("theta").get_to(c.theta);
  j.at("lambda").get_to(c.lambda);
  j.at("gcn_layers").get_to(c.gcn_layers);
  j.at("kernel").get_to(c.kernel);
  j.at("feature_maps").get_to(c.feature_maps);
  j.at("word_dim").get_to(c.word_dim);
  j.at("pos_dim").get_to(c.pos_dim);
  j.at("max_distance").get_to(c.max_distance);
  j.at("batch_size").get_to(c.batch_size);
  j.at("epochs").get_to(c.epochs);
  j.at("seed").get_to(c.seed);
  j.at("graph_enabled").get_to(c.graph_enabled);
  j.at("renormalize").get_to(c.renormalize);
  j.at("clip_norm").get_to(c.clip_norm);
  c.activation = parse_activation(j.at("activation").get<std::string>());
  c.precision = parse_precision(j.at("precision").get<std::string>());
  j.at("debug_checks").get_to(c.debug_checks);
}

}  // namespace tieforge::trainer
