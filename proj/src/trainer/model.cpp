#include "tieforge/trainer/model.hpp"

#include <cmath>
#include <cstring>

#include "tieforge/random.hpp"

namespace tieforge::trainer {

ModelDims ModelDims::from_config(const TrainConfig& config, std::size_t vocab_size, std::size_t relations) {
  ModelDims d;
  d.vocab_size = vocab_size;
  d.relations = relations;
  d.word_dim = config.word_dim;
  d.pos_dim = config.pos_dim;
  d.max_distance = config.max_distance;
  d.kernel = config.kernel;
  d.feature_maps = config.feature_maps;
  d.gcn_layers = config.gcn_layers;
  d.activation = config.activation;
  return d;
}

std::vector<num::Var> ModelParams::all() const {
  std::vector<num::Var> out{tables.word, tables.pos1, tables.pos2, pcnn.filters, pcnn.bias, gcn.h0};
  out.insert(out.end(), gcn.w.begin(), gcn.w.end());
  out.push_back(class_bias);
  return out;
}

std::vector<std::string> ModelParams::names() const {
  std::vector<std::string> out{"word", "pos1", "pos2", "filters", "filter_bias", "h0"};
  for (std::size_t l = 0; l < gcn.w.size(); ++l) out.push_back("w" + std::to_string(l));
  out.push_back("class_bias");
  return out;
}

namespace {

num::Var param(num::Shape shape) { return num::make_var(num::Tensor(std::move(shape)), true); }

num::Var copy_param(const num::Var& v) {
  auto out = num::make_var(num::Tensor(v->shape(), std::vector<double>(v->values().begin(), v->values().end())), true);
  return out;
}

void fill_uniform(const num::Var& v, Rng& rng, double radius) {
  for (double& x : v->values()) x = rng.uniform(-radius, radius);
}

}  // namespace

ModelParams ModelParams::clone() const {
  ModelParams p;
  p.dims = dims;
  p.tables = {copy_param(tables.word), copy_param(tables.pos1), copy_param(tables.pos2)};
  p.pcnn = {copy_param(pcnn.filters), copy_param(pcnn.bias)};
  p.gcn.h0 = copy_param(gcn.h0);
  for (const auto& w : gcn.w) p.gcn.w.push_back(copy_param(w));
  p.class_bias = copy_param(class_bias);
  return p;
}

void ModelParams::zero_grad() const {
  for (const auto& v : all()) v->zero_grad();
}

ModelParams zero_params(const ModelDims& dims) {
  ModelParams p;
  p.dims = dims;
  const std::size_t d = dims.relation_dim();
  p.tables = {param({dims.vocab_size, dims.word_dim}), param({dims.position_count(), dims.pos_dim}),
              param({dims.position_count(), dims.pos_dim})};
  p.pcnn = {param({dims.kernel, dims.input_dim(), dims.feature_maps}), param({dims.feature_maps})};
  p.gcn.h0 = param({dims.relations, d});
  for (std::size_t l = 0; l < dims.gcn_layers; ++l) p.gcn.w.push_back(param({d, d}));
  p.class_bias = param({dims.relations});
  return p;
}

ModelParams init_params(const ModelDims& dims, std::uint64_t seed) {
  ModelParams p = zero_params(dims);
  Rng rng(seed);
  constexpr double kEmbeddingRadius = 0.25;
  fill_uniform(p.tables.word, rng, kEmbeddingRadius);
  fill_uniform(p.tables.pos1, rng, kEmbeddingRadius);
  fill_uniform(p.tables.pos2, rng, kEmbeddingRadius);
  const auto glorot = [](std::size_t fan_in, std::size_t fan_out) {
    return std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  };
  fill_uniform(p.pcnn.filters, rng, glorot(dims.kernel * dims.input_dim(), dims.feature_maps));
  fill_uniform(p.gcn.h0, rng, kEmbeddingRadius);
  const std::size_t d = dims.relation_dim();
  for (const auto& w : p.gcn.w) fill_uniform(w, rng, glorot(d, d));
  return p;
}

bool bitwise_equal(const ModelParams& a, const ModelParams& b) {
  if (!(a.dims == b.dims)) return false;
  const auto va = a.all(), vb = b.all();
  if (va.size() != vb.size()) return false;
  for (std::size_t i = 0; i < va.size(); ++i) {
    if (va[i]->shape() != vb[i]->shape()) return false;
    if (std::memcmp(va[i]->values().data(), vb[i]->values().data(), va[i]->size() * sizeof(double)) != 0) {
      return false;
    }
  }
  return true;
}

}  // namespace tieforge::trainer
