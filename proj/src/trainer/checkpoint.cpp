#include "tieforge/trainer/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <sstream>

#include <nlohmann/json.hpp>

#include "tieforge/errors.hpp"

namespace tieforge::trainer {
namespace {

using nlohmann::json;

constexpr const char* kMagic = "TIEFORGE-CHECKPOINT";

static_assert(std::endian::native == std::endian::little, "checkpoint I/O assumes a little-endian host");

json dims_to_json(const ModelDims& d) {
  return {{"vocab_size", d.vocab_size},     {"relations", d.relations}, {"word_dim", d.word_dim},
          {"pos_dim", d.pos_dim},           {"max_distance", d.max_distance}, {"kernel", d.kernel},
          {"feature_maps", d.feature_maps}, {"gcn_layers", d.gcn_layers}, {"activation", to_string(d.activation)}};
}

ModelDims dims_from_json(const json& j) {
  ModelDims d;
  j.at("vocab_size").get_to(d.vocab_size);
  j.at("relations").get_to(d.relations);
  j.at("word_dim").get_to(d.word_dim);
  j.at("pos_dim").get_to(d.pos_dim);
  j.at("max_distance").get_to(d.max_distance);
  j.at("kernel").get_to(d.kernel);
  j.at("feature_maps").get_to(d.feature_maps);
  j.at("gcn_layers").get_to(d.gcn_layers);
  d.activation = parse_activation(j.at("activation").get<std::string>());
  return d;
}

}  // namespace

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt) {
  const auto& dims = ckpt.params.dims;
  if (ckpt.relations.size() != dims.relations || ckpt.graph.k != dims.relations ||
      ckpt.vocabulary.size() != dims.vocab_size) {
    throw CheckpointError("checkpoint parts disagree on relation or vocabulary size");
  }
  const bool f32 = ckpt.config.precision == Precision::kF32;
  const auto vars = ckpt.params.all();
  const auto names = ckpt.params.names();

  json blocks = json::array();
  for (std::size_t i = 0; i < vars.size(); ++i) blocks.push_back({{"name", names[i]}, {"shape", vars[i]->shape()}});
  json header{{"format_version", kCheckpointVersion},
              {"dtype", f32 ? "f32" : "f64"},
              {"k", dims.relations},
              {"d", dims.relation_dim()},
              {"dims", dims_to_json(dims)},
              {"config", ckpt.config},
              {"relations", ckpt.relations.names()},
              {"vocabulary", ckpt.vocabulary.tokens()},
              {"graph", {{"n", ckpt.graph.n}, {"m", ckpt.graph.m}, {"p_hat", ckpt.graph.p_hat}, {"u", ckpt.graph.u}}},
              {"blocks", blocks}};

  std::string body;
  for (const auto& v : vars) {
    for (double x : v->values()) {
      if (f32) {
        const float f = static_cast<float>(x);
        body.append(reinterpret_cast<const char*>(&f), sizeof f);
      } else {
        body.append(reinterpret_cast<const char*>(&x), sizeof x);
      }
    }
  }

  // Written to a sibling file first so a failed save never leaves a torn file.
  const auto tmp = std::filesystem::path(path.string() + ".tmp");
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw CheckpointError("cannot write checkpoint " + path.string());
    out << kMagic << '\n' << header.dump() << '\n';
    out.write(body.data(), static_cast<std::streamsize>(body.size()));
    if (!out) throw CheckpointError("short write to " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CheckpointError("cannot open checkpoint " + path.string());
  const std::string data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());

  const auto magic_end = data.find('\n');
  if (magic_end == std::string::npos || data.compare(0, magic_end, kMagic) != 0) {
    throw CheckpointError(path.string() + " is not a checkpoint");
  }
  const auto header_end = data.find('\n', magic_end + 1);
  if (header_end == std::string::npos) throw CheckpointError("truncated checkpoint header in " + path.string());

  json header;
  try {
    header = json::parse(data.substr(magic_end + 1, header_end - magic_end - 1));
  } catch (const json::exception& e) {
    throw CheckpointError(std::string("corrupt checkpoint header: ") + e.what());
  }

  Checkpoint ckpt;
  try {
    const int version = header.at("format_version").get<int>();
    if (version != kCheckpointVersion) {
      throw CheckpointError("checkpoint format version " + std::to_string(version) + ", expected " +
                            std::to_string(kCheckpointVersion));
    }
    const std::string dtype = header.at("dtype").get<std::string>();
    if (dtype != "f32" && dtype != "f64") throw CheckpointError("unknown checkpoint dtype '" + dtype + "'");
    ckpt.config = header.at("config").get<TrainConfig>();
    const ModelDims dims = dims_from_json(header.at("dims"));
    if (header.at("k").get<std::size_t>() != dims.relations || header.at("d").get<std::size_t>() != dims.relation_dim()) {
      throw CheckpointError("checkpoint header k/d disagree with its dimensions");
    }
    ckpt.relations = corpus::RelationMap(header.at("relations").get<std::vector<std::string>>());
    ckpt.vocabulary = corpus::Vocabulary(header.at("vocabulary").get<std::vector<std::string>>());
    if (ckpt.relations.size() != dims.relations || ckpt.vocabulary.size() != dims.vocab_size) {
      throw CheckpointError("checkpoint relation or vocabulary list disagrees with its dimensions");
    }
    const auto& g = header.at("graph");
    ckpt.graph.k = dims.relations;
    g.at("n").get_to(ckpt.graph.n);
    g.at("m").get_to(ckpt.graph.m);
    g.at("p_hat").get_to(ckpt.graph.p_hat);
    g.at("u").get_to(ckpt.graph.u);
    const std::size_t kk = dims.relations * dims.relations;
    if (ckpt.graph.n.size() != dims.relations || ckpt.graph.m.size() != kk || ckpt.graph.p_hat.size() != kk ||
        ckpt.graph.u.size() != kk) {
      throw CheckpointError("checkpoint graph has wrong dimensions");
    }

    ModelParams params = zero_params(dims);
    const auto vars = params.all();
    const auto& blocks = header.at("blocks");
    if (blocks.size() != vars.size()) throw CheckpointError("checkpoint block count mismatch");
    std::size_t expected = 0;
    const std::size_t width = dtype == "f32" ? sizeof(float) : sizeof(double);
    for (std::size_t i = 0; i < vars.size(); ++i) {
      if (blocks[i].at("shape").get<num::Shape>() != vars[i]->shape()) {
        throw CheckpointError("checkpoint block " + blocks[i].at("name").get<std::string>() + " has shape " +
                              num::shape_string(blocks[i].at("shape").get<num::Shape>()) + ", expected " +
                              num::shape_string(vars[i]->shape()));
      }
      expected += vars[i]->size() * width;
    }
    const std::size_t available = data.size() - header_end - 1;
    if (available != expected) {
      throw CheckpointError("checkpoint body holds " + std::to_string(available) + " bytes, expected " +
                            std::to_string(expected) + (available < expected ? " (truncated)" : ""));
    }
    const char* cursor = data.data() + header_end + 1;
    for (const auto& v : vars) {
      for (double& x : v->values()) {
        if (width == sizeof(float)) {
          float f;
          std::memcpy(&f, cursor, sizeof f);
          x = f;
        } else {
          std::memcpy(&x, cursor, sizeof x);
        }
        cursor += width;
      }
    }
    ckpt.params = std::move(params);
  } catch (const json::exception& e) {
    throw CheckpointError(std::string("corrupt checkpoint header: ") + e.what());
  } catch (const CheckpointError&) {
    throw;
  } catch (const Error& e) {
    throw CheckpointError(std::string("invalid checkpoint: ") + e.what());
  }
  return ckpt;
}

void check_relations(const Checkpoint& ckpt, const corpus::RelationMap& relations) {
  if (relations.size() != ckpt.params.dims.relations) {
    throw CheckpointError("dimension mismatch: checkpoint has k=" + std::to_string(ckpt.params.dims.relations) +
                          " relations, mapping has k=" + std::to_string(relations.size()));
  }
  if (!(relations == ckpt.relations)) throw CheckpointError("relation names differ from the checkpoint's mapping");
}

}  // namespace tieforge::trainer
