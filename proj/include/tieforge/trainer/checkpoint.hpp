#pragma once

#include <filesystem>

#include "tieforge/corpus/corpus.hpp"
#include "tieforge/tiesgraph/ties_graph.hpp"
#include "tieforge/trainer/config.hpp"
#include "tieforge/trainer/model.hpp"

namespace tieforge::trainer {

inline constexpr int kCheckpointVersion = 1;

struct Checkpoint {
  TrainConfig config;
  ModelParams params;
  graph::TiesGraph graph;
  corpus::RelationMap relations;
  corpus::Vocabulary vocabulary;
};

// Layout: a magic line, one JSON header line (version, dtype, k, d, dims,
// config, relations, vocabulary, graph, block shapes), then the parameter
// blocks as little-endian floats of the header's dtype.
void save_checkpoint(const std::filesystem::path& path, const Checkpoint& checkpoint);
// Throws CheckpointError on bad magic, version, dimensions or size.
Checkpoint load_checkpoint(const std::filesystem::path& path);

// Throws CheckpointError when the relation mapping disagrees with the model.
void check_relations(const Checkpoint& checkpoint, const corpus::RelationMap& relations);

}  // namespace tieforge::trainer
