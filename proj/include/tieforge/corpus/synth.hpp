#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <vector>

#include "tieforge/corpus/corpus.hpp"

namespace tieforge::corpus {

struct Implication {
  std::size_t from = 0;
  std::size_t to = 0;
  double probability = 1.0;
  friend bool operator==(const Implication&, const Implication&) = default;
};

struct Exclusion {
  std::size_t a = 0;
  std::size_t b = 0;
  friend bool operator==(const Exclusion&, const Exclusion&) = default;
};

struct PlantedTies {
  std::vector<Implication> implications;
  std::vector<Exclusion> exclusions;

  // `IMPLIES<TAB>ri<TAB>rj<TAB>p` and `EXCLUDES<TAB>ri<TAB>rj`, relation names.
  void write(std::ostream& out, const RelationMap& relations) const;
  void save(const std::filesystem::path& path, const RelationMap& relations) const;
  static PlantedTies read(std::istream& in, const RelationMap& relations);
  static PlantedTies load(const std::filesystem::path& path, const RelationMap& relations);

  friend bool operator==(const PlantedTies&, const PlantedTies&) = default;
};

// Generator for corpora with known relation ties. Relation 0 is NA; every
// other relation owns a set of trigger tokens.
struct SynthSpec {
  std::size_t num_relations = 12;
  std::size_t num_bags = 2000;
  std::size_t vocab_size = 30;  // noise tokens
  std::size_t entity_pool = 400;  // distinct entity names
  std::vector<Implication> rules;
  std::vector<Exclusion> exclusions;
  std::size_t triggers_per_relation = 2;
  double na_fraction = 0.3;
  double test_fraction = 0.2;
  std::size_t min_sentences = 1;
  std::size_t max_sentences = 4;
  std::size_t min_length = 5;
  std::size_t max_length = 10;
  // Chance that a sentence of a positive bag carries a trigger of one of the
  // bag's labels.
  double trigger_rate = 0.9;
  // Chance that a sentence of an NA bag carries a random trigger anyway.
  double na_trigger_rate = 0.05;
  // Chance that a positive bag picks up one extra compatible relation.
  double cooccurrence_noise = 0.05;
  std::uint64_t seed = 7;

  // The k=12 benchmark: implications 1→2, 3→4, 5→6, 6→7, 8→9 and exclusions
  // among the resulting clusters.
  static SynthSpec benchmark(std::uint64_t seed = 7);

  // Throws SpecError on out-of-range values or when a rule chain can co-plant
  // an excluded pair.
  void validate() const;
};

struct SynthCorpus {
  RelationMap relations;
  std::vector<CorpusRecord> train;
  std::vector<CorpusRecord> test;
  PlantedTies ties;
  std::size_t train_bags = 0;
  std::size_t test_bags = 0;
  std::size_t na_bags = 0;
};

SynthCorpus generate_synthetic(const SynthSpec& spec);

}  // namespace tieforge::corpus
