#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

namespace tieforge::corpus {

inline constexpr std::size_t kNaRelation = 0;
inline constexpr std::size_t kUnkId = 0;
inline constexpr std::size_t kPadId = 1;
inline constexpr std::size_t kDefaultMaxDistance = 30;
inline constexpr std::size_t kDefaultMaxLength = 120;

// Relation name <-> index. Index 0 is always NA.
class RelationMap {
 public:
  RelationMap() = default;
  explicit RelationMap(std::vector<std::string> names);

  static RelationMap load(const std::filesystem::path& path);
  static RelationMap read(std::istream& in);
  void write(std::ostream& out) const;
  void save(const std::filesystem::path& path) const;

  std::size_t size() const { return names_.size(); }
  const std::string& name(std::size_t index) const { return names_.at(index); }
  const std::vector<std::string>& names() const { return names_; }
  // Throws RecordError for unknown names.
  std::size_t index(const std::string& name) const;
  bool contains(const std::string& name) const { return index_.contains(name); }

  friend bool operator==(const RelationMap& a, const RelationMap& b) { return a.names_ == b.names_; }

 private:
  std::vector<std::string> names_;
  std::unordered_map<std::string, std::size_t> index_;
};

class Vocabulary {
 public:
  static constexpr const char* kUnk = "<unk>";
  static constexpr const char* kPad = "<pad>";

  Vocabulary();
  explicit Vocabulary(const std::vector<std::string>& tokens);

  // Returns the id of `token`, inserting it when absent.
  std::size_t add(const std::string& token);
  // Returns the id of `token`, or UNK when absent.
  std::size_t lookup(const std::string& token) const;
  const std::string& token(std::size_t id) const { return tokens_.at(id); }
  const std::vector<std::string>& tokens() const { return tokens_; }
  std::size_t size() const { return tokens_.size(); }

  friend bool operator==(const Vocabulary& a, const Vocabulary& b) { return a.tokens_ == b.tokens_; }

 private:
  std::unordered_map<std::string, std::size_t> index_;
  std::vector<std::string> tokens_;
};

enum class VocabularyMode {
  kBuild,   // unseen tokens extend the vocabulary (training split)
  kFrozen,  // unseen tokens map to UNK (test split)
};

struct SentenceInstance {
  std::vector<std::size_t> token_ids;
  std::size_t head_pos = 0;
  std::size_t tail_pos = 0;
  std::vector<std::size_t> pos1_ids;
  std::vector<std::size_t> pos2_ids;

  friend bool operator==(const SentenceInstance&, const SentenceInstance&) = default;
};

struct Bag {
  std::string bag_id;
  std::string head;
  std::string tail;
  std::vector<SentenceInstance> sentences;
  // Sorted, unique relation indices; {NA} for negative pairs.
  std::vector<std::size_t> labels;

  bool has_label(std::size_t relation) const;
  friend bool operator==(const Bag&, const Bag&) = default;
};

// One line of the corpus file.
struct CorpusRecord {
  std::string head;
  std::string tail;
  std::vector<std::string> tokens;
  std::size_t head_pos = 0;
  std::size_t tail_pos = 0;
  std::vector<std::string> relations;

  friend bool operator==(const CorpusRecord&, const CorpusRecord&) = default;
};

struct LoadOptions {
  std::size_t max_distance = kDefaultMaxDistance;
  std::size_t max_length = kDefaultMaxLength;
};

struct LoadedCorpus {
  std::vector<Bag> bags;
  Vocabulary vocabulary;
};

std::string make_bag_id(const std::string& head, const std::string& tail);

std::vector<CorpusRecord> parse_records(std::istream& in);
void write_record(std::ostream& out, const CorpusRecord& record);

// Groups records into bags by (head, tail) in order of first appearance.
LoadedCorpus build_bags(const std::vector<CorpusRecord>& records, const RelationMap& relations,
                        VocabularyMode mode, Vocabulary vocabulary = {}, const LoadOptions& options = {});

LoadedCorpus load_corpus(const std::filesystem::path& path, const RelationMap& relations, VocabularyMode mode,
                         Vocabulary vocabulary = {}, const LoadOptions& options = {});

// Writes one line per sentence, each carrying the bag's full label set.
void write_corpus(std::ostream& out, const std::vector<Bag>& bags, const Vocabulary& vocabulary,
                  const RelationMap& relations);

struct PositionIds {
  std::vector<std::size_t> pos1;
  std::vector<std::size_t> pos2;
};

// pos[i] = clip(i − entity, −max_distance, max_distance) + max_distance.
PositionIds encode_positions(std::size_t token_count, std::size_t head_pos, std::size_t tail_pos,
                             std::size_t max_distance = kDefaultMaxDistance);

struct TrainingUnit {
  std::size_t bag_index = 0;
  std::size_t relation = 0;
  friend bool operator==(const TrainingUnit&, const TrainingUnit&) = default;
};

// One unit per (bag, gold label), labels ascending.
std::vector<TrainingUnit> expand_training_units(const std::vector<Bag>& bags);

// Loads `token v1 … vn` lines into rows of `table` (row-major, |V|×dim) for
// tokens present in the vocabulary. Returns the number of rows replaced.
std::size_t load_word_vectors(const std::filesystem::path& path, const Vocabulary& vocabulary, std::size_t dim,
                              std::span<double> table);

}  // namespace tieforge::corpus
