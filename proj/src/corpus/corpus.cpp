#include "tieforge/corpus/corpus.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <sstream>

#include <nlohmann/json.hpp>

#include "tieforge/errors.hpp"

namespace tieforge::corpus {

using nlohmann::json;

RelationMap::RelationMap(std::vector<std::string> names) : names_(std::move(names)) {
  if (names_.empty() || names_.front() != "NA") throw RecordError("relation map must list NA at index 0");
  for (std::size_t i = 0; i < names_.size(); ++i) {
    if (!index_.emplace(names_[i], i).second) throw RecordError("duplicate relation name '" + names_[i] + "'");
  }
}

RelationMap RelationMap::read(std::istream& in) {
  std::vector<std::pair<std::size_t, std::string>> entries;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos) throw ParseError("expected name<TAB>index", line_no);
    std::size_t index = 0;
    try {
      std::size_t used = 0;
      index = std::stoul(line.substr(tab + 1), &used);
      if (used != line.size() - tab - 1) throw std::invalid_argument("trailing characters");
    } catch (const std::exception&) {
      throw ParseError("bad relation index '" + line.substr(tab + 1) + "'", line_no);
    }
    entries.emplace_back(index, line.substr(0, tab));
  }
  std::sort(entries.begin(), entries.end());
  std::vector<std::string> names;
  for (std::size_t i = 0; i < entries.size(); ++i) {
    if (entries[i].first != i) throw RecordError("relation indices must be contiguous from 0");
    names.push_back(entries[i].second);
  }
  return RelationMap(std::move(names));
}

RelationMap RelationMap::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open relation map " + path.string());
  return read(in);
}

void RelationMap::write(std::ostream& out) const {
  for (std::size_t i = 0; i < names_.size(); ++i) out << names_[i] << '\t' << i << '\n';
}

void RelationMap::save(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw Error("cannot write relation map " + path.string());
  write(out);
}

std::size_t RelationMap::index(const std::string& name) const {
  auto it = index_.find(name);
  if (it == index_.end()) throw RecordError("unknown relation '" + name + "'");
  return it->second;
}

Vocabulary::Vocabulary() : Vocabulary(std::vector<std::string>{kUnk, kPad}) {}

Vocabulary::Vocabulary(const std::vector<std::string>& tokens) {
  if (tokens.size() < 2 || tokens[kUnkId] != kUnk || tokens[kPadId] != kPad) {
    throw RecordError("vocabulary must start with <unk>, <pad>");
  }
  for (const auto& t : tokens) {
    if (index_.contains(t)) throw RecordError("duplicate vocabulary token '" + t + "'");
    add(t);
  }
}

std::size_t Vocabulary::add(const std::string& token) {
  auto [it, inserted] = index_.emplace(token, tokens_.size());
  if (inserted) tokens_.push_back(token);
  return it->second;
}

std::size_t Vocabulary::lookup(const std::string& token) const {
  auto it = index_.find(token);
  return it == index_.end() ? kUnkId : it->second;
}

bool Bag::has_label(std::size_t relation) const {
  return std::binary_search(labels.begin(), labels.end(), relation);
}

std::string make_bag_id(const std::string& head, const std::string& tail) { return head + "|" + tail; }

std::vector<CorpusRecord> parse_records(std::istream& in) {
  std::vector<CorpusRecord> records;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const json j = json::parse(line);
      CorpusRecord r;
      r.head = j.at("head").get<std::string>();
      r.tail = j.at("tail").get<std::string>();
      r.tokens = j.at("tokens").get<std::vector<std::string>>();
      r.head_pos = j.at("head_pos").get<std::size_t>();
      r.tail_pos = j.at("tail_pos").get<std::size_t>();
      r.relations = j.at("relations").get<std::vector<std::string>>();
      records.push_back(std::move(r));
    } catch (const json::exception& e) {
      throw ParseError(std::string("malformed record: ") + e.what(), line_no);
    }
  }
  return records;
}

void write_record(std::ostream& out, const CorpusRecord& r) {
  json j;
  j["head"] = r.head;
  j["tail"] = r.tail;
  j["tokens"] = r.tokens;
  j["head_pos"] = r.head_pos;
  j["tail_pos"] = r.tail_pos;
  j["relations"] = r.relations;
  out << j.dump() << '\n';
}

PositionIds encode_positions(std::size_t token_count, std::size_t head_pos, std::size_t tail_pos,
                             std::size_t max_distance) {
  const auto clip = [max_distance](std::size_t i, std::size_t entity) {
    const auto offset = static_cast<std::ptrdiff_t>(i) - static_cast<std::ptrdiff_t>(entity);
    const auto limit = static_cast<std::ptrdiff_t>(max_distance);
    return static_cast<std::size_t>(std::clamp(offset, -limit, limit) + limit);
  };
  PositionIds ids;
  ids.pos1.reserve(token_count);
  ids.pos2.reserve(token_count);
  for (std::size_t i = 0; i < token_count; ++i) {
    ids.pos1.push_back(clip(i, head_pos));
    ids.pos2.push_back(clip(i, tail_pos));
  }
  return ids;
}

namespace {

SentenceInstance make_instance(const CorpusRecord& r, const std::string& bag_id, Vocabulary& vocab,
                               VocabularyMode mode, const LoadOptions& options) {
  if (r.head_pos >= r.tokens.size() || r.tail_pos >= r.tokens.size()) {
    throw RecordError("bag " + bag_id + ": entity position outside sentence of " + std::to_string(r.tokens.size()) +
                      " tokens");
  }
  if (r.tokens[r.head_pos] != r.head) throw RecordError("bag " + bag_id + ": head entity not found at head_pos");
  if (r.tokens[r.tail_pos] != r.tail) throw RecordError("bag " + bag_id + ": tail entity not found at tail_pos");

  std::size_t begin = 0, count = r.tokens.size();
  if (count > options.max_length) {
    const std::size_t lo = std::min(r.head_pos, r.tail_pos), hi = std::max(r.head_pos, r.tail_pos);
    const std::size_t span = hi - lo + 1;
    if (span > options.max_length) {
      throw RecordError("bag " + bag_id + ": entities " + std::to_string(span) +
                        " tokens apart cannot fit the length cap of " + std::to_string(options.max_length));
    }
    const std::size_t slack = (options.max_length - span) / 2;
    begin = std::min(lo - std::min(lo, slack), r.tokens.size() - options.max_length);
    count = options.max_length;
  }

  SentenceInstance s;
  s.head_pos = r.head_pos - begin;
  s.tail_pos = r.tail_pos - begin;
  s.token_ids.reserve(count);
  for (std::size_t i = begin; i < begin + count; ++i) {
    s.token_ids.push_back(mode == VocabularyMode::kBuild ? vocab.add(r.tokens[i]) : vocab.lookup(r.tokens[i]));
  }
  auto pos = encode_positions(count, s.head_pos, s.tail_pos, options.max_distance);
  s.pos1_ids = std::move(pos.pos1);
  s.pos2_ids = std::move(pos.pos2);
  return s;
}

}  // namespace

LoadedCorpus build_bags(const std::vector<CorpusRecord>& records, const RelationMap& relations,
                        VocabularyMode mode, Vocabulary vocabulary, const LoadOptions& options) {
  LoadedCorpus out{{}, std::move(vocabulary)};
  std::map<std::pair<std::string, std::string>, std::size_t> by_pair;
  for (const auto& r : records) {
    auto [it, inserted] = by_pair.emplace(std::make_pair(r.head, r.tail), out.bags.size());
    if (inserted) {
      Bag bag;
      bag.bag_id = make_bag_id(r.head, r.tail);
      bag.head = r.head;
      bag.tail = r.tail;
      out.bags.push_back(std::move(bag));
    }
    Bag& bag = out.bags[it->second];
    bag.sentences.push_back(make_instance(r, bag.bag_id, out.vocabulary, mode, options));
    for (const auto& name : r.relations) bag.labels.push_back(relations.index(name));
  }
  for (Bag& bag : out.bags) {
    std::sort(bag.labels.begin(), bag.labels.end());
    bag.labels.erase(std::unique(bag.labels.begin(), bag.labels.end()), bag.labels.end());
    // A pair with any positive fact is not a negative pair.
    if (bag.labels.size() > 1 && bag.labels.front() == kNaRelation) bag.labels.erase(bag.labels.begin());
    if (bag.labels.empty()) bag.labels.push_back(kNaRelation);
  }
  return out;
}

LoadedCorpus load_corpus(const std::filesystem::path& path, const RelationMap& relations, VocabularyMode mode,
                         Vocabulary vocabulary, const LoadOptions& options) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open corpus " + path.string());
  return build_bags(parse_records(in), relations, mode, std::move(vocabulary), options);
}

void write_corpus(std::ostream& out, const std::vector<Bag>& bags, const Vocabulary& vocabulary,
                  const RelationMap& relations) {
  for (const Bag& bag : bags) {
    for (const SentenceInstance& s : bag.sentences) {
      CorpusRecord r;
      r.head = bag.head;
      r.tail = bag.tail;
      for (std::size_t id : s.token_ids) r.tokens.push_back(vocabulary.token(id));
      r.head_pos = s.head_pos;
      r.tail_pos = s.tail_pos;
      for (std::size_t label : bag.labels) r.relations.push_back(relations.name(label));
      write_record(out, r);
    }
  }
}

std::vector<TrainingUnit> expand_training_units(const std::vector<Bag>& bags) {
  std::vector<TrainingUnit> units;
  for (std::size_t b = 0; b < bags.size(); ++b) {
    for (std::size_t label : bags[b].labels) units.push_back({b, label});
  }
  return units;
}

std::size_t load_word_vectors(const std::filesystem::path& path, const Vocabulary& vocabulary, std::size_t dim,
                              std::span<double> table) {
  if (table.size() != vocabulary.size() * dim) {
    throw DimensionError("word table holds " + std::to_string(table.size()) + " values, expected " +
                         std::to_string(vocabulary.size() * dim));
  }
  std::ifstream in(path);
  if (!in) throw Error("cannot open word vectors " + path.string());
  std::size_t replaced = 0, line_no = 0;
  std::string line;
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream fields(line);
    std::string token;
    if (!(fields >> token)) continue;
    std::vector<double> vec;
    double v;
    while (fields >> v) vec.push_back(v);
    if (line_no == 1 && vec.size() == 1) continue;  // word2vec "count dim" header
    if (vec.size() != dim) {
      throw ParseError("expected " + std::to_string(dim) + " components, got " + std::to_string(vec.size()), line_no);
    }
    const std::size_t id = vocabulary.lookup(token);
    if (id == kUnkId && token != Vocabulary::kUnk) continue;
    std::copy(vec.begin(), vec.end(), table.begin() + static_cast<std::ptrdiff_t>(id * dim));
    ++replaced;
  }
  return replaced;
}

}  // namespace tieforge::corpus
