#include <algorithm>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <doctest.h>

#include "support.hpp"
#include "tieforge/corpus/corpus.hpp"
#include "tieforge/errors.hpp"

using namespace tieforge;
using namespace tieforge::corpus;
using namespace tieforge::testing;

namespace {

RelationMap abc_relations() { return RelationMap({"NA", "rA", "rB", "rC"}); }

CorpusRecord record(const std::string& head, const std::string& tail, std::vector<std::string> relations,
                    std::size_t length = 5, std::size_t head_pos = 0, std::size_t tail_pos = 4) {
  CorpusRecord r;
  r.head = head;
  r.tail = tail;
  for (std::size_t i = 0; i < length; ++i) r.tokens.push_back("tok" + std::to_string(i));
  r.tokens[head_pos] = head;
  r.tokens[tail_pos] = tail;
  r.head_pos = head_pos;
  r.tail_pos = tail_pos;
  r.relations = std::move(relations);
  return r;
}

std::string to_jsonl(const std::vector<CorpusRecord>& records) {
  std::ostringstream out;
  for (const auto& r : records) write_record(out, r);
  return out.str();
}

}  // namespace

TEST_SUITE("corpus") {

TEST_CASE("relation map") {
  std::istringstream in("NA\t0\nrA\t1\nrB\t2\n");
  const auto map = RelationMap::read(in);
  CHECK(map.size() == 3);
  CHECK(map.index("rB") == 2);
  CHECK(map.name(1) == "rA");
  CHECK_THROWS_AS(map.index("nope"), RecordError);
  std::ostringstream out;
  map.write(out);
  std::istringstream again(out.str());
  CHECK(RelationMap::read(again) == map);

  CHECK_THROWS_AS(RelationMap({"rA", "NA"}), RecordError);
  std::istringstream gap("NA\t0\nrA\t2\n");
  CHECK_THROWS_AS(RelationMap::read(gap), RecordError);
  std::istringstream bad("NA 0\n");
  CHECK_THROWS_AS(RelationMap::read(bad), ParseError);
}

TEST_CASE("vocabulary specials are fixed") {
  Vocabulary v;
  CHECK(v.size() == 2);
  CHECK(v.token(kUnkId) == Vocabulary::kUnk);
  CHECK(v.token(kPadId) == Vocabulary::kPad);
  const auto id = v.add("hello");
  CHECK(id == 2);
  CHECK(v.add("hello") == id);
  CHECK(v.lookup("absent") == kUnkId);
  for (std::size_t i = 0; i < v.size(); ++i) CHECK(v.lookup(v.token(i)) == i);
}

TEST_CASE("lines sharing a pair form one bag with the union of labels") {
  const auto rel = abc_relations();
  const auto c = build_bags({record("e1", "e2", {"rA"}), record("e1", "e2", {"rB"})}, rel, VocabularyMode::kBuild);
  REQUIRE(c.bags.size() == 1);
  CHECK(c.bags[0].labels == std::vector<std::size_t>{1, 2});
  CHECK(c.bags[0].sentences.size() == 2);
  CHECK(c.bags[0].bag_id == "e1|e2");
}

TEST_CASE("NA is dropped once a pair has a positive label") {
  const auto rel = abc_relations();
  const auto c = build_bags({record("e1", "e2", {"NA"}), record("e1", "e2", {"rC"}), record("e3", "e4", {"NA"})},
                            rel, VocabularyMode::kBuild);
  REQUIRE(c.bags.size() == 2);
  CHECK(c.bags[0].labels == std::vector<std::size_t>{3});
  CHECK(c.bags[1].labels == std::vector<std::size_t>{kNaRelation});
}

TEST_CASE("frozen vocabulary maps unseen tokens to UNK") {
  const auto rel = abc_relations();
  const auto train = build_bags({record("e1", "e2", {"rA"})}, rel, VocabularyMode::kBuild);
  auto rec = record("e1", "e2", {"rA"});
  rec.tokens[2] = "never-seen";
  const auto test = build_bags({rec}, rel, VocabularyMode::kFrozen, train.vocabulary);
  CHECK(test.bags[0].sentences[0].token_ids[2] == kUnkId);
  CHECK(test.vocabulary == train.vocabulary);
}

TEST_CASE("100 lines over 40 pairs give 40 bags") {
  Rng rng(40);
  std::vector<CorpusRecord> records;
  std::set<std::pair<std::string, std::string>> pairs;
  for (int p = 0; p < 40; ++p) records.push_back(record("h" + std::to_string(p), "t" + std::to_string(p), {"rA"}));
  while (records.size() < 100) {
    const auto p = std::to_string(rng.index(40));
    records.push_back(record("h" + p, "t" + p, {rng.bernoulli(0.5) ? "rB" : "NA"}));
  }
  for (std::size_t i = records.size() - 1; i > 0; --i) std::swap(records[i], records[rng.index(i + 1)]);
  for (const auto& r : records) pairs.insert({r.head, r.tail});

  TempDir dir("corpus40");
  spit(dir / "c.jsonl", to_jsonl(records));
  const auto c = load_corpus(dir / "c.jsonl", abc_relations(), VocabularyMode::kBuild);
  CHECK(c.bags.size() == 40);
  CHECK(c.bags.size() == pairs.size());
  std::size_t sentences = 0;
  for (const auto& b : c.bags) sentences += b.sentences.size();
  CHECK(sentences == 100);
}

TEST_CASE("malformed lines report their line number") {
  const std::string good = to_jsonl({record("a", "b", {"rA"})});
  std::istringstream in(good + "\n" + "{\"head\": \"a\"}\n");
  try {
    parse_records(in);
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.line() == 3);
  }
  std::istringstream garbage("not json\n");
  CHECK_THROWS_AS(parse_records(garbage), ParseError);
}

TEST_CASE("entity mismatch is a record error naming the bag") {
  auto r = record("e1", "e2", {"rA"});
  r.tokens[0] = "someone-else";
  try {
    build_bags({r}, abc_relations(), VocabularyMode::kBuild);
    FAIL("expected a record error");
  } catch (const RecordError& e) {
    CHECK(std::string(e.what()).find("e1|e2") != std::string::npos);
  }
  auto far = record("e1", "e2", {"rA"});
  far.tail_pos = 9;
  CHECK_THROWS_AS(build_bags({far}, abc_relations(), VocabularyMode::kBuild), RecordError);
  CHECK_THROWS_AS(build_bags({record("e1", "e2", {"rZ"})}, abc_relations(), VocabularyMode::kBuild), RecordError);
}

TEST_CASE("encode_positions examples") {
  const auto p = encode_positions(5, 2, 4, 30);
  CHECK(p.pos1 == std::vector<std::size_t>{28, 29, 30, 31, 32});
  CHECK(p.pos2 == std::vector<std::size_t>{26, 27, 28, 29, 30});
  CHECK(p.pos1[2] == 30);
  const auto clipped = encode_positions(60, 50, 0, 30);
  CHECK(clipped.pos1[0] == 0);
  CHECK(clipped.pos2[59] == 60);
}

TEST_CASE("encode_positions stays in range and is shift equivariant") {
  Rng rng(8);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 2 + rng.index(80), d = 1 + rng.index(40);
    const std::size_t h = rng.index(n), t = rng.index(n);
    const auto p = encode_positions(n, h, t, d);
    REQUIRE(p.pos1.size() == n);
    for (std::size_t i = 0; i < n; ++i) {
      CHECK(p.pos1[i] <= 2 * d);
      CHECK(p.pos2[i] <= 2 * d);
    }
    const auto q = encode_positions(n + 1, h + 1, t + 1, d);
    for (std::size_t i = 0; i < n; ++i) {
      CHECK(q.pos1[i + 1] == p.pos1[i]);
      CHECK(q.pos2[i + 1] == p.pos2[i]);
    }
  }
}

TEST_CASE("loaded sentences satisfy the instance invariants") {
  Rng rng(12);
  std::vector<CorpusRecord> records;
  for (int i = 0; i < 60; ++i) {
    const std::size_t len = 2 + rng.index(150);
    const std::size_t h = rng.index(len);
    std::size_t t = h;
    while (t == h || (t > h ? t - h : h - t) >= kDefaultMaxLength) t = rng.index(len);
    records.push_back(record("h" + std::to_string(i % 25), "t" + std::to_string(i % 25), {"rA"}, len, h, t));
  }
  const auto c = build_bags(records, abc_relations(), VocabularyMode::kBuild);
  for (const auto& b : c.bags) {
    CHECK_FALSE(b.sentences.empty());
    CHECK_FALSE(b.labels.empty());
    for (const auto& s : b.sentences) {
      CHECK(s.token_ids.size() <= kDefaultMaxLength);
      CHECK(s.head_pos < s.token_ids.size());
      CHECK(s.tail_pos < s.token_ids.size());
      CHECK(s.pos1_ids.size() == s.token_ids.size());
      CHECK(s.pos2_ids.size() == s.token_ids.size());
      CHECK(c.vocabulary.token(s.token_ids[s.head_pos]) == b.head);
      CHECK(c.vocabulary.token(s.token_ids[s.tail_pos]) == b.tail);
      for (auto id : s.pos1_ids) CHECK(id <= 2 * kDefaultMaxDistance);
    }
  }
}

TEST_CASE("long sentences are truncated around both entities") {
  auto r = record("e1", "e2", {"rA"}, 300, 140, 180);
  LoadOptions opts;
  const auto c = build_bags({r}, abc_relations(), VocabularyMode::kBuild, {}, opts);
  const auto& s = c.bags[0].sentences[0];
  CHECK(s.token_ids.size() == 120);
  CHECK(c.vocabulary.token(s.token_ids[s.head_pos]) == "e1");
  CHECK(c.vocabulary.token(s.token_ids[s.tail_pos]) == "e2");

  auto edge = record("e1", "e2", {"rA"}, 300, 0, 299);
  CHECK_THROWS_AS(build_bags({edge}, abc_relations(), VocabularyMode::kBuild), RecordError);
  auto end = record("e1", "e2", {"rA"}, 300, 290, 299);
  const auto ce = build_bags({end}, abc_relations(), VocabularyMode::kBuild);
  CHECK(ce.vocabulary.token(ce.bags[0].sentences[0].token_ids[ce.bags[0].sentences[0].tail_pos]) == "e2");
}

TEST_CASE("write then reload yields equal bags") {
  Rng rng(77);
  std::vector<CorpusRecord> records;
  const std::vector<std::string> names{"NA", "rA", "rB", "rC"};
  for (int i = 0; i < 80; ++i) {
    const std::size_t len = 2 + rng.index(20);
    std::size_t h = rng.index(len), t = rng.index(len - 1);
    if (t >= h) ++t;
    auto r = record("h" + std::to_string(rng.index(30)), "t" + std::to_string(rng.index(3)),
                    {names[rng.index(4)]}, len, h, t);
    for (std::size_t k = 0; k < len; ++k) {
      if (k != h && k != t) r.tokens[k] = "w" + std::to_string(rng.index(50));
    }
    records.push_back(r);
  }
  const auto rel = abc_relations();
  const auto first = build_bags(records, rel, VocabularyMode::kBuild);
  std::ostringstream out;
  write_corpus(out, first.bags, first.vocabulary, rel);
  std::istringstream in(out.str());
  const auto second = build_bags(parse_records(in), rel, VocabularyMode::kFrozen, first.vocabulary);
  CHECK(second.bags == first.bags);
}

TEST_CASE("expand_training_units") {
  std::vector<Bag> bags(3);
  bags[0].labels = {1};
  bags[1].labels = {1, 2, 3};
  bags[2].labels = {kNaRelation};
  const auto units = expand_training_units(bags);
  REQUIRE(units.size() == 5);
  CHECK(units[1] == TrainingUnit{1, 1});
  CHECK(units[2] == TrainingUnit{1, 2});
  CHECK(units[3] == TrainingUnit{1, 3});
  CHECK(units[4] == TrainingUnit{2, kNaRelation});

  Rng rng(4);
  std::vector<Bag> many(200);
  std::size_t total = 0;
  for (auto& b : many) {
    std::set<std::size_t> labels;
    const std::size_t n = 1 + rng.index(4);
    while (labels.size() < n) labels.insert(rng.index(10));
    b.labels.assign(labels.begin(), labels.end());
    total += b.labels.size();
  }
  CHECK(expand_training_units(many).size() == total);
}

TEST_CASE("pretrained word vectors replace matching rows") {
  Vocabulary v;
  v.add("alpha");
  v.add("beta");
  std::vector<double> table(v.size() * 3, -9.0);
  TempDir dir("vec");
  spit(dir / "v.txt", "3 3\nalpha 1 2 3\ngamma 4 5 6\n");
  CHECK(load_word_vectors(dir / "v.txt", v, 3, table) == 1);
  CHECK(table[2 * 3 + 0] == 1.0);
  CHECK(table[2 * 3 + 2] == 3.0);
  CHECK(table[3 * 3 + 0] == -9.0);
  spit(dir / "bad.txt", "alpha 1 2\n");
  CHECK_THROWS_AS(load_word_vectors(dir / "bad.txt", v, 3, table), ParseError);
}

}  // TEST_SUITE
