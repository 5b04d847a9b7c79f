#include "tieforge/corpus/synth.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <set>
#include <sstream>

#include "tieforge/errors.hpp"
#include "tieforge/random.hpp"

namespace tieforge::corpus {

void PlantedTies::write(std::ostream& out, const RelationMap& relations) const {
  for (const auto& r : implications) {
    char p[32];
    const auto res = std::to_chars(p, p + sizeof p, r.probability);
    out << "IMPLIES\t" << relations.name(r.from) << '\t' << relations.name(r.to) << '\t'
        << std::string_view(p, static_cast<std::size_t>(res.ptr - p)) << '\n';
  }
  for (const auto& e : exclusions) {
    out << "EXCLUDES\t" << relations.name(e.a) << '\t' << relations.name(e.b) << '\n';
  }
}

void PlantedTies::save(const std::filesystem::path& path, const RelationMap& relations) const {
  std::ofstream out(path);
  if (!out) throw Error("cannot write ties file " + path.string());
  write(out, relations);
}

PlantedTies PlantedTies::read(std::istream& in, const RelationMap& relations) {
  PlantedTies ties;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::istringstream fields(line);
    for (std::string part; std::getline(fields, part, '\t');) f.push_back(part);
    try {
      if (f.size() == 4 && f[0] == "IMPLIES") {
        ties.implications.push_back({relations.index(f[1]), relations.index(f[2]), std::stod(f[3])});
      } else if (f.size() == 3 && f[0] == "EXCLUDES") {
        ties.exclusions.push_back({relations.index(f[1]), relations.index(f[2])});
      } else {
        throw ParseError("expected IMPLIES or EXCLUDES record", line_no);
      }
    } catch (const RecordError& e) {
      throw ParseError(e.what(), line_no);
    } catch (const std::invalid_argument&) {
      throw ParseError("bad probability '" + f.back() + "'", line_no);
    }
  }
  return ties;
}

PlantedTies PlantedTies::load(const std::filesystem::path& path, const RelationMap& relations) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open ties file " + path.string());
  return read(in, relations);
}

SynthSpec SynthSpec::benchmark(std::uint64_t seed) {
  SynthSpec spec;
  spec.seed = seed;
  spec.rules = {{1, 2, 1.0}, {3, 4, 0.9}, {5, 6, 1.0}, {6, 7, 0.8}, {8, 9, 0.9}};
  spec.exclusions = {{1, 3}, {1, 5}, {2, 4}, {2, 6}, {3, 5}, {4, 7}, {1, 8}, {5, 8}, {7, 9}, {10, 11}};
  return spec;
}

namespace {

// Relations reachable from `start` through rules, including `start`.
std::vector<bool> rule_closure(const SynthSpec& spec, std::size_t start) {
  std::vector<bool> seen(spec.num_relations, false);
  std::vector<std::size_t> stack{start};
  seen[start] = true;
  while (!stack.empty()) {
    const std::size_t at = stack.back();
    stack.pop_back();
    for (const auto& rule : spec.rules) {
      if (rule.from == at && rule.probability > 0.0 && !seen[rule.to]) {
        seen[rule.to] = true;
        stack.push_back(rule.to);
      }
    }
  }
  return seen;
}

std::string relation_name(std::size_t r) {
  std::ostringstream s;
  s << "rel_" << std::setw(2) << std::setfill('0') << r;
  return s.str();
}

std::string trigger_token(std::size_t r, std::size_t i) {
  return "trig_" + std::to_string(r) + "_" + std::to_string(i);
}

}  // namespace

void SynthSpec::validate() const {
  const auto fail = [](const std::string& m) { throw SpecError(m); };
  if (num_relations < 2) fail("need at least NA plus one relation");
  if (num_bags < 2) fail("need at least two bags");
  if (vocab_size == 0) fail("vocab_size must be positive");
  if (entity_pool < 2) fail("entity_pool must hold at least two entities");
  // Pairs are drawn by rejection, so leave room for at least half of them to be free.
  if (num_bags > entity_pool * (entity_pool - 1) / 2) fail("entity_pool too small for num_bags distinct pairs");
  if (triggers_per_relation == 0) fail("triggers_per_relation must be positive");
  if (min_sentences == 0 || min_sentences > max_sentences) fail("bad sentence count range");
  if (min_length < 2 || min_length > max_length) fail("bad sentence length range (min 2 for two entities)");
  const auto unit = [&](double p, const char* name) {
    if (!(p >= 0.0 && p <= 1.0)) fail(std::string(name) + " must lie in [0,1]");
  };
  unit(na_fraction, "na_fraction");
  unit(test_fraction, "test_fraction");
  unit(trigger_rate, "trigger_rate");
  unit(na_trigger_rate, "na_trigger_rate");
  unit(cooccurrence_noise, "cooccurrence_noise");
  if (test_fraction == 0.0 || test_fraction == 1.0) fail("test_fraction must leave both splits nonempty");
  const auto relation = [&](std::size_t r) {
    if (r == kNaRelation || r >= num_relations) fail("rule or exclusion references invalid relation " + std::to_string(r));
  };
  for (const auto& rule : rules) {
    relation(rule.from);
    relation(rule.to);
    if (rule.from == rule.to) fail("rule implies itself");
    unit(rule.probability, "rule probability");
  }
  for (const auto& e : exclusions) {
    relation(e.a);
    relation(e.b);
    if (e.a == e.b) fail("relation excluded with itself");
  }
  for (std::size_t r = 1; r < num_relations; ++r) {
    const auto reach = rule_closure(*this, r);
    for (const auto& e : exclusions) {
      if (reach[e.a] && reach[e.b]) {
        fail("rules starting at " + relation_name(r) + " can co-plant excluded pair (" + relation_name(e.a) + ", " +
             relation_name(e.b) + ")");
      }
    }
  }
}

SynthCorpus generate_synthetic(const SynthSpec& spec) {
  spec.validate();
  Rng rng(spec.seed);

  std::vector<std::string> names{"NA"};
  for (std::size_t r = 1; r < spec.num_relations; ++r) names.push_back(relation_name(r));

  SynthCorpus out{RelationMap(names), {}, {}, {spec.rules, spec.exclusions}, 0, 0, 0};

  std::vector<std::size_t> order(spec.num_bags);
  std::iota(order.begin(), order.end(), 0);
  for (std::size_t i = order.size() - 1; i > 0; --i) std::swap(order[i], order[rng.index(i + 1)]);
  const auto test_count = std::clamp<std::size_t>(
      static_cast<std::size_t>(static_cast<double>(spec.num_bags) * spec.test_fraction + 0.5), 1, spec.num_bags - 1);
  std::vector<bool> is_test(spec.num_bags, false);
  for (std::size_t i = 0; i < test_count; ++i) is_test[order[i]] = true;

  std::set<std::pair<std::size_t, std::size_t>> used_pairs;
  for (std::size_t b = 0; b < spec.num_bags; ++b) {
    std::vector<std::size_t> labels;
    if (rng.bernoulli(spec.na_fraction)) {
      labels.push_back(kNaRelation);
      ++out.na_bags;
    } else {
      const std::size_t seed_relation = 1 + rng.index(spec.num_relations - 1);
      labels.push_back(seed_relation);
      if (rng.bernoulli(spec.cooccurrence_noise)) {
        // The extra relation is kept only if nothing either one can imply is
        // excluded from the other's implications.
        const std::size_t extra = 1 + rng.index(spec.num_relations - 1);
        const auto a = rule_closure(spec, seed_relation), b = rule_closure(spec, extra);
        bool compatible = extra != seed_relation;
        for (const auto& e : spec.exclusions) {
          if ((a[e.a] || b[e.a]) && (a[e.b] || b[e.b])) compatible = false;
        }
        if (compatible) labels.push_back(extra);
      }
      // Each rule fires at most once per bag, in breadth-first order.
      for (std::size_t at = 0; at < labels.size(); ++at) {
        for (const auto& rule : spec.rules) {
          if (rule.from != labels[at]) continue;
          if (!rng.bernoulli(rule.probability)) continue;
          if (std::find(labels.begin(), labels.end(), rule.to) == labels.end()) labels.push_back(rule.to);
        }
      }
      std::sort(labels.begin(), labels.end());
    }

    // Entity names recur across pairs but every (head, tail) pair is new.
    std::size_t h = 0, t = 0;
    do {
      h = rng.index(spec.entity_pool);
      t = rng.index(spec.entity_pool - 1);
      if (t >= h) ++t;
    } while (!used_pairs.insert({h, t}).second);
    const std::string head = "ent" + std::to_string(h);
    const std::string tail = "ent" + std::to_string(t);
    std::vector<std::string> label_names;
    for (std::size_t l : labels) label_names.push_back(names[l]);

    const std::size_t n_sentences = spec.min_sentences + rng.index(spec.max_sentences - spec.min_sentences + 1);
    auto& sink = is_test[b] ? out.test : out.train;
    for (std::size_t s = 0; s < n_sentences; ++s) {
      const std::size_t length = spec.min_length + rng.index(spec.max_length - spec.min_length + 1);
      CorpusRecord r;
      r.head = head;
      r.tail = tail;
      r.relations = label_names;
      for (std::size_t t = 0; t < length; ++t) r.tokens.push_back("w" + std::to_string(rng.index(spec.vocab_size)));
      r.head_pos = rng.index(length);
      r.tail_pos = rng.index(length - 1);
      if (r.tail_pos >= r.head_pos) ++r.tail_pos;
      r.tokens[r.head_pos] = head;
      r.tokens[r.tail_pos] = tail;

      std::size_t trigger_relation = kNaRelation;
      if (labels.front() != kNaRelation) {
        if (rng.bernoulli(spec.trigger_rate)) trigger_relation = labels[rng.index(labels.size())];
      } else if (rng.bernoulli(spec.na_trigger_rate)) {
        trigger_relation = 1 + rng.index(spec.num_relations - 1);
      }
      if (trigger_relation != kNaRelation) {
        std::size_t slot = rng.index(length - 2);
        for (std::size_t ent : {std::min(r.head_pos, r.tail_pos), std::max(r.head_pos, r.tail_pos)}) {
          if (slot >= ent) ++slot;
        }
        r.tokens[slot] = trigger_token(trigger_relation, rng.index(spec.triggers_per_relation));
      }
      sink.push_back(std::move(r));
    }
    ++(is_test[b] ? out.test_bags : out.train_bags);
  }
  return out;
}

}  // namespace tieforge::corpus
