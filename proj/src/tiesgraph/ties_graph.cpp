#include "tieforge/tiesgraph/ties_graph.hpp"

#include <algorithm>
#include <charconv>
#include <map>
#include <ostream>
#include <string_view>

#include "tieforge/errors.hpp"

namespace tieforge::graph {

num::Tensor TiesGraph::p_hat_tensor() const { return num::Tensor({k, k}, p_hat); }
num::Tensor TiesGraph::u_tensor() const { return num::Tensor({k, k}, u); }

std::size_t TiesGraph::edge_count() const {
  std::size_t edges = 0;
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = 0; j < k; ++j) edges += (i != j && transition(i, j) != 0.0);
  }
  return edges;
}

std::vector<LabelSet> label_sets_by_pair(const std::vector<corpus::Bag>& bags) {
  std::map<std::pair<std::string, std::string>, std::size_t> by_pair;
  std::vector<LabelSet> sets;
  for (const auto& bag : bags) {
    auto [it, inserted] = by_pair.emplace(std::make_pair(bag.head, bag.tail), sets.size());
    if (inserted) sets.emplace_back();
    auto& set = sets[it->second];
    set.insert(set.end(), bag.labels.begin(), bag.labels.end());
  }
  for (auto& set : sets) {
    std::sort(set.begin(), set.end());
    set.erase(std::unique(set.begin(), set.end()), set.end());
  }
  return sets;
}

Cooccurrence build_cooccurrence(const std::vector<LabelSet>& pairs, std::size_t k) {
  Cooccurrence c{k, std::vector<std::int64_t>(k, 0), std::vector<std::int64_t>(k * k, 0)};
  for (const auto& raw : pairs) {
    LabelSet set = raw;
    std::sort(set.begin(), set.end());
    set.erase(std::unique(set.begin(), set.end()), set.end());
    for (std::size_t i : set) {
      if (i >= k) throw IndexError("relation index " + std::to_string(i) + " outside [0," + std::to_string(k) + ")");
      ++c.n[i];
      for (std::size_t j : set) ++c.m[i * k + j];
    }
  }
  return c;
}

Cooccurrence build_cooccurrence(const std::vector<corpus::Bag>& bags, std::size_t k) {
  return build_cooccurrence(label_sets_by_pair(bags), k);
}

std::vector<double> build_transition(const Cooccurrence& counts, double theta, bool renormalize) {
  if (!(theta >= 0.0 && theta < 1.0)) throw ConfigError("theta must lie in [0,1), got " + std::to_string(theta));
  const std::size_t k = counts.k;
  std::vector<double> p(k * k, 0.0);
  for (std::size_t i = 0; i < k; ++i) {
    if (counts.n[i] > 0) {
      for (std::size_t j = 0; j < k; ++j) {
        const double pij = static_cast<double>(counts.m[i * k + j]) / static_cast<double>(counts.n[i]);
        p[i * k + j] = pij < theta ? 0.0 : pij;
      }
    }
    p[i * k + i] = 1.0;
    if (renormalize) {
      double row = 0.0;
      for (std::size_t j = 0; j < k; ++j) row += p[i * k + j];
      for (std::size_t j = 0; j < k; ++j) p[i * k + j] /= row;
    }
  }
  return p;
}

std::vector<double> build_exclusion(const Cooccurrence& counts) {
  const std::size_t k = counts.k;
  std::vector<double> u(k * k, 0.0);
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = 0; j < k; ++j) u[i * k + j] = (i == j || counts.m[i * k + j] == 0) ? 1.0 : 0.0;
  }
  return u;
}

TiesGraph build_graph(const Cooccurrence& counts, double theta, bool renormalize) {
  return {counts.k, counts.n, counts.m, build_transition(counts, theta, renormalize), build_exclusion(counts)};
}

TiesGraph build_graph(const std::vector<corpus::Bag>& bags, std::size_t k, double theta, bool renormalize) {
  return build_graph(build_cooccurrence(bags, k), theta, renormalize);
}

TiesGraph identity_graph(std::size_t k) {
  Cooccurrence none{k, std::vector<std::int64_t>(k, 0), std::vector<std::int64_t>(k * k, 0)};
  return build_graph(none, 0.0);
}

num::Var gcn_forward(num::Tape& tape, const TiesGraph& graph, const GcnParams& params, num::Activation activation) {
  if (params.w.empty()) throw DimensionError("gcn_forward: need at least one layer");
  if (params.h0->rank() != 2 || params.h0->dim(0) != graph.k) {
    throw DimensionError("gcn_forward: H0 " + num::shape_string(params.h0->shape()) + " does not match " +
                         std::to_string(graph.k) + " relations");
  }
  auto p_hat = num::make_var(graph.p_hat_tensor());
  num::Var h = params.h0;
  for (const auto& w : params.w) {
    h = num::activate(tape, num::matmul(tape, num::matmul(tape, p_hat, h), w), activation);
  }
  return h;
}

num::Var exclusion_penalty(num::Tape& tape, const num::Var& h, const TiesGraph& graph) {
  if (h->rank() != 2 || h->dim(0) != graph.k) {
    throw DimensionError("exclusion_penalty: H " + num::shape_string(h->shape()) + " vs U of " +
                         std::to_string(graph.k) + " relations");
  }
  const double k = static_cast<double>(graph.k), d = static_cast<double>(h->dim(1));
  auto similarity = num::matmul_bt(tape, h, h);
  return num::scale(tape, num::masked_sum(tape, similarity, graph.u_tensor()), 1.0 / (k * k * d));
}

namespace {

void write_header(std::ostream& out, std::size_t k, const corpus::RelationMap& relations) {
  out << "relation";
  for (std::size_t j = 0; j < k; ++j) out << '\t' << relations.name(j);
  out << '\n';
}

}  // namespace

void write_count_matrix(std::ostream& out, const std::vector<std::int64_t>& matrix, std::size_t k,
                        const corpus::RelationMap& relations) {
  write_header(out, k, relations);
  for (std::size_t i = 0; i < k; ++i) {
    out << relations.name(i);
    for (std::size_t j = 0; j < k; ++j) out << '\t' << matrix[i * k + j];
    out << '\n';
  }
}

void write_real_matrix(std::ostream& out, const std::vector<double>& matrix, std::size_t k,
                       const corpus::RelationMap& relations) {
  write_header(out, k, relations);
  for (std::size_t i = 0; i < k; ++i) {
    out << relations.name(i);
    for (std::size_t j = 0; j < k; ++j) {
      char buf[32];
      const auto end = std::to_chars(buf, buf + sizeof buf, matrix[i * k + j]).ptr;
      out << '\t' << std::string_view(buf, static_cast<std::size_t>(end - buf));
    }
    out << '\n';
  }
}

void write_counts(std::ostream& out, const std::vector<std::int64_t>& n, const corpus::RelationMap& relations) {
  out << "relation\tcount\n";
  for (std::size_t i = 0; i < n.size(); ++i) out << relations.name(i) << '\t' << n[i] << '\n';
}

}  // namespace tieforge::graph
