#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "tieforge/corpus/corpus.hpp"
#include "tieforge/numcore/ops.hpp"
#include "tieforge/numcore/tensor.hpp"

namespace tieforge::graph {

inline constexpr double kDefaultTheta = 0.18;

using LabelSet = std::vector<std::size_t>;

struct Cooccurrence {
  std::size_t k = 0;
  std::vector<std::int64_t> n;  // entity pairs containing relation i
  std::vector<std::int64_t> m;  // k×k, row-major; m[i][i] == n[i]

  std::int64_t at(std::size_t i, std::size_t j) const { return m[i * k + j]; }
};

// Relation graph built from the training split. p_hat and u are k×k
// row-major; u holds 0/1.
struct TiesGraph {
  std::size_t k = 0;
  std::vector<std::int64_t> n;
  std::vector<std::int64_t> m;
  std::vector<double> p_hat;
  std::vector<double> u;

  double transition(std::size_t i, std::size_t j) const { return p_hat[i * k + j]; }
  double exclusion(std::size_t i, std::size_t j) const { return u[i * k + j]; }
  num::Tensor p_hat_tensor() const;
  num::Tensor u_tensor() const;
  // Off-diagonal nonzero entries of p_hat.
  std::size_t edge_count() const;
};

// Merges bags of the same (head, tail) pair into one label set per pair.
std::vector<LabelSet> label_sets_by_pair(const std::vector<corpus::Bag>& bags);

Cooccurrence build_cooccurrence(const std::vector<LabelSet>& pairs, std::size_t k);
Cooccurrence build_cooccurrence(const std::vector<corpus::Bag>& bags, std::size_t k);

// P_ij = M_ij / N_i (zero rows where N_i = 0), entries below theta dropped,
// then a unit self-loop on every diagonal. `renormalize` rescales each row to
// sum to one afterwards.
std::vector<double> build_transition(const Cooccurrence& counts, double theta, bool renormalize = false);

// U_ij = [M_ij == 0] off the diagonal, U_ii = 1.
std::vector<double> build_exclusion(const Cooccurrence& counts);

TiesGraph build_graph(const Cooccurrence& counts, double theta, bool renormalize = false);
TiesGraph build_graph(const std::vector<corpus::Bag>& bags, std::size_t k, double theta, bool renormalize = false);

// The graph-off ablation: P̂ = I and no co-occurrence evidence.
TiesGraph identity_graph(std::size_t k);

struct GcnParams {
  num::Var h0;              // k×d
  std::vector<num::Var> w;  // l matrices, d×d
};

// H = f(P̂ · … f(P̂·H⁰·W⁰) … · W^{l−1}).
num::Var gcn_forward(num::Tape& tape, const TiesGraph& graph, const GcnParams& params,
                     num::Activation activation = num::Activation::kTanh);

// Ω = Σ_ij (h_i·h_j)·U_ij / (k·k·d).
num::Var exclusion_penalty(num::Tape& tape, const num::Var& h, const TiesGraph& graph);

// TSV dumps with a relation-name header row.
void write_count_matrix(std::ostream& out, const std::vector<std::int64_t>& matrix, std::size_t k,
                        const corpus::RelationMap& relations);
void write_real_matrix(std::ostream& out, const std::vector<double>& matrix, std::size_t k,
                       const corpus::RelationMap& relations);
void write_counts(std::ostream& out, const std::vector<std::int64_t>& n, const corpus::RelationMap& relations);

}  // namespace tieforge::graph
