#pragma once

#include <cstddef>
#include <vector>

#include "tieforge/corpus/corpus.hpp"
#include "tieforge/numcore/ops.hpp"
#include "tieforge/numcore/tensor.hpp"

namespace tieforge::encoder {

struct EmbeddingTables {
  num::Var word;  // |V|×word_dim
  num::Var pos1;  // (2·D_max+1)×pos_dim
  num::Var pos2;
};

struct PcnnParams {
  num::Var filters;  // kernel×(word_dim+2·pos_dim)×feature_maps
  num::Var bias;     // feature_maps
};

// Rows [w_i ; p_i¹ ; p_i²] for every token of the sentence.
num::Var embed_sentence(num::Tape& tape, const corpus::SentenceInstance& sentence, const EmbeddingTables& tables);

// Convolution, piecewise max pooling split at the two entities, then tanh.
// Output has 3·feature_maps entries.
num::Var pcnn_encode(num::Tape& tape, const num::Var& embedded, const PcnnParams& params, std::size_t head_pos,
                     std::size_t tail_pos);

num::Var encode_sentence(num::Tape& tape, const corpus::SentenceInstance& sentence, const EmbeddingTables& tables,
                         const PcnnParams& params);

struct AttentionResult {
  num::Var bag_rep;  // 1×d
  std::vector<double> weights;
};

// α = softmax_j(s_jᵀ·query), bag = Σ_j α_j s_j.
AttentionResult bag_attention(num::Tape& tape, const std::vector<num::Var>& sentence_reps, const num::Var& query);

// Attention over rows of an already stacked sentence matrix (b×d).
AttentionResult bag_attention_stacked(num::Tape& tape, const num::Var& stacked, const num::Var& query);

}  // namespace tieforge::encoder
