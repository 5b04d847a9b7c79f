#include "tieforge/encoder/encoder.hpp"

#include <algorithm>

#include "tieforge/errors.hpp"

namespace tieforge::encoder {

num::Var embed_sentence(num::Tape& tape, const corpus::SentenceInstance& sentence, const EmbeddingTables& tables) {
  const std::size_t n = sentence.token_ids.size();
  if (n == 0) throw DimensionError("embed_sentence: empty sentence");
  if (sentence.pos1_ids.size() != n || sentence.pos2_ids.size() != n) {
    throw DimensionError("embed_sentence: position ids do not match token count");
  }
  const num::Var parts[3] = {num::gather_rows(tape, tables.word, sentence.token_ids),
                             num::gather_rows(tape, tables.pos1, sentence.pos1_ids),
                             num::gather_rows(tape, tables.pos2, sentence.pos2_ids)};
  return num::concat_cols(tape, parts);
}

num::Var pcnn_encode(num::Tape& tape, const num::Var& embedded, const PcnnParams& params, std::size_t head_pos,
                     std::size_t tail_pos) {
  const std::size_t steps = embedded->rows();
  if (head_pos >= steps || tail_pos >= steps) {
    throw IndexError("pcnn_encode: entity position outside sentence of " + std::to_string(steps) + " tokens");
  }
  auto featmap = num::conv1d_same(tape, embedded, params.filters, params.bias);
  auto pooled =
      num::piecewise_max_pool(tape, featmap, std::min(head_pos, tail_pos), std::max(head_pos, tail_pos));
  return num::tanh_act(tape, pooled);
}

num::Var encode_sentence(num::Tape& tape, const corpus::SentenceInstance& sentence, const EmbeddingTables& tables,
                         const PcnnParams& params) {
  return pcnn_encode(tape, embed_sentence(tape, sentence, tables), params, sentence.head_pos, sentence.tail_pos);
}

AttentionResult bag_attention_stacked(num::Tape& tape, const num::Var& stacked, const num::Var& query) {
  if (stacked->rows() == 0) throw ContractError("bag_attention: empty bag");
  const std::size_t b = stacked->rows(), d = stacked->cols();
  if (query->size() != d) {
    throw DimensionError("bag_attention: query of " + std::to_string(query->size()) + " entries vs sentences of " +
                         std::to_string(d));
  }
  auto q = query->rank() == 2 && query->rows() == 1 ? query : num::reshape(tape, query, {1, d});
  auto scores = num::matmul_bt(tape, stacked, q);                        // b×1
  auto alpha = num::softmax_row(tape, num::reshape(tape, scores, {1, b}));  // 1×b
  AttentionResult result;
  result.bag_rep = num::matmul(tape, alpha, stacked);
  result.weights.assign(alpha->values().begin(), alpha->values().end());
  return result;
}

AttentionResult bag_attention(num::Tape& tape, const std::vector<num::Var>& sentence_reps, const num::Var& query) {
  if (sentence_reps.empty()) throw ContractError("bag_attention: empty bag");
  return bag_attention_stacked(tape, num::stack_rows(tape, sentence_reps), query);
}

}  // namespace tieforge::encoder
