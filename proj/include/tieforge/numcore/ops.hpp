#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "tieforge/numcore/tensor.hpp"

// Differentiable kernels. Every kernel takes the tape it records onto; the
// output requires a gradient iff any input does.
namespace tieforge::num {

enum class Activation { kTanh, kRelu };

// c = a·b for a[m×n], b[n×p].
Var matmul(Tape& tape, const Var& a, const Var& b);
// c = a·bᵀ for a[m×n], b[p×n].
Var matmul_bt(Tape& tape, const Var& a, const Var& b);

// Elementwise sum of equally sized tensors; result takes a's shape.
Var add(Tape& tape, const Var& a, const Var& b);
Var add_n(Tape& tape, std::span<const Var> terms);
Var scale(Tape& tape, const Var& a, double factor);
Var sum(Tape& tape, const Var& a);
// Σ a∘mask; mask is a constant of the same size.
Var masked_sum(Tape& tape, const Var& a, const Tensor& mask);
Var reshape(Tape& tape, const Var& a, Shape shape);

Var tanh_act(Tape& tape, const Var& x);
Var relu_act(Tape& tape, const Var& x);
Var activate(Tape& tape, const Var& x, Activation f);

// Max-shifted softmax over all entries of `logits`.
Var softmax_row(Tape& tape, const Var& logits);
// −log softmax(logits)[gold] in log-sum-exp form; scalar output.
Var nll_from_logits(Tape& tape, const Var& logits, std::size_t gold);

// seq[T×d_in], filters[w×d_in×d_out], bias[d_out] -> [T×d_out]; zero padded
// by (w−1)/2 on each side.
Var conv1d_same(Tape& tape, const Var& seq, const Var& filters, const Var& bias);

// Per-channel max over rows [0..split1], (split1..split2], (split2..T−1];
// output [3·C] laid out segment-major. Empty segments pool to 0 and ties go
// to the lowest row.
Var piecewise_max_pool(Tape& tape, const Var& featmap, std::size_t split1, std::size_t split2);

// Rows `ids` of table[n×c] -> [ids.size()×c]; backward scatter-adds.
Var gather_rows(Tape& tape, const Var& table, std::span<const std::size_t> ids);
Var select_row(Tape& tape, const Var& m, std::size_t row);
// Concatenates matrices with equal row counts along columns.
Var concat_cols(Tape& tape, std::span<const Var> parts);
// Stacks equally sized tensors as rows of a matrix.
Var stack_rows(Tape& tape, std::span<const Var> rows);

}  // namespace tieforge::num
