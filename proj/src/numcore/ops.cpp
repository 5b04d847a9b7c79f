#include "tieforge/numcore/ops.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "tieforge/errors.hpp"

namespace tieforge::num {
namespace {

void require_rank2(const Var& t, const char* op) {
  if (t->rank() != 2) {
    throw DimensionError(std::string(op) + ": expected a matrix, got " + shape_string(t->shape()));
  }
}

Var new_output(Shape shape, bool requires_grad) {
  auto out = std::make_shared<Tensor>(std::move(shape));
  out->set_requires_grad(requires_grad);
  return out;
}

// Fixed lane-wise partial sums: vectorisable without reassociating floating
// point, so results do not depend on compiler flags.
inline double dot(const double* a, const double* b, std::size_t n) {
  constexpr std::size_t kLanes = 8;
  double lane[kLanes] = {};
  std::size_t i = 0;
  for (; i + kLanes <= n; i += kLanes) {
    for (std::size_t l = 0; l < kLanes; ++l) lane[l] += a[i + l] * b[i + l];
  }
  for (; i < n; ++i) lane[0] += a[i] * b[i];
  return ((lane[0] + lane[1]) + (lane[2] + lane[3])) + ((lane[4] + lane[5]) + (lane[6] + lane[7]));
}

bool any_requires_grad(std::span<const Var> vars) {
  return std::any_of(vars.begin(), vars.end(), [](const Var& v) { return v->requires_grad(); });
}

}  // namespace

Var matmul(Tape& tape, const Var& a, const Var& b) {
  require_rank2(a, "matmul");
  require_rank2(b, "matmul");
  const std::size_t m = a->dim(0), n = a->dim(1), p = b->dim(1);
  if (b->dim(0) != n) {
    throw DimensionError("matmul: inner dimensions disagree for " + shape_string(a->shape()) + " and " +
                         shape_string(b->shape()));
  }
  auto out = new_output({m, p}, a->requires_grad() || b->requires_grad());
  const double* av = a->values().data();
  const double* bv = b->values().data();
  double* cv = out->values().data();
  for (std::size_t i = 0; i < m; ++i) {
    double* crow = cv + i * p;
    for (std::size_t k = 0; k < n; ++k) {
      const double aik = av[i * n + k];
      if (aik == 0.0) continue;
      const double* brow = bv + k * p;
      for (std::size_t j = 0; j < p; ++j) crow[j] += aik * brow[j];
    }
  }
  if (out->requires_grad()) {
    tape.record([a, b, out, m, n, p] {
      if (!out->has_grad()) return;
      const double* dc = out->grad().data();
      if (a->requires_grad()) {
        double* da = a->grad().data();
        const double* bv = b->values().data();
        for (std::size_t i = 0; i < m; ++i) {
          for (std::size_t k = 0; k < n; ++k) {
            da[i * n + k] += dot(dc + i * p, bv + k * p, p);
          }
        }
      }
      if (b->requires_grad()) {
        double* db = b->grad().data();
        const double* av = a->values().data();
        for (std::size_t i = 0; i < m; ++i) {
          const double* dcrow = dc + i * p;
          for (std::size_t k = 0; k < n; ++k) {
            const double aik = av[i * n + k];
            if (aik == 0.0) continue;
            double* dbrow = db + k * p;
            for (std::size_t j = 0; j < p; ++j) dbrow[j] += aik * dcrow[j];
          }
        }
      }
    });
  }
  return out;
}

Var matmul_bt(Tape& tape, const Var& a, const Var& b) {
  require_rank2(a, "matmul_bt");
  require_rank2(b, "matmul_bt");
  const std::size_t m = a->dim(0), n = a->dim(1), p = b->dim(0);
  if (b->dim(1) != n) {
    throw DimensionError("matmul_bt: inner dimensions disagree for " + shape_string(a->shape()) + " and " +
                         shape_string(b->shape()) + "^T");
  }
  auto out = new_output({m, p}, a->requires_grad() || b->requires_grad());
  const double* av = a->values().data();
  const double* bv = b->values().data();
  double* cv = out->values().data();
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < p; ++j) cv[i * p + j] = dot(av + i * n, bv + j * n, n);
  }
  if (out->requires_grad()) {
    tape.record([a, b, out, m, n, p] {
      if (!out->has_grad()) return;
      const double* dc = out->grad().data();
      const double* av = a->values().data();
      const double* bv = b->values().data();
      if (a->requires_grad()) {
        double* da = a->grad().data();
        for (std::size_t i = 0; i < m; ++i) {
          for (std::size_t j = 0; j < p; ++j) {
            const double g = dc[i * p + j];
            if (g == 0.0) continue;
            for (std::size_t k = 0; k < n; ++k) da[i * n + k] += g * bv[j * n + k];
          }
        }
      }
      if (b->requires_grad()) {
        double* db = b->grad().data();
        for (std::size_t i = 0; i < m; ++i) {
          for (std::size_t j = 0; j < p; ++j) {
            const double g = dc[i * p + j];
            if (g == 0.0) continue;
            for (std::size_t k = 0; k < n; ++k) db[j * n + k] += g * av[i * n + k];
          }
        }
      }
    });
  }
  return out;
}

Var add(Tape& tape, const Var& a, const Var& b) {
  if (a->size() != b->size()) {
    throw DimensionError("add: sizes disagree for " + shape_string(a->shape()) + " and " +
                         shape_string(b->shape()));
  }
  auto out = new_output(a->shape(), a->requires_grad() || b->requires_grad());
  for (std::size_t i = 0; i < a->size(); ++i) (*out)[i] = (*a)[i] + (*b)[i];
  if (out->requires_grad()) {
    tape.record([a, b, out] {
      if (!out->has_grad()) return;
      auto dc = out->grad();
      for (const Var& in : {a, b}) {
        if (!in->requires_grad()) continue;
        auto d = in->grad();
        for (std::size_t i = 0; i < d.size(); ++i) d[i] += dc[i];
      }
    });
  }
  return out;
}

Var add_n(Tape& tape, std::span<const Var> terms) {
  if (terms.empty()) throw DimensionError("add_n: no terms");
  const std::size_t n = terms.front()->size();
  for (const Var& t : terms) {
    if (t->size() != n) throw DimensionError("add_n: mismatched term " + shape_string(t->shape()));
  }
  auto out = new_output(terms.front()->shape(), any_requires_grad(terms));
  for (const Var& t : terms) {
    for (std::size_t i = 0; i < n; ++i) (*out)[i] += (*t)[i];
  }
  if (out->requires_grad()) {
    std::vector<Var> held(terms.begin(), terms.end());
    tape.record([held = std::move(held), out] {
      if (!out->has_grad()) return;
      auto dc = out->grad();
      for (const Var& t : held) {
        if (!t->requires_grad()) continue;
        auto d = t->grad();
        for (std::size_t i = 0; i < d.size(); ++i) d[i] += dc[i];
      }
    });
  }
  return out;
}

Var scale(Tape& tape, const Var& a, double factor) {
  auto out = new_output(a->shape(), a->requires_grad());
  for (std::size_t i = 0; i < a->size(); ++i) (*out)[i] = factor * (*a)[i];
  if (out->requires_grad()) {
    tape.record([a, out, factor] {
      if (!out->has_grad()) return;
      auto dc = out->grad();
      auto d = a->grad();
      for (std::size_t i = 0; i < d.size(); ++i) d[i] += factor * dc[i];
    });
  }
  return out;
}

Var sum(Tape& tape, const Var& a) {
  auto out = new_output({1}, a->requires_grad());
  double acc = 0.0;
  for (double v : a->values()) acc += v;
  (*out)[0] = acc;
  if (out->requires_grad()) {
    tape.record([a, out] {
      if (!out->has_grad()) return;
      const double g = out->grad()[0];
      for (double& d : a->grad()) d += g;
    });
  }
  return out;
}

Var masked_sum(Tape& tape, const Var& a, const Tensor& mask) {
  if (mask.size() != a->size()) {
    throw DimensionError("masked_sum: mask " + shape_string(mask.shape()) + " vs input " +
                         shape_string(a->shape()));
  }
  auto out = new_output({1}, a->requires_grad());
  double acc = 0.0;
  for (std::size_t i = 0; i < a->size(); ++i) acc += (*a)[i] * mask[i];
  (*out)[0] = acc;
  if (out->requires_grad()) {
    tape.record([a, out, mask] {
      if (!out->has_grad()) return;
      const double g = out->grad()[0];
      auto d = a->grad();
      for (std::size_t i = 0; i < d.size(); ++i) d[i] += g * mask[i];
    });
  }
  return out;
}

Var reshape(Tape& tape, const Var& a, Shape shape) {
  if (shape_size(shape) != a->size()) {
    throw DimensionError("reshape: " + shape_string(a->shape()) + " to " + shape_string(shape));
  }
  auto out = std::make_shared<Tensor>(std::move(shape), std::vector<double>(a->values().begin(), a->values().end()));
  out->set_requires_grad(a->requires_grad());
  if (out->requires_grad()) {
    tape.record([a, out] {
      if (!out->has_grad()) return;
      auto dc = out->grad();
      auto d = a->grad();
      for (std::size_t i = 0; i < d.size(); ++i) d[i] += dc[i];
    });
  }
  return out;
}

Var tanh_act(Tape& tape, const Var& x) {
  auto out = new_output(x->shape(), x->requires_grad());
  for (std::size_t i = 0; i < x->size(); ++i) (*out)[i] = std::tanh((*x)[i]);
  if (out->requires_grad()) {
    tape.record([x, out] {
      if (!out->has_grad()) return;
      auto dc = out->grad();
      auto d = x->grad();
      for (std::size_t i = 0; i < d.size(); ++i) {
        const double y = (*out)[i];
        d[i] += dc[i] * (1.0 - y * y);
      }
    });
  }
  return out;
}

Var relu_act(Tape& tape, const Var& x) {
  auto out = new_output(x->shape(), x->requires_grad());
  for (std::size_t i = 0; i < x->size(); ++i) (*out)[i] = std::max(0.0, (*x)[i]);
  if (out->requires_grad()) {
    tape.record([x, out] {
      if (!out->has_grad()) return;
      auto dc = out->grad();
      auto d = x->grad();
      for (std::size_t i = 0; i < d.size(); ++i) {
        if ((*x)[i] > 0.0) d[i] += dc[i];
      }
    });
  }
  return out;
}

Var activate(Tape& tape, const Var& x, Activation f) {
  return f == Activation::kTanh ? tanh_act(tape, x) : relu_act(tape, x);
}

Var softmax_row(Tape& tape, const Var& logits) {
  if (logits->size() == 0) throw DimensionError("softmax_row: empty input");
  auto out = new_output(logits->shape(), logits->requires_grad());
  const auto in = logits->values();
  const double shift = *std::max_element(in.begin(), in.end());
  double z = 0.0;
  for (std::size_t i = 0; i < in.size(); ++i) {
    (*out)[i] = std::exp(in[i] - shift);
    z += (*out)[i];
  }
  for (double& v : out->values()) v /= z;
  if (out->requires_grad()) {
    tape.record([logits, out] {
      if (!out->has_grad()) return;
      auto dc = out->grad();
      auto y = out->values();
      double dot = 0.0;
      for (std::size_t i = 0; i < y.size(); ++i) dot += dc[i] * y[i];
      auto d = logits->grad();
      for (std::size_t i = 0; i < y.size(); ++i) d[i] += y[i] * (dc[i] - dot);
    });
  }
  return out;
}

Var nll_from_logits(Tape& tape, const Var& logits, std::size_t gold) {
  const auto in = logits->values();
  if (gold >= in.size()) {
    throw IndexError("nll_from_logits: gold index " + std::to_string(gold) + " outside [0," +
                     std::to_string(in.size()) + ")");
  }
  const double shift = *std::max_element(in.begin(), in.end());
  double z = 0.0;
  for (double v : in) z += std::exp(v - shift);
  const double lse = shift + std::log(z);
  auto out = new_output({1}, logits->requires_grad());
  (*out)[0] = lse - in[gold];
  if (out->requires_grad()) {
    tape.record([logits, out, gold, lse] {
      if (!out->has_grad()) return;
      const double g = out->grad()[0];
      auto d = logits->grad();
      const auto x = logits->values();
      for (std::size_t i = 0; i < x.size(); ++i) d[i] += g * std::exp(x[i] - lse);
      d[gold] -= g;
    });
  }
  return out;
}

Var conv1d_same(Tape& tape, const Var& seq, const Var& filters, const Var& bias) {
  require_rank2(seq, "conv1d_same");
  if (filters->rank() != 3) {
    throw DimensionError("conv1d_same: filters must be [w×d_in×d_out], got " + shape_string(filters->shape()));
  }
  const std::size_t steps = seq->dim(0), d_in = seq->dim(1);
  const std::size_t width = filters->dim(0), d_out = filters->dim(2);
  if (width % 2 == 0) throw ConfigError("conv1d_same: kernel width must be odd, got " + std::to_string(width));
  if (filters->dim(1) != d_in || bias->size() != d_out) {
    throw DimensionError("conv1d_same: seq " + shape_string(seq->shape()) + ", filters " +
                         shape_string(filters->shape()) + ", bias " + shape_string(bias->shape()));
  }
  if (steps == 0) throw DimensionError("conv1d_same: empty sequence");
  const auto half = static_cast<std::ptrdiff_t>(width / 2);
  auto out = new_output({steps, d_out}, seq->requires_grad() || filters->requires_grad() || bias->requires_grad());
  const double* x = seq->values().data();
  const double* f = filters->values().data();
  const double* bv = bias->values().data();
  double* y = out->values().data();
  for (std::size_t t = 0; t < steps; ++t) std::copy(bv, bv + d_out, y + t * d_out);
  // Filter rows outermost: each row of the filter bank is read once per
  // sentence while the (small) output map stays cache resident.
  for (std::size_t o = 0; o < width; ++o) {
    const auto shift = static_cast<std::ptrdiff_t>(o) - half;
    const std::size_t t_begin = shift < 0 ? static_cast<std::size_t>(-shift) : 0;
    const std::size_t t_end =
        shift > 0 ? (steps > static_cast<std::size_t>(shift) ? steps - static_cast<std::size_t>(shift) : 0) : steps;
    for (std::size_t i = 0; i < d_in; ++i) {
      const double* frow = f + (o * d_in + i) * d_out;
      for (std::size_t t = t_begin; t < t_end; ++t) {
        const double xv = x[static_cast<std::size_t>(static_cast<std::ptrdiff_t>(t) + shift) * d_in + i];
        if (xv == 0.0) continue;
        double* yrow = y + t * d_out;
        for (std::size_t c = 0; c < d_out; ++c) yrow[c] += xv * frow[c];
      }
    }
  }
  if (out->requires_grad()) {
    tape.record([seq, filters, bias, out, steps, d_in, d_out, width, half] {
      if (!out->has_grad()) return;
      const double* dy = out->grad().data();
      const double* x = seq->values().data();
      const double* f = filters->values().data();
      double* dx = seq->requires_grad() ? seq->grad().data() : nullptr;
      double* df = filters->requires_grad() ? filters->grad().data() : nullptr;
      if (bias->requires_grad()) {
        auto db = bias->grad();
        for (std::size_t t = 0; t < steps; ++t) {
          for (std::size_t c = 0; c < d_out; ++c) db[c] += dy[t * d_out + c];
        }
      }
      for (std::size_t o = 0; o < width; ++o) {
        const auto shift = static_cast<std::ptrdiff_t>(o) - half;
        const std::size_t t_begin = shift < 0 ? static_cast<std::size_t>(-shift) : 0;
        const std::size_t t_end =
            shift > 0 ? (steps > static_cast<std::size_t>(shift) ? steps - static_cast<std::size_t>(shift) : 0)
                      : steps;
        for (std::size_t i = 0; i < d_in; ++i) {
          const std::size_t frow = (o * d_in + i) * d_out;
          for (std::size_t t = t_begin; t < t_end; ++t) {
            const double* dyrow = dy + t * d_out;
            const std::size_t src = static_cast<std::size_t>(static_cast<std::ptrdiff_t>(t) + shift) * d_in + i;
            if (df) {
              const double xv = x[src];
              if (xv != 0.0) {
                double* dfrow = df + frow;
                for (std::size_t c = 0; c < d_out; ++c) dfrow[c] += xv * dyrow[c];
              }
            }
            if (dx) dx[src] += dot(f + frow, dyrow, d_out);
          }
        }
      }
    });
  }
  return out;
}

Var piecewise_max_pool(Tape& tape, const Var& featmap, std::size_t split1, std::size_t split2) {
  require_rank2(featmap, "piecewise_max_pool");
  const std::size_t steps = featmap->dim(0), channels = featmap->dim(1);
  if (!(split1 <= split2 && split2 < steps)) {
    throw IndexError("piecewise_max_pool: splits (" + std::to_string(split1) + "," + std::to_string(split2) +
                     ") invalid for " + std::to_string(steps) + " rows");
  }
  // Half-open row ranges of the three segments.
  const std::size_t begin[3] = {0, split1 + 1, split2 + 1};
  const std::size_t end[3] = {split1 + 1, split2 + 1, steps};
  constexpr std::size_t kEmpty = std::numeric_limits<std::size_t>::max();
  auto out = new_output({3 * channels}, featmap->requires_grad());
  std::vector<std::size_t> argmax(3 * channels, kEmpty);
  const double* x = featmap->values().data();
  for (std::size_t seg = 0; seg < 3; ++seg) {
    if (begin[seg] >= end[seg]) continue;
    for (std::size_t c = 0; c < channels; ++c) {
      std::size_t best = begin[seg];
      for (std::size_t t = begin[seg] + 1; t < end[seg]; ++t) {
        if (x[t * channels + c] > x[best * channels + c]) best = t;
      }
      argmax[seg * channels + c] = best;
      (*out)[seg * channels + c] = x[best * channels + c];
    }
  }
  if (out->requires_grad()) {
    tape.record([featmap, out, argmax = std::move(argmax), channels] {
      if (!out->has_grad()) return;
      auto dc = out->grad();
      auto d = featmap->grad();
      for (std::size_t k = 0; k < argmax.size(); ++k) {
        if (argmax[k] == kEmpty) continue;
        d[argmax[k] * channels + k % channels] += dc[k];
      }
    });
  }
  return out;
}

Var gather_rows(Tape& tape, const Var& table, std::span<const std::size_t> ids) {
  require_rank2(table, "gather_rows");
  const std::size_t n = table->dim(0), c = table->dim(1);
  for (std::size_t id : ids) {
    if (id >= n) {
      throw IndexError("gather_rows: id " + std::to_string(id) + " outside table of " + std::to_string(n) + " rows");
    }
  }
  auto out = new_output({ids.size(), c}, table->requires_grad());
  for (std::size_t r = 0; r < ids.size(); ++r) {
    std::copy_n(table->values().data() + ids[r] * c, c, out->values().data() + r * c);
  }
  if (out->requires_grad()) {
    tape.record([table, out, ids = std::vector<std::size_t>(ids.begin(), ids.end()), c] {
      if (!out->has_grad()) return;
      auto dc = out->grad();
      auto d = table->grad();
      for (std::size_t r = 0; r < ids.size(); ++r) {
        for (std::size_t j = 0; j < c; ++j) d[ids[r] * c + j] += dc[r * c + j];
      }
    });
  }
  return out;
}

Var select_row(Tape& tape, const Var& m, std::size_t row) {
  const std::size_t id[1] = {row};
  return gather_rows(tape, m, id);
}

Var concat_cols(Tape& tape, std::span<const Var> parts) {
  if (parts.empty()) throw DimensionError("concat_cols: no parts");
  const std::size_t rows = parts.front()->rows();
  std::size_t total = 0;
  for (const Var& p : parts) {
    require_rank2(p, "concat_cols");
    if (p->rows() != rows) throw DimensionError("concat_cols: row counts disagree");
    total += p->cols();
  }
  auto out = new_output({rows, total}, any_requires_grad(parts));
  std::size_t offset = 0;
  for (const Var& p : parts) {
    const std::size_t c = p->cols();
    for (std::size_t r = 0; r < rows; ++r) {
      std::copy_n(p->values().data() + r * c, c, out->values().data() + r * total + offset);
    }
    offset += c;
  }
  if (out->requires_grad()) {
    std::vector<Var> held(parts.begin(), parts.end());
    tape.record([held = std::move(held), out, rows, total] {
      if (!out->has_grad()) return;
      auto dc = out->grad();
      std::size_t offset = 0;
      for (const Var& p : held) {
        const std::size_t c = p->cols();
        if (p->requires_grad()) {
          auto d = p->grad();
          for (std::size_t r = 0; r < rows; ++r) {
            for (std::size_t j = 0; j < c; ++j) d[r * c + j] += dc[r * total + offset + j];
          }
        }
        offset += c;
      }
    });
  }
  return out;
}

Var stack_rows(Tape& tape, std::span<const Var> rows) {
  if (rows.empty()) throw DimensionError("stack_rows: no rows");
  const std::size_t c = rows.front()->size();
  for (const Var& r : rows) {
    if (r->size() != c) throw DimensionError("stack_rows: row sizes disagree");
  }
  auto out = new_output({rows.size(), c}, any_requires_grad(rows));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    std::copy_n(rows[r]->values().data(), c, out->values().data() + r * c);
  }
  if (out->requires_grad()) {
    std::vector<Var> held(rows.begin(), rows.end());
    tape.record([held = std::move(held), out, c] {
      if (!out->has_grad()) return;
      auto dc = out->grad();
      for (std::size_t r = 0; r < held.size(); ++r) {
        if (!held[r]->requires_grad()) continue;
        auto d = held[r]->grad();
        for (std::size_t j = 0; j < c; ++j) d[j] += dc[r * c + j];
      }
    });
  }
  return out;
}

}  // namespace tieforge::num
