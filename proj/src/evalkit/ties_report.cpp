#include "tieforge/evalkit/ties_report.hpp"

#include <cmath>
#include <iomanip>
#include <ostream>

#include "tieforge/errors.hpp"
#include "tieforge/random.hpp"

namespace tieforge::eval {

double cosine(const num::Tensor& h, std::size_t i, std::size_t j) {
  const std::size_t d = h.cols();
  double dot = 0.0, ni = 0.0, nj = 0.0;
  for (std::size_t c = 0; c < d; ++c) {
    const double a = h.at(i, c), b = h.at(j, c);
    dot += a * b;
    ni += a * a;
    nj += b * b;
  }
  if (ni == 0.0 || nj == 0.0) return 0.0;
  return dot / (std::sqrt(ni) * std::sqrt(nj));
}

RecoveryReport ties_recovery_report(const num::Tensor& h, const corpus::PlantedTies& ties,
                                    const graph::TiesGraph& graph) {
  const std::size_t k = h.rows();
  if (graph.k != k) throw DimensionError("ties_recovery_report: H rows disagree with graph size");
  const auto mean = [](double total, std::size_t n) { return n ? total / static_cast<double>(n) : 0.0; };

  RecoveryReport r;
  double total = 0.0;
  for (const auto& rule : ties.implications) total += cosine(h, rule.from, rule.to);
  r.implication_cosine = mean(total, ties.implications.size());
  total = 0.0;
  for (const auto& e : ties.exclusions) total += cosine(h, e.a, e.b);
  r.exclusion_cosine = mean(total, ties.exclusions.size());
  r.margin = r.implication_cosine - r.exclusion_cosine;

  total = 0.0;
  for (std::size_t j = 1; j < k; ++j) total += cosine(h, corpus::kNaRelation, j);
  r.na_centrality = mean(total, k - 1);

  double masked = 0.0, edges = 0.0;
  std::size_t n_masked = 0, n_edges = 0;
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = 0; j < k; ++j) {
      if (i == j) continue;
      const double c = cosine(h, i, j);
      if (graph.exclusion(i, j) != 0.0) {
        masked += c;
        ++n_masked;
      }
      if (graph.transition(i, j) != 0.0) {
        edges += c;
        ++n_edges;
      }
    }
  }
  r.masked_cosine = mean(masked, n_masked);
  r.edge_cosine = mean(edges, n_edges);
  return r;
}

void write_report(std::ostream& out, const RecoveryReport& r) {
  out << std::setprecision(17) << "implication_cosine=" << r.implication_cosine << '\n'
      << "exclusion_cosine=" << r.exclusion_cosine << '\n'
      << "margin=" << r.margin << '\n'
      << "na_centrality=" << r.na_centrality << '\n'
      << "masked_cosine=" << r.masked_cosine << '\n'
      << "edge_cosine=" << r.edge_cosine << '\n';
}

namespace {

constexpr double kTolerance = 1e-9;
constexpr std::size_t kMaxIterations = 20000;

double norm(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

// v ← Xᵀ(X v) for centred x (k×d).
std::vector<double> gram_apply(const std::vector<double>& x, std::size_t k, std::size_t d,
                               const std::vector<double>& v) {
  std::vector<double> xv(k, 0.0), out(d, 0.0);
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t c = 0; c < d; ++c) xv[i] += x[i * d + c] * v[c];
  }
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t c = 0; c < d; ++c) out[c] += x[i * d + c] * xv[i];
  }
  return out;
}

void orthogonalize(std::vector<double>& v, const std::vector<std::vector<double>>& basis) {
  for (const auto& b : basis) {
    double dot = 0.0;
    for (std::size_t c = 0; c < v.size(); ++c) dot += v[c] * b[c];
    for (std::size_t c = 0; c < v.size(); ++c) v[c] -= dot * b[c];
  }
}

std::vector<double> centred(const num::Tensor& h) {
  const std::size_t k = h.rows(), d = h.cols();
  std::vector<double> x(h.values().begin(), h.values().end());
  for (std::size_t c = 0; c < d; ++c) {
    double m = 0.0;
    for (std::size_t i = 0; i < k; ++i) m += x[i * d + c];
    m /= static_cast<double>(k);
    for (std::size_t i = 0; i < k; ++i) x[i * d + c] -= m;
  }
  return x;
}

}  // namespace

Projection project_embeddings(const num::Tensor& h) {
  const std::size_t k = h.rows(), d = h.cols();
  if (k < 2) throw DimensionError("project_embeddings: need at least two relations");
  const auto x = centred(h);

  double total = 0.0;
  for (double v : x) total += v * v;

  Projection p;
  std::vector<std::vector<double>> basis;
  Rng rng(0x9e3779b97f4a7c15ULL);
  for (std::size_t axis = 0; axis < 2; ++axis) {
    std::vector<double> v(d);
    for (double& c : v) c = rng.uniform(-1.0, 1.0);
    orthogonalize(v, basis);
    double n = norm(v);
    for (double& c : v) c /= n;
    double eigen = 0.0;
    for (std::size_t it = 0; it < kMaxIterations; ++it) {
      auto next = gram_apply(x, k, d, v);
      orthogonalize(next, basis);
      // Below this the product is rounding noise and would drag v back onto
      // the axes already found.
      if (norm(next) <= 1e-12 * total) {
        eigen = 0.0;
        break;
      }
      eigen = norm(next);
      double delta = 0.0;
      for (std::size_t c = 0; c < d; ++c) {
        next[c] /= eigen;
        delta += (next[c] - v[c]) * (next[c] - v[c]);
      }
      v = std::move(next);
      if (std::sqrt(delta) < kTolerance) break;
    }
    orthogonalize(v, basis);
    n = norm(v);
    for (double& c : v) c /= n;
    basis.push_back(v);
    p.variances.push_back(eigen / static_cast<double>(k));
  }
  for (const auto& b : basis) p.axes.insert(p.axes.end(), b.begin(), b.end());
  p.coords.assign(k * 2, 0.0);
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t a = 0; a < 2; ++a) {
      double s = 0.0;
      for (std::size_t c = 0; c < d; ++c) s += x[i * d + c] * basis[a][c];
      p.coords[i * 2 + a] = s;
    }
  }
  return p;
}

double reconstruction_error(const num::Tensor& h, const Projection& p, std::size_t axes) {
  const std::size_t k = h.rows(), d = h.cols();
  const auto x = centred(h);
  double err = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t c = 0; c < d; ++c) {
      double r = x[i * d + c];
      for (std::size_t a = 0; a < axes; ++a) r -= p.coords[i * 2 + a] * p.axes[a * d + c];
      err += r * r;
    }
  }
  return err;
}

void write_projection(std::ostream& out, const Projection& p, const corpus::RelationMap& relations) {
  out << std::setprecision(17);
  for (std::size_t i = 0; i < relations.size(); ++i) {
    out << relations.name(i) << '\t' << p.coords[i * 2] << '\t' << p.coords[i * 2 + 1] << '\n';
  }
}

}  // namespace tieforge::eval
