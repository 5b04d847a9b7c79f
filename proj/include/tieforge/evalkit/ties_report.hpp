#pragma once

#include <iosfwd>
#include <vector>

#include "tieforge/corpus/corpus.hpp"
#include "tieforge/corpus/synth.hpp"
#include "tieforge/numcore/tensor.hpp"
#include "tieforge/tiesgraph/ties_graph.hpp"

namespace tieforge::eval {

double cosine(const num::Tensor& h, std::size_t i, std::size_t j);

struct RecoveryReport {
  double implication_cosine = 0.0;  // mean over planted implication pairs
  double exclusion_cosine = 0.0;    // mean over planted exclusion pairs
  double margin = 0.0;              // implication − exclusion
  double na_centrality = 0.0;       // mean cosine of NA with every other relation
  double masked_cosine = 0.0;       // mean over off-diagonal pairs with U = 1
  double edge_cosine = 0.0;         // mean over off-diagonal pairs with P̂ > 0
};

// Cosine-based topology summary of relation embeddings h (k×d).
RecoveryReport ties_recovery_report(const num::Tensor& h, const corpus::PlantedTies& ties,
                                    const graph::TiesGraph& graph);

void write_report(std::ostream& out, const RecoveryReport& report);

struct Projection {
  std::vector<double> coords;  // k×2
  std::vector<double> axes;    // 2×d principal directions
  std::vector<double> variances;
};

// Mean-centres h and projects it onto its top two principal axes found by
// power iteration with deflation.
Projection project_embeddings(const num::Tensor& h);
// Reconstruction error (sum of squares) using the first `axes` components.
double reconstruction_error(const num::Tensor& h, const Projection& p, std::size_t axes);

void write_projection(std::ostream& out, const Projection& p, const corpus::RelationMap& relations);

}  // namespace tieforge::eval
