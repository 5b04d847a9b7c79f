#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "tieforge/corpus/corpus.hpp"
#include "tieforge/trainer/trainer.hpp"

namespace tieforge::eval {

struct PredictionRecord {
  std::string bag_id;
  std::size_t relation = 0;  // never NA
  double score = 0.0;
  bool is_correct = false;
};

struct PrPoint {
  double threshold = 0.0;  // score of the n-th record
  double precision = 0.0;
  double recall = 0.0;
};

struct PrCurve {
  std::vector<PrPoint> points;  // one per prefix, descending score
  double auc = 0.0;
};

// One record per (bag, non-NA relation).
std::vector<PredictionRecord> collect_predictions(const std::vector<corpus::Bag>& bags,
                                                  const trainer::Predictor& predictor);

// Descending score, ties by bag_id then relation.
void rank_records(std::vector<PredictionRecord>& records);

// Recall is relative to `total_gold` non-NA facts. The area is the trapezoid
// rule over recall, starting from (recall 0, first precision).
PrCurve pr_curve(std::vector<PredictionRecord> records, std::size_t total_gold);
// total_gold = number of correct records.
PrCurve pr_curve(std::vector<PredictionRecord> records);

double p_at_n(std::vector<PredictionRecord> records, std::size_t n);

// `threshold,precision,recall` rows then `auc=<value>`.
void write_pr_csv(std::ostream& out, const PrCurve& curve);

}  // namespace tieforge::eval
