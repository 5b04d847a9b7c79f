#include "tieforge/evalkit/evaluation.hpp"

#include <algorithm>
#include <iomanip>
#include <ostream>
#include <tuple>

#include "tieforge/errors.hpp"

namespace tieforge::eval {

std::vector<PredictionRecord> collect_predictions(const std::vector<corpus::Bag>& bags,
                                                  const trainer::Predictor& predictor) {
  std::vector<PredictionRecord> records;
  records.reserve(bags.size() * (predictor.relations() - 1));
  for (const auto& bag : bags) {
    const auto probs = predictor.predict(bag);
    for (std::size_t r = 0; r < probs.size(); ++r) {
      if (r == corpus::kNaRelation) continue;
      records.push_back({bag.bag_id, r, probs[r], bag.has_label(r)});
    }
  }
  return records;
}

void rank_records(std::vector<PredictionRecord>& records) {
  std::sort(records.begin(), records.end(), [](const PredictionRecord& a, const PredictionRecord& b) {
    return std::tie(b.score, a.bag_id, a.relation) < std::tie(a.score, b.bag_id, b.relation);
  });
}

PrCurve pr_curve(std::vector<PredictionRecord> records, std::size_t total_gold) {
  if (records.empty()) throw EvaluationError("pr_curve: no prediction records");
  if (total_gold == 0) throw EvaluationError("pr_curve: test set has no gold non-NA facts");
  rank_records(records);
  PrCurve curve;
  curve.points.reserve(records.size());
  std::size_t correct = 0;
  for (std::size_t n = 0; n < records.size(); ++n) {
    correct += records[n].is_correct;
    curve.points.push_back({records[n].score, static_cast<double>(correct) / static_cast<double>(n + 1),
                            static_cast<double>(correct) / static_cast<double>(total_gold)});
  }
  double prev_recall = 0.0, prev_precision = curve.points.front().precision;
  for (const auto& p : curve.points) {
    curve.auc += (p.recall - prev_recall) * (p.precision + prev_precision) / 2.0;
    prev_recall = p.recall;
    prev_precision = p.precision;
  }
  return curve;
}

PrCurve pr_curve(std::vector<PredictionRecord> records) {
  const auto gold = static_cast<std::size_t>(
      std::count_if(records.begin(), records.end(), [](const PredictionRecord& r) { return r.is_correct; }));
  return pr_curve(std::move(records), gold);
}

double p_at_n(std::vector<PredictionRecord> records, std::size_t n) {
  if (n == 0 || n > records.size()) {
    throw Error("p_at_n: n=" + std::to_string(n) + " outside [1," + std::to_string(records.size()) + "]");
  }
  rank_records(records);
  const auto correct = std::count_if(records.begin(), records.begin() + static_cast<std::ptrdiff_t>(n),
                                     [](const PredictionRecord& r) { return r.is_correct; });
  return static_cast<double>(correct) / static_cast<double>(n);
}

void write_pr_csv(std::ostream& out, const PrCurve& curve) {
  out << "threshold,precision,recall\n" << std::setprecision(17);
  for (const auto& p : curve.points) out << p.threshold << ',' << p.precision << ',' << p.recall << '\n';
  out << "auc=" << curve.auc << '\n';
}

}  // namespace tieforge::eval
