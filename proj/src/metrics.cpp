#include "phagraph/metrics.hpp"

#include <algorithm>
#include <cmath>

namespace phagraph {

EvalReport roc_and_metrics(const std::vector<ScoredItem>& items,
                           const std::vector<double>& fpr_targets) {
  long long n_pos = 0, n_neg = 0;
  for (const auto& it : items) {
    if (!std::isfinite(it.score)) throw ValidationError("non-finite score in metric input");
    (it.positive ? n_pos : n_neg)++;
  }
  if (n_pos == 0 || n_neg == 0)
    throw ValidationError("ROC metrics require both positive and negative labels");

  std::vector<ScoredItem> sorted(items);
  std::sort(sorted.begin(), sorted.end(), [](const ScoredItem& a, const ScoredItem& b) {
    return a.score > b.score;
  });

  EvalReport report;
  report.roc.emplace_back(0.0, 0.0);

  std::vector<OperatingPoint> points;
  points.push_back({std::numeric_limits<double>::infinity(), 0.0, 0.0, 0, 0, n_neg, n_pos});

  long long tp = 0, fp = 0;
  std::size_t i = 0;
  double auc = 0.0, ap = 0.0;
  double prev_fpr = 0.0, prev_tpr = 0.0, prev_recall = 0.0;
  while (i < sorted.size()) {
    const double threshold = sorted[i].score;
    while (i < sorted.size() && sorted[i].score == threshold) {
      (sorted[i].positive ? tp : fp)++;
      ++i;
    }
    OperatingPoint pt;
    pt.threshold = threshold;
    pt.tp = tp;
    pt.fp = fp;
    pt.tn = n_neg - fp;
    pt.fn = n_pos - tp;
    pt.fpr = static_cast<double>(fp) / n_neg;
    pt.tpr = static_cast<double>(tp) / n_pos;
    report.roc.emplace_back(pt.fpr, pt.tpr);

    auc += (pt.fpr - prev_fpr) * (pt.tpr + prev_tpr) / 2.0;
    const double recall = pt.tpr;
    const double precision = static_cast<double>(tp) / (tp + fp);
    ap += (recall - prev_recall) * precision;
    prev_fpr = pt.fpr;
    prev_tpr = pt.tpr;
    prev_recall = recall;
    points.push_back(pt);
  }
  report.auc = auc;
  report.ap = ap;

  for (double target : fpr_targets) {
    OperatingPoint best = points.front();  // (0, 0) is always feasible
    for (const auto& pt : points) {
      if (pt.fpr > target) continue;
      if (pt.tpr > best.tpr || (pt.tpr == best.tpr && pt.fpr < best.fpr)) best = pt;
    }
    report.tpr_at[target] = best;
  }
  return report;
}

EvalReport roc_and_metrics(const Vec& scores, const std::vector<char>& labels,
                           const std::vector<double>& fpr_targets) {
  if (static_cast<std::size_t>(scores.size()) != labels.size())
    throw ValidationError("score/label length mismatch");
  std::vector<ScoredItem> items(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i)
    items[i] = {scores[static_cast<Eigen::Index>(i)], labels[i] != 0};
  return roc_and_metrics(items, fpr_targets);
}

}  // namespace phagraph
