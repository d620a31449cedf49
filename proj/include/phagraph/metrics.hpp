#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "phagraph/common.hpp"

namespace phagraph {

inline const std::vector<double> kDefaultFprTargets{0.0001, 0.001, 0.005};

struct OperatingPoint {
  double threshold = 0.0;  // classify positive when score >= threshold
  double fpr = 0.0;
  double tpr = 0.0;
  long long tp = 0, fp = 0, tn = 0, fn = 0;
};

struct EvalReport {
  std::vector<std::pair<double, double>> roc;  // (fpr, tpr), from (0,0) to (1,1)
  std::map<double, OperatingPoint> tpr_at;     // FPR target -> conservative operating point
  double auc = 0.0;
  double ap = 0.0;

  std::string method;
  std::uint64_t seed = 0;
  std::string dataset_hash;
  std::map<std::string, double> timings_sec;
  std::map<std::string, double> counts;  // free-form bookkeeping (test sizes etc.)
};

struct ScoredItem {
  double score;
  bool positive;
};

// Threshold sweep over distinct scores with ties grouped into single
// operating points. TPR at a target FPR is the highest TPR among points with
// fpr <= target (conservative step interpolation). AP is the
// precision-weighted recall sum over the same points.
EvalReport roc_and_metrics(const std::vector<ScoredItem>& items,
                           const std::vector<double>& fpr_targets = kDefaultFprTargets);

EvalReport roc_and_metrics(const Vec& scores, const std::vector<char>& labels,
                           const std::vector<double>& fpr_targets = kDefaultFprTargets);

}  // namespace phagraph
