#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include <json.hpp>

#include "phagraph/common.hpp"
#include "phagraph/dataset.hpp"

namespace phagraph {

enum class ClassifierKind { TreeEnsemble, Logistic, GradientBoosting };

ClassifierKind parse_classifier_kind(const std::string& name);
std::string classifier_kind_name(ClassifierKind k);

struct ClassifierParams {
  int n_trees = 20;           // tree ensemble
  int boosting_rounds = 50;   // gradient boosting
  int boosting_depth = 3;
  double boosting_shrinkage = 0.1;
  int logistic_iterations = 25;
  double logistic_ridge = 1e-6;
};

// Fitted binary classifier exposing scores in [0, 1]. Immutable after
// training and shareable across threads.
class Classifier {
 public:
  virtual ~Classifier() = default;

  virtual double score_row(Eigen::Ref<const RowVec> features) const = 0;
  Vec score(const Mat& features) const;

  ClassifierKind kind() const { return kind_; }
  int n_features() const { return n_features_; }
  std::uint64_t seed() const { return seed_; }

  virtual nlohmann::json to_json() const = 0;
  static std::unique_ptr<Classifier> from_json(const nlohmann::json& doc);

 protected:
  ClassifierKind kind_ = ClassifierKind::TreeEnsemble;
  int n_features_ = 0;
  std::uint64_t seed_ = 0;
};

std::unique_ptr<Classifier> train_classifier(const Mat& features, const std::vector<char>& labels,
                                             ClassifierKind kind, std::uint64_t seed,
                                             const ClassifierParams& params = {});

std::unique_ptr<Classifier> train_classifier(const LabeledEdgeSet& train, ClassifierKind kind,
                                             std::uint64_t seed,
                                             const ClassifierParams& params = {});

// Scores candidates in input order; the set's combiner must match the one the
// model was trained with (checked by the caller that owns model metadata).
Vec predict_scores(const Classifier& model, const LabeledEdgeSet& candidates);

}  // namespace phagraph
