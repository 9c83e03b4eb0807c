#pragma once

#include <map>
#include <string>
#include <vector>

#include "cryptoscope/eval/metrics.hpp"
#include "cryptoscope/learn/classifier.hpp"
#include "cryptoscope/util.hpp"

namespace cryptoscope::eval {

inline constexpr std::size_t kDefaultFolds = 3;

// Stratified fold ids. Each class is shuffled on its own stream and dealt
// round-robin, continuing the deal position across classes so overall fold
// sizes stay within one of each other.
inline std::vector<int> stratified_folds(std::span<const int> y, std::size_t folds, std::uint64_t seed) {
  if (folds < 2) throw EvalError("need at least 2 folds");
  std::map<int, std::vector<std::size_t>> by_class;
  for (std::size_t i = 0; i < y.size(); ++i) by_class[y[i]].push_back(i);
  std::vector<int> fold(y.size(), -1);
  std::size_t deal = 0;
  for (auto& [c, idx] : by_class) {
    if (idx.size() < folds)
      throw EvalError("class " + std::to_string(c) + " has " + std::to_string(idx.size()) + " samples, fewer than " +
                      std::to_string(folds) + " folds");
    Rng rng(derive_seed(seed, "cv/class/" + std::to_string(c)));
    shuffle(idx.begin(), idx.end(), rng);
    for (auto i : idx) fold[i] = static_cast<int>(deal++ % folds);
  }
  return fold;
}

struct CvReport {
  std::string model;
  std::size_t folds = kDefaultFolds;
  std::uint64_t seed = 0;
  std::vector<int> fold_of;  // per sample
  std::vector<double> fold_accuracy;
  double mean_accuracy = 0;
  std::vector<int> truth;       // pooled over validation folds, dataset order
  std::vector<int> predicted;
  ClassificationMetrics pooled;  // P/R/F1 over the pooled predictions

  friend bool operator==(const CvReport& a, const CvReport& b) {
    return a.model == b.model && a.folds == b.folds && a.seed == b.seed && a.fold_of == b.fold_of &&
           a.fold_accuracy == b.fold_accuracy && a.predicted == b.predicted;
  }
};

inline CvReport cross_validate(const learn::Matrix& x, std::span<const int> y, std::size_t n_classes,
                               const learn::ModelSpec& spec, std::size_t folds, std::uint64_t seed) {
  if (x.rows() != y.size()) throw EvalError("sample/label count mismatch");
  CvReport r;
  r.model = spec.name();
  r.folds = folds;
  r.seed = seed;
  r.fold_of = stratified_folds(y, folds, seed);
  r.truth.assign(y.begin(), y.end());
  r.predicted.assign(y.size(), -1);
  for (std::size_t f = 0; f < folds; ++f) {
    std::vector<std::size_t> train, test;
    for (std::size_t i = 0; i < y.size(); ++i) (r.fold_of[i] == static_cast<int>(f) ? test : train).push_back(i);
    std::vector<int> ytrain;
    for (auto i : train) ytrain.push_back(y[i]);
    const auto model = learn::train_classifier(spec, x.select(train), ytrain, n_classes);
    std::size_t correct = 0;
    for (auto i : test) {
      r.predicted[i] = learn::predict(model, x.row(i)).label;
      correct += r.predicted[i] == y[i];
    }
    r.fold_accuracy.push_back(static_cast<double>(correct) / static_cast<double>(test.size()));
  }
  double s = 0;
  for (double a : r.fold_accuracy) s += a;
  r.mean_accuracy = s / static_cast<double>(folds);
  r.pooled = classification_metrics(r.truth, r.predicted, n_classes);
  return r;
}

}  // namespace cryptoscope::eval
