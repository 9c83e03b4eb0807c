#pragma once

#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "cryptoscope/learn/kernel.hpp"
#include "cryptoscope/learn/naive_bayes.hpp"
#include "cryptoscope/learn/svm.hpp"
#include "cryptoscope/learn/tree.hpp"

namespace cryptoscope::learn {

enum class ModelKind { SVM, GNB, MNB, TREE };

inline std::string_view model_kind_name(ModelKind k) {
  constexpr std::string_view names[] = {"svm", "gnb", "mnb", "tree"};
  return names[static_cast<int>(k)];
}

inline std::optional<ModelKind> parse_model_kind(std::string_view s) {
  for (auto k : {ModelKind::SVM, ModelKind::GNB, ModelKind::MNB, ModelKind::TREE})
    if (model_kind_name(k) == s) return k;
  return std::nullopt;
}

// Learner choice plus its hyperparameters.
struct ModelSpec {
  ModelKind kind = ModelKind::TREE;
  KernelSpec kernel;  // SVM only
  double C = 1.0;     // SVM only
  double alpha = 1.0; // MNB only

  std::string name() const {
    if (kind == ModelKind::SVM) return "svm-" + std::string(kernel_name(kernel.kind));
    return std::string(model_kind_name(kind));
  }

  friend bool operator==(const ModelSpec&, const ModelSpec&) = default;
};

using Classifier = std::variant<SvmModel, GaussianNb, MultinomialNb, DecisionTree>;

struct Prediction {
  int label = 0;
  std::vector<double> scores;  // one per class; meaning depends on the learner
};

inline Classifier train_classifier(const ModelSpec& spec, const Matrix& x, std::span<const int> y,
                                   std::size_t n_classes) {
  switch (spec.kind) {
    case ModelKind::SVM:
      return svm_train(x, y, spec.kernel, spec.C);
    case ModelKind::GNB:
      return gnb_train(x, y, n_classes);
    case ModelKind::MNB:
      return mnb_train(x, y, spec.alpha, n_classes);
    case ModelKind::TREE:
      return tree_train(x, y, n_classes);
  }
  throw TrainError("unknown model kind");
}

// SVM scores are summed one-vs-one decision values; tree scores are the
// class fractions at the reached leaf; naive Bayes scores are log-scores.
inline Prediction predict(const Classifier& model, std::span<const double> x) {
  struct Visitor {
    std::span<const double> x;
    Prediction operator()(const SvmModel& m) const {
      auto r = svm_vote(m, x);
      return {r.winner, r.scores};
    }
    Prediction operator()(const GaussianNb& m) const {
      auto r = gnb_predict(m, x);
      return {r.label, r.scores};
    }
    Prediction operator()(const MultinomialNb& m) const {
      auto r = mnb_predict(m, x);
      return {r.label, r.scores};
    }
    Prediction operator()(const DecisionTree& t) const {
      const auto& leaf = tree_leaf(t, x);
      double total = 0;
      for (auto c : leaf.histogram) total += static_cast<double>(c);
      std::vector<double> frac;
      for (auto c : leaf.histogram) frac.push_back(total > 0 ? static_cast<double>(c) / total : 0.0);
      return {leaf_class(leaf), frac};
    }
  };
  return std::visit(Visitor{x}, model);
}

inline std::size_t classifier_dimension(const Classifier& model) {
  struct Visitor {
    std::size_t operator()(const SvmModel& m) const { return m.dimension; }
    std::size_t operator()(const GaussianNb& m) const { return m.mean.cols(); }
    std::size_t operator()(const MultinomialNb& m) const { return m.log_prob.cols(); }
    std::size_t operator()(const DecisionTree& t) const { return t.dimension; }
  };
  return std::visit(Visitor{}, model);
}

}  // namespace cryptoscope::learn
