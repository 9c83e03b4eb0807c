#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <span>
#include <vector>

#include "cryptoscope/error.hpp"

namespace cryptoscope::eval {

// One-vs-rest counts for one class.
struct ConfusionCounts {
  std::size_t tp = 0, fp = 0, fn = 0, tn = 0;
  friend bool operator==(const ConfusionCounts&, const ConfusionCounts&) = default;
};

struct ClassScores {
  ConfusionCounts counts;
  double precision = 0, recall = 0, f1 = 0;
  bool present = false;  // class occurs in the true labels
};

struct ClassificationMetrics {
  std::vector<ClassScores> per_class;
  double precision = 0, recall = 0, f1 = 0;  // macro over classes present in the truth
  double accuracy = 0;
};

inline double ratio_or_zero(double num, double den) { return den > 0 ? num / den : 0.0; }

inline double harmonic(double p, double r) { return p + r > 0 ? 2 * p * r / (p + r) : 0.0; }

// Labels are class indices. `n_classes` of 0 means one past the largest label seen.
inline ClassificationMetrics classification_metrics(std::span<const int> truth, std::span<const int> pred,
                                                    std::size_t n_classes = 0) {
  if (truth.size() != pred.size()) throw EvalError("label sequences differ in length");
  if (truth.empty()) throw EvalError("no labels to score");
  for (std::size_t i = 0; i < truth.size(); ++i) {
    if (truth[i] < 0 || pred[i] < 0) throw EvalError("negative class index");
    n_classes = std::max<std::size_t>(n_classes, static_cast<std::size_t>(std::max(truth[i], pred[i])) + 1);
  }
  ClassificationMetrics m;
  m.per_class.resize(n_classes);
  std::size_t correct = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    correct += truth[i] == pred[i];
    for (std::size_t c = 0; c < n_classes; ++c) {
      const bool t = truth[i] == static_cast<int>(c), p = pred[i] == static_cast<int>(c);
      auto& k = m.per_class[c].counts;
      if (t && p) ++k.tp;
      else if (p) ++k.fp;
      else if (t) ++k.fn;
      else ++k.tn;
    }
  }
  std::size_t present = 0;
  for (auto& cs : m.per_class) {
    const auto& k = cs.counts;
    cs.precision = ratio_or_zero(static_cast<double>(k.tp), static_cast<double>(k.tp + k.fp));
    cs.recall = ratio_or_zero(static_cast<double>(k.tp), static_cast<double>(k.tp + k.fn));
    cs.f1 = harmonic(cs.precision, cs.recall);
    cs.present = k.tp + k.fn > 0;
    if (!cs.present) continue;
    ++present;
    m.precision += cs.precision;
    m.recall += cs.recall;
    m.f1 += cs.f1;
  }
  m.precision /= static_cast<double>(present);
  m.recall /= static_cast<double>(present);
  m.f1 /= static_cast<double>(present);
  m.accuracy = static_cast<double>(correct) / static_cast<double>(truth.size());
  return m;
}

struct ClusterMetrics {
  double homogeneity = 0, completeness = 0, v_score = 0;
};

namespace detail {

// Summing in sorted order makes the result independent of how labels and
// cluster ids happen to be numbered, so swapping the two roles is exact.
inline double sorted_sum(std::vector<double> terms) {
  std::ranges::sort(terms);
  double s = 0;
  for (double t : terms) s += t;
  return s;
}

inline double entropy(const std::map<int, double>& counts, double n) {
  std::vector<double> terms;
  for (const auto& [_, c] : counts) terms.push_back(-c / n * std::log(c / n));
  return sorted_sum(std::move(terms));
}

}  // namespace detail

// Entropy-based scores (natural log). h = 1 - H(C|K)/H(C), c = 1 - H(K|C)/H(K),
// v their harmonic mean.
inline ClusterMetrics cluster_metrics(std::span<const int> labels, std::span<const int> clusters) {
  if (labels.size() != clusters.size()) throw EvalError("label and cluster sequences differ in length");
  if (labels.empty()) throw EvalError("no labels to score");
  const double n = static_cast<double>(labels.size());
  std::map<int, double> nc, nk;
  std::map<std::pair<int, int>, double> joint;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    nc[labels[i]] += 1;
    nk[clusters[i]] += 1;
    joint[{labels[i], clusters[i]}] += 1;
  }
  const double hc = detail::entropy(nc, n), hk = detail::entropy(nk, n);
  std::vector<double> tc, tk;
  for (const auto& [key, v] : joint) {
    tc.push_back(-v / n * std::log(v / nk[key.second]));
    tk.push_back(-v / n * std::log(v / nc[key.first]));
  }
  const double hc_given_k = detail::sorted_sum(std::move(tc)), hk_given_c = detail::sorted_sum(std::move(tk));
  ClusterMetrics m;
  m.homogeneity = hc == 0 ? 1.0 : 1.0 - hc_given_k / hc;
  m.completeness = hk == 0 ? 1.0 : 1.0 - hk_given_c / hk;
  m.homogeneity = std::clamp(m.homogeneity, 0.0, 1.0);
  m.completeness = std::clamp(m.completeness, 0.0, 1.0);
  m.v_score = harmonic(m.homogeneity, m.completeness);
  return m;
}

}  // namespace cryptoscope::eval
