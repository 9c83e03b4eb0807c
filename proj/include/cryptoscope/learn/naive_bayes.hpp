#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <span>
#include <vector>

#include "cryptoscope/learn/matrix.hpp"

namespace cryptoscope::learn {

struct NbPrediction {
  int label = 0;
  std::vector<double> scores;
};

namespace detail {

// argmax with ties to the lowest index.
inline int argmax(std::span<const double> v) {
  int best = 0;
  for (int i = 1; i < static_cast<int>(v.size()); ++i)
    if (v[i] > v[best]) best = i;
  return best;
}

inline std::vector<std::size_t> class_counts(std::span<const int> y, std::size_t n_classes) {
  std::vector<std::size_t> counts(n_classes, 0);
  for (int v : y) ++counts[static_cast<std::size_t>(v)];
  for (std::size_t c = 0; c < n_classes; ++c)
    if (counts[c] == 0) throw TrainError("class " + std::to_string(c) + " has no training samples");
  return counts;
}

}  // namespace detail

struct GaussianNb {
  std::vector<double> prior;
  Matrix mean;      // n_classes x dim
  Matrix variance;  // n_classes x dim, floored at epsilon
  double epsilon = 0.0;

  friend bool operator==(const GaussianNb&, const GaussianNb&) = default;
};

inline constexpr double kVarianceFloorScale = 1e-9;

// Per-class means and (population) variances. Variances are floored at
// 1e-9 times the largest per-feature variance of the whole dataset.
inline GaussianNb gnb_train(const Matrix& x, std::span<const int> y, std::size_t n_classes = 0) {
  if (x.rows() != y.size()) throw TrainError("sample/label count mismatch");
  if (x.empty()) throw TrainError("empty training set");
  if (n_classes == 0) n_classes = count_classes(y);
  const auto counts = detail::class_counts(y, n_classes);
  const std::size_t d = x.cols(), n = x.rows();

  GaussianNb m;
  m.mean = Matrix(n_classes, d);
  m.variance = Matrix(n_classes, d);
  for (std::size_t c = 0; c < n_classes; ++c) m.prior.push_back(static_cast<double>(counts[c]) / static_cast<double>(n));

  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < d; ++j) m.mean(static_cast<std::size_t>(y[i]), j) += x(i, j);
  for (std::size_t c = 0; c < n_classes; ++c)
    for (std::size_t j = 0; j < d; ++j) m.mean(c, j) /= static_cast<double>(counts[c]);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < d; ++j) {
      const double dv = x(i, j) - m.mean(static_cast<std::size_t>(y[i]), j);
      m.variance(static_cast<std::size_t>(y[i]), j) += dv * dv;
    }

  double max_var = 0.0;
  for (std::size_t j = 0; j < d; ++j) {
    double mu = 0.0, ss = 0.0;
    for (std::size_t i = 0; i < n; ++i) mu += x(i, j);
    mu /= static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i) ss += (x(i, j) - mu) * (x(i, j) - mu);
    max_var = std::max(max_var, ss / static_cast<double>(n));
  }
  m.epsilon = max_var > 0 ? kVarianceFloorScale * max_var : kVarianceFloorScale;
  for (std::size_t c = 0; c < n_classes; ++c)
    for (std::size_t j = 0; j < d; ++j)
      m.variance(c, j) = std::max(m.variance(c, j) / static_cast<double>(counts[c]), m.epsilon);
  return m;
}

// Returns the argmax class and the normalized per-class log-posteriors
// log p(c | x).
inline NbPrediction gnb_predict(const GaussianNb& m, std::span<const double> x) {
  require_dim(x, m.mean.cols());
  const std::size_t k = m.prior.size();
  NbPrediction p;
  p.scores.resize(k);
  for (std::size_t c = 0; c < k; ++c) {
    double s = std::log(m.prior[c]);
    for (std::size_t j = 0; j < x.size(); ++j) {
      const double var = m.variance(c, j);
      const double dv = x[j] - m.mean(c, j);
      s += -0.5 * std::log(2.0 * std::numbers::pi * var) - dv * dv / (2.0 * var);
    }
    p.scores[c] = s;
  }
  p.label = detail::argmax(p.scores);
  const double top = p.scores[static_cast<std::size_t>(p.label)];
  double z = 0.0;
  for (double s : p.scores) z += std::exp(s - top);
  const double lse = top + std::log(z);
  for (double& s : p.scores) s -= lse;
  return p;
}

struct MultinomialNb {
  double alpha = 1.0;
  std::vector<double> log_prior;
  Matrix log_prob;  // n_classes x dim, log p_ki

  friend bool operator==(const MultinomialNb&, const MultinomialNb&) = default;
};

inline void require_nonnegative(std::span<const double> x) {
  for (double v : x)
    if (!(v >= 0.0)) throw DomainError("multinomial naive Bayes needs nonnegative features");
}

// Laplace/Lidstone-smoothed feature probabilities
// p_ki = (N_ki + alpha) / (N_k + alpha * dim).
inline MultinomialNb mnb_train(const Matrix& x, std::span<const int> y, double alpha = 1.0, std::size_t n_classes = 0) {
  if (x.rows() != y.size()) throw TrainError("sample/label count mismatch");
  if (x.empty()) throw TrainError("empty training set");
  if (!(alpha > 0)) throw TrainError("alpha must be positive");
  if (n_classes == 0) n_classes = count_classes(y);
  const auto counts = detail::class_counts(y, n_classes);
  const std::size_t d = x.cols();
  for (std::size_t i = 0; i < x.rows(); ++i) require_nonnegative(x.row(i));

  MultinomialNb m;
  m.alpha = alpha;
  Matrix feat(n_classes, d);
  for (std::size_t i = 0; i < x.rows(); ++i)
    for (std::size_t j = 0; j < d; ++j) feat(static_cast<std::size_t>(y[i]), j) += x(i, j);
  m.log_prob = Matrix(n_classes, d);
  for (std::size_t c = 0; c < n_classes; ++c) {
    m.log_prior.push_back(std::log(static_cast<double>(counts[c]) / static_cast<double>(x.rows())));
    double total = 0.0;
    for (std::size_t j = 0; j < d; ++j) total += feat(c, j);
    const double denom = total + alpha * static_cast<double>(d);
    for (std::size_t j = 0; j < d; ++j) m.log_prob(c, j) = std::log((feat(c, j) + alpha) / denom);
  }
  return m;
}

// Scores are log p(C_k) + sum_i x_i log p_ki; the multinomial coefficient is
// the same for every class and is left out.
inline NbPrediction mnb_predict(const MultinomialNb& m, std::span<const double> x) {
  require_dim(x, m.log_prob.cols());
  require_nonnegative(x);
  NbPrediction p;
  for (std::size_t c = 0; c < m.log_prior.size(); ++c) {
    double s = m.log_prior[c];
    for (std::size_t j = 0; j < x.size(); ++j) s += x[j] * m.log_prob(c, j);
    p.scores.push_back(s);
  }
  p.label = detail::argmax(p.scores);
  return p;
}

}  // namespace cryptoscope::learn
