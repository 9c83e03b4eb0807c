#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "cryptoscope/learn/kernel.hpp"
#include "cryptoscope/learn/matrix.hpp"

namespace cryptoscope::learn {

struct SmoOptions {
  double tolerance = 1e-3;       // KKT violation gap at which the solver stops
  std::size_t max_iter = 0;      // 0: max(100000, 100 * n)
};

// Two-class kernel machine: f(x) = sum_i coef_i K(sv_i, x) + bias, with
// coef_i = alpha_i * y_i. Positive f means the +1 class.
struct BinarySvm {
  KernelSpec kernel;  // gamma resolved
  double C = 1.0;
  Matrix support_vectors;
  std::vector<double> coef;
  double bias = 0.0;
  std::size_t iterations = 0;
  bool converged = true;

  double decision(std::span<const double> x) const {
    require_dim(x, support_vectors.cols());
    double f = bias;
    for (std::size_t i = 0; i < support_vectors.rows(); ++i) f += coef[i] * kernel_eval(kernel, support_vectors.row(i), x);
    return f;
  }

  friend bool operator==(const BinarySvm&, const BinarySvm&) = default;
};

namespace detail {

// SMO with second-order working-set selection (maximal violating pair for
// the first index, largest guaranteed objective decrease for the second).
class SmoSolver {
 public:
  SmoSolver(const Matrix& x, std::span<const int> y, const KernelSpec& k, double c, const SmoOptions& opt)
      : n_(x.rows()), y_(y.begin(), y.end()), c_(c), opt_(opt), q_(n_ * n_), alpha_(n_, 0.0), grad_(n_, -1.0) {
    for (std::size_t i = 0; i < n_; ++i)
      for (std::size_t j = i; j < n_; ++j) {
        const double v = y_[i] * y_[j] * kernel_eval(k, x.row(i), x.row(j));
        q_[i * n_ + j] = v;
        q_[j * n_ + i] = v;
      }
  }

  void solve() {
    const std::size_t max_iter = opt_.max_iter ? opt_.max_iter : std::max<std::size_t>(100000, 100 * n_);
    converged_ = false;
    for (iter_ = 0; iter_ < max_iter; ++iter_) {
      std::size_t i = 0, j = 0;
      if (!select(i, j)) {
        converged_ = true;
        break;
      }
      update(i, j);
    }
  }

  const std::vector<double>& alpha() const { return alpha_; }
  std::size_t iterations() const { return iter_; }
  bool converged() const { return converged_; }

  // Decision-function offset: mean of y_i G_i over free vectors, otherwise
  // the midpoint of the feasible interval.
  double bias() const {
    double ub = kInf, lb = -kInf, sum_free = 0.0;
    std::size_t nr_free = 0;
    for (std::size_t i = 0; i < n_; ++i) {
      const double yg = y_[i] * grad_[i];
      if (at_upper(i)) {
        if (y_[i] < 0) ub = std::min(ub, yg); else lb = std::max(lb, yg);
      } else if (at_lower(i)) {
        if (y_[i] > 0) ub = std::min(ub, yg); else lb = std::max(lb, yg);
      } else {
        ++nr_free;
        sum_free += yg;
      }
    }
    const double rho = nr_free > 0 ? sum_free / static_cast<double>(nr_free) : (ub + lb) / 2.0;
    return -rho;
  }

 private:
  static constexpr double kInf = std::numeric_limits<double>::infinity();
  static constexpr double kTau = 1e-12;

  bool at_upper(std::size_t i) const { return alpha_[i] >= c_; }
  bool at_lower(std::size_t i) const { return alpha_[i] <= 0.0; }
  double q(std::size_t i, std::size_t j) const { return q_[i * n_ + j]; }

  bool select(std::size_t& out_i, std::size_t& out_j) const {
    double gmax = -kInf, gmax2 = -kInf;
    std::ptrdiff_t gi = -1, gj = -1;
    for (std::size_t t = 0; t < n_; ++t) {
      if (y_[t] > 0) {
        if (!at_upper(t) && -grad_[t] > gmax) { gmax = -grad_[t]; gi = static_cast<std::ptrdiff_t>(t); }
      } else {
        if (!at_lower(t) && grad_[t] > gmax) { gmax = grad_[t]; gi = static_cast<std::ptrdiff_t>(t); }
      }
    }
    if (gi < 0) return false;
    const auto i = static_cast<std::size_t>(gi);
    double obj_min = kInf;
    for (std::size_t t = 0; t < n_; ++t) {
      double grad_diff;
      if (y_[t] > 0) {
        if (at_lower(t)) continue;
        gmax2 = std::max(gmax2, grad_[t]);
        grad_diff = gmax + grad_[t];
      } else {
        if (at_upper(t)) continue;
        gmax2 = std::max(gmax2, -grad_[t]);
        grad_diff = gmax - grad_[t];
      }
      if (grad_diff > 0) {
        // K_ii + K_tt - 2 K_it
        const double quad = q(i, i) + q(t, t) - 2.0 * y_[i] * y_[t] * q(i, t);
        const double obj = -(grad_diff * grad_diff) / (quad > 0 ? quad : kTau);
        if (obj < obj_min) { obj_min = obj; gj = static_cast<std::ptrdiff_t>(t); }
      }
    }
    if (gmax + gmax2 < opt_.tolerance || gj < 0) return false;
    out_i = i;
    out_j = static_cast<std::size_t>(gj);
    return true;
  }

  void update(std::size_t i, std::size_t j) {
    const double old_i = alpha_[i], old_j = alpha_[j];
    double& ai = alpha_[i];
    double& aj = alpha_[j];
    if (y_[i] != y_[j]) {
      double quad = q(i, i) + q(j, j) + 2.0 * q(i, j);
      if (quad <= 0) quad = kTau;
      const double delta = (-grad_[i] - grad_[j]) / quad;
      const double diff = ai - aj;
      ai += delta;
      aj += delta;
      if (diff > 0) {
        if (aj < 0) { aj = 0; ai = diff; }
      } else {
        if (ai < 0) { ai = 0; aj = -diff; }
      }
      if (diff > 0) {
        if (ai > c_) { ai = c_; aj = c_ - diff; }
      } else {
        if (aj > c_) { aj = c_; ai = c_ + diff; }
      }
    } else {
      double quad = q(i, i) + q(j, j) - 2.0 * q(i, j);
      if (quad <= 0) quad = kTau;
      const double delta = (grad_[i] - grad_[j]) / quad;
      const double sum = ai + aj;
      ai -= delta;
      aj += delta;
      if (sum > c_) {
        if (ai > c_) { ai = c_; aj = sum - c_; }
      } else {
        if (aj < 0) { aj = 0; ai = sum; }
      }
      if (sum > c_) {
        if (aj > c_) { aj = c_; ai = sum - c_; }
      } else {
        if (ai < 0) { ai = 0; aj = sum; }
      }
    }
    const double di = ai - old_i, dj = aj - old_j;
    for (std::size_t k = 0; k < n_; ++k) grad_[k] += q(i, k) * di + q(j, k) * dj;
  }

  std::size_t n_;
  std::vector<double> y_;
  double c_;
  SmoOptions opt_;
  std::vector<double> q_;
  std::vector<double> alpha_;
  std::vector<double> grad_;
  std::size_t iter_ = 0;
  bool converged_ = false;
};

}  // namespace detail

// `y` holds +1 / -1 labels.
inline BinarySvm svm_train_binary(const Matrix& x, std::span<const int> y, const KernelSpec& kernel, double C = 1.0,
                                  const SmoOptions& opt = {}, std::vector<double>* alpha_out = nullptr) {
  if (x.rows() != y.size()) throw TrainError("sample/label count mismatch");
  if (!(C > 0)) throw TrainError("C must be positive");
  bool pos = false, neg = false;
  for (int v : y) {
    if (v == 1) pos = true;
    else if (v == -1) neg = true;
    else throw TrainError("binary SVM labels must be +1 or -1");
  }
  if (!pos || !neg) throw TrainError("SVM training needs both classes present");
  for (std::size_t i = 0; i < x.rows(); ++i)
    for (double v : x.row(i))
      if (!std::isfinite(v)) throw TrainError("non-finite feature value");

  BinarySvm model;
  model.kernel = kernel.resolved(x.cols());
  model.C = C;
  detail::SmoSolver solver(x, y, model.kernel, C, opt);
  solver.solve();
  const auto& alpha = solver.alpha();
  model.support_vectors = Matrix(0, x.cols());
  for (std::size_t i = 0; i < x.rows(); ++i) {
    if (alpha[i] > 0) {
      model.support_vectors.push_row(x.row(i));
      model.coef.push_back(alpha[i] * y[i]);
    }
  }
  model.bias = solver.bias();
  model.iterations = solver.iterations();
  model.converged = solver.converged();
  if (alpha_out) *alpha_out = alpha;
  return model;
}

// One-vs-one multiclass SVM: one binary machine per unordered class pair
// (a, b), a < b, with a as the positive class.
struct SvmModel {
  struct Pair {
    int a = 0;
    int b = 1;
    BinarySvm machine;
    friend bool operator==(const Pair&, const Pair&) = default;
  };
  std::size_t n_classes = 0;
  std::size_t dimension = 0;
  KernelSpec kernel;
  double C = 1.0;
  std::vector<Pair> pairs;

  friend bool operator==(const SvmModel&, const SvmModel&) = default;
};

inline SvmModel svm_train(const Matrix& x, std::span<const int> y, const KernelSpec& kernel, double C = 1.0,
                          const SmoOptions& opt = {}) {
  if (x.rows() != y.size()) throw TrainError("sample/label count mismatch");
  SvmModel model;
  model.n_classes = count_classes(y);
  model.dimension = x.cols();
  model.kernel = kernel.resolved(x.cols());
  model.C = C;
  if (model.n_classes < 2) throw TrainError("SVM training needs at least two classes");
  for (int a = 0; a < static_cast<int>(model.n_classes); ++a) {
    for (int b = a + 1; b < static_cast<int>(model.n_classes); ++b) {
      std::vector<std::size_t> idx;
      std::vector<int> yy;
      for (std::size_t i = 0; i < y.size(); ++i) {
        if (y[i] == a || y[i] == b) {
          idx.push_back(i);
          yy.push_back(y[i] == a ? 1 : -1);
        }
      }
      model.pairs.push_back({a, b, svm_train_binary(x.select(idx), yy, model.kernel, C, opt)});
    }
  }
  return model;
}

struct VoteResult {
  int winner = 0;
  std::vector<int> votes;
  std::vector<double> scores;  // summed decision values oriented toward each class
};

// Most votes wins; ties go to the larger summed decision value, then to the
// lowest class index.
inline int resolve_votes(std::span<const int> votes, std::span<const double> scores) {
  int best = 0;
  for (int c = 1; c < static_cast<int>(votes.size()); ++c) {
    if (votes[c] > votes[best] || (votes[c] == votes[best] && scores[c] > scores[best])) best = c;
  }
  return best;
}

inline VoteResult svm_vote(const SvmModel& model, std::span<const double> x) {
  require_dim(x, model.dimension);
  VoteResult r;
  r.votes.assign(model.n_classes, 0);
  r.scores.assign(model.n_classes, 0.0);
  for (const auto& p : model.pairs) {
    const double f = p.machine.decision(x);
    ++r.votes[f > 0 ? p.a : p.b];
    r.scores[p.a] += f;
    r.scores[p.b] -= f;
  }
  r.winner = resolve_votes(r.votes, r.scores);
  return r;
}

inline int svm_predict(const SvmModel& model, std::span<const double> x) { return svm_vote(model, x).winner; }

}  // namespace cryptoscope::learn
