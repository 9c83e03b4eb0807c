#pragma once

#include <cassert>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "cryptoscope/learn/matrix.hpp"
#include "cryptoscope/util.hpp"

namespace cryptoscope::learn {

struct KMeansModel {
  std::size_t k = 0;
  Matrix centroids;
  double inertia = 0.0;
  std::uint64_t seed = 0;
  int n_init = 10;
  int max_iter = 300;
  std::string rng = std::string(kRngName);
  std::vector<int> labels;  // assignment of the training points

  friend bool operator==(const KMeansModel&, const KMeansModel&) = default;
};

// Nearest centroid by squared Euclidean distance, ties to the lowest index.
inline int nearest_centroid(const Matrix& centroids, std::span<const double> x, double* dist = nullptr) {
  int best = 0;
  double bd = std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < centroids.rows(); ++c) {
    const double d = squared_distance(centroids.row(c), x);
    if (d < bd) {
      bd = d;
      best = static_cast<int>(c);
    }
  }
  if (dist) *dist = bd;
  return best;
}

inline int kmeans_assign(const KMeansModel& model, std::span<const double> x) {
  require_dim(x, model.centroids.cols());
  return nearest_centroid(model.centroids, x);
}

inline double inertia_of(const Matrix& x, const Matrix& centroids, std::span<const int> labels) {
  double s = 0.0;
  for (std::size_t i = 0; i < x.rows(); ++i) s += squared_distance(x.row(i), centroids.row(static_cast<std::size_t>(labels[i])));
  return s;
}

namespace detail {

// k-means++: first centre uniform, the rest drawn with probability
// proportional to squared distance from the nearest chosen centre.
inline Matrix kmeanspp_seed(const Matrix& x, std::size_t k, Rng& rng) {
  const std::size_t n = x.rows();
  Matrix c(0, x.cols());
  c.push_row(x.row(uniform_below(rng, n)));
  std::vector<double> d2(n);
  for (std::size_t i = 0; i < n; ++i) d2[i] = squared_distance(x.row(i), c.row(0));
  while (c.rows() < k) {
    double total = 0.0;
    for (double v : d2) total += v;
    std::size_t pick = n - 1;
    if (total > 0) {
      const double u = uniform01(rng) * total;
      double acc = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        acc += d2[i];
        if (u < acc) {
          pick = i;
          break;
        }
      }
    } else {
      pick = uniform_below(rng, n);
    }
    c.push_row(x.row(pick));
    for (std::size_t i = 0; i < n; ++i) d2[i] = std::min(d2[i], squared_distance(x.row(i), c.row(c.rows() - 1)));
  }
  return c;
}

inline std::vector<int> assign_all(const Matrix& x, const Matrix& c) {
  std::vector<int> labels(x.rows());
  for (std::size_t i = 0; i < x.rows(); ++i) labels[i] = nearest_centroid(c, x.row(i));
  return labels;
}

// Centroids as cluster means. An empty cluster takes over the point farthest
// from its current centroid.
inline void update_centroids(const Matrix& x, Matrix& c, std::vector<int>& labels) {
  const std::size_t k = c.rows(), d = x.cols();
  std::vector<std::size_t> sizes(k, 0);
  for (int l : labels) ++sizes[static_cast<std::size_t>(l)];
  for (std::size_t e = 0; e < k; ++e) {
    if (sizes[e] != 0) continue;
    std::size_t far = 0;
    double fd = -1.0;
    for (std::size_t i = 0; i < x.rows(); ++i) {
      if (sizes[static_cast<std::size_t>(labels[i])] <= 1) continue;
      const double dist = squared_distance(x.row(i), c.row(static_cast<std::size_t>(labels[i])));
      if (dist > fd) {
        fd = dist;
        far = i;
      }
    }
    if (fd < 0) continue;  // no donor cluster with a spare point
    --sizes[static_cast<std::size_t>(labels[far])];
    labels[far] = static_cast<int>(e);
    sizes[e] = 1;
  }
  Matrix sums(k, d);
  for (std::size_t i = 0; i < x.rows(); ++i) {
    auto row = sums.row(static_cast<std::size_t>(labels[i]));
    const auto xi = x.row(i);
    for (std::size_t j = 0; j < d; ++j) row[j] += xi[j];
  }
  for (std::size_t ci = 0; ci < k; ++ci) {
    if (sizes[ci] == 0) continue;
    for (std::size_t j = 0; j < d; ++j) c(ci, j) = sums(ci, j) / static_cast<double>(sizes[ci]);
  }
}

}  // namespace detail

// Lloyd's algorithm from `n_init` k-means++ starts; keeps the run with the
// lowest within-cluster sum of squares (earliest run on ties).
inline KMeansModel kmeans_fit(const Matrix& x, std::size_t k, std::uint64_t seed, int n_init = 10, int max_iter = 300) {
  if (k == 0) throw TrainError("k must be positive");
  if (x.rows() < k) throw TrainError("k-means needs at least k points (" + std::to_string(x.rows()) + " < " + std::to_string(k) + ")");
  if (n_init < 1 || max_iter < 1) throw TrainError("n_init and max_iter must be positive");
  KMeansModel best;
  best.inertia = std::numeric_limits<double>::infinity();
  for (int run = 0; run < n_init; ++run) {
    Rng rng(derive_seed(seed, "kmeans/restart/" + std::to_string(run)));
    Matrix c = detail::kmeanspp_seed(x, k, rng);
    std::vector<int> labels = detail::assign_all(x, c);
    [[maybe_unused]] double prev = inertia_of(x, c, labels);
    for (int it = 0; it < max_iter; ++it) {
      detail::update_centroids(x, c, labels);
      auto next = detail::assign_all(x, c);
      [[maybe_unused]] const double cur = inertia_of(x, c, next);
      assert(cur <= prev * (1 + 1e-9) + 1e-9 && "Lloyd iteration increased inertia");
      prev = cur;
      if (next == labels) break;
      labels = std::move(next);
    }
    const double inertia = inertia_of(x, c, labels);
    if (inertia < best.inertia) {
      best.centroids = std::move(c);
      best.labels = std::move(labels);
      best.inertia = inertia;
    }
  }
  best.k = k;
  best.seed = seed;
  best.n_init = n_init;
  best.max_iter = max_iter;
  return best;
}

}  // namespace cryptoscope::learn
