#pragma once

#include <algorithm>
#include <limits>
#include <numeric>
#include <span>
#include <vector>

#include "cryptoscope/learn/matrix.hpp"

namespace cryptoscope::learn {

// CART classification tree grown to purity on Gini impurity. Samples with
// x[feature] <= threshold go left.
struct DecisionTree {
  struct Node {
    int feature = -1;  // -1 marks a leaf
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    std::vector<std::size_t> histogram;  // class counts of training samples at this node

    bool leaf() const { return feature < 0; }
    friend bool operator==(const Node&, const Node&) = default;
  };

  std::size_t n_classes = 0;
  std::size_t dimension = 0;
  std::vector<Node> nodes;  // nodes[0] is the root

  std::size_t split_count() const {
    return static_cast<std::size_t>(std::ranges::count_if(nodes, [](const Node& n) { return !n.leaf(); }));
  }
  std::size_t depth() const { return depth_from(0); }

  friend bool operator==(const DecisionTree&, const DecisionTree&) = default;

 private:
  std::size_t depth_from(int i) const {
    const auto& n = nodes[static_cast<std::size_t>(i)];
    if (n.leaf()) return 0;
    return 1 + std::max(depth_from(n.left), depth_from(n.right));
  }
};

inline double gini(std::span<const std::size_t> hist, std::size_t total) {
  if (total == 0) return 0.0;
  double s = 0.0;
  for (auto c : hist) {
    const double p = static_cast<double>(c) / static_cast<double>(total);
    s += p * p;
  }
  return 1.0 - s;
}

namespace detail {

inline constexpr double kImpurityEps = 1e-12;

struct Split {
  int feature = -1;
  double threshold = 0.0;
  double impurity = 0.0;
};

// Best (feature, midpoint) split by weighted child Gini. Candidates are
// visited by ascending feature then ascending threshold, and only a strictly
// better one replaces the incumbent.
inline Split best_split(const Matrix& x, std::span<const int> y, std::span<const std::size_t> idx, std::size_t k) {
  Split best;
  best.impurity = std::numeric_limits<double>::infinity();
  const std::size_t n = idx.size();
  std::vector<std::size_t> order(idx.begin(), idx.end());
  std::vector<std::size_t> left(k), right(k);
  for (std::size_t f = 0; f < x.cols(); ++f) {
    std::ranges::stable_sort(order, [&](std::size_t a, std::size_t b) { return x(a, f) < x(b, f); });
    std::ranges::fill(left, 0);
    std::ranges::fill(right, 0);
    for (auto i : order) ++right[static_cast<std::size_t>(y[i])];
    for (std::size_t p = 0; p + 1 < n; ++p) {
      const auto c = static_cast<std::size_t>(y[order[p]]);
      ++left[c];
      --right[c];
      const double lo = x(order[p], f), hi = x(order[p + 1], f);
      if (!(lo < hi)) continue;
      double thr = lo + (hi - lo) / 2.0;
      if (thr >= hi) thr = lo;
      const std::size_t nl = p + 1, nr = n - nl;
      const double g = (static_cast<double>(nl) * gini(left, nl) + static_cast<double>(nr) * gini(right, nr)) /
                       static_cast<double>(n);
      if (g < best.impurity - kImpurityEps) best = {static_cast<int>(f), thr, g};
    }
  }
  return best;
}

}  // namespace detail

inline DecisionTree tree_train(const Matrix& x, std::span<const int> y, std::size_t n_classes = 0) {
  if (x.rows() != y.size()) throw TrainError("sample/label count mismatch");
  if (x.empty()) throw TrainError("empty training set");
  DecisionTree tree;
  tree.n_classes = n_classes ? n_classes : count_classes(y);
  tree.dimension = x.cols();

  struct Work {
    int node;
    std::vector<std::size_t> idx;
  };
  std::vector<std::size_t> all(x.rows());
  std::iota(all.begin(), all.end(), 0);
  tree.nodes.emplace_back();
  std::vector<Work> stack;
  stack.push_back({0, std::move(all)});
  while (!stack.empty()) {
    Work w = std::move(stack.back());
    stack.pop_back();
    std::vector<std::size_t> hist(tree.n_classes, 0);
    for (auto i : w.idx) ++hist[static_cast<std::size_t>(y[i])];
    tree.nodes[static_cast<std::size_t>(w.node)].histogram = hist;
    const double parent = gini(hist, w.idx.size());
    if (parent <= 0.0) continue;
    const auto split = detail::best_split(x, y, w.idx, tree.n_classes);
    if (split.feature < 0 || !(split.impurity < parent - detail::kImpurityEps)) continue;

    std::vector<std::size_t> li, ri;
    for (auto i : w.idx) (x(i, static_cast<std::size_t>(split.feature)) <= split.threshold ? li : ri).push_back(i);
    const int l = static_cast<int>(tree.nodes.size());
    tree.nodes.emplace_back();
    const int r = static_cast<int>(tree.nodes.size());
    tree.nodes.emplace_back();
    auto& node = tree.nodes[static_cast<std::size_t>(w.node)];
    node.feature = split.feature;
    node.threshold = split.threshold;
    node.left = l;
    node.right = r;
    stack.push_back({r, std::move(ri)});
    stack.push_back({l, std::move(li)});
  }
  return tree;
}

// Leaf majority class, ties to the lowest class index.
inline int leaf_class(const DecisionTree::Node& n) {
  int best = 0;
  for (int c = 1; c < static_cast<int>(n.histogram.size()); ++c)
    if (n.histogram[c] > n.histogram[best]) best = c;
  return best;
}

inline const DecisionTree::Node& tree_leaf(const DecisionTree& tree, std::span<const double> x) {
  require_dim(x, tree.dimension);
  int i = 0;
  while (!tree.nodes[static_cast<std::size_t>(i)].leaf()) {
    const auto& n = tree.nodes[static_cast<std::size_t>(i)];
    i = x[static_cast<std::size_t>(n.feature)] <= n.threshold ? n.left : n.right;
  }
  return tree.nodes[static_cast<std::size_t>(i)];
}

inline int tree_predict(const DecisionTree& tree, std::span<const double> x) { return leaf_class(tree_leaf(tree, x)); }

}  // namespace cryptoscope::learn
