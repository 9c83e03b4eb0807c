#pragma once

#include <cmath>
#include <optional>
#include <span>
#include <string>

#include "cryptoscope/learn/matrix.hpp"

namespace cryptoscope::learn {

enum class KernelKind { LINEAR, RBF, POLY, SIGMOID };

inline std::string_view kernel_name(KernelKind k) {
  constexpr std::string_view names[] = {"linear", "rbf", "poly", "sigmoid"};
  return names[static_cast<int>(k)];
}

inline std::optional<KernelKind> parse_kernel(std::string_view s) {
  for (auto k : {KernelKind::LINEAR, KernelKind::RBF, KernelKind::POLY, KernelKind::SIGMOID})
    if (kernel_name(k) == s) return k;
  return std::nullopt;
}

// RBF is exp(-gamma ||x-y||^2), i.e. gamma = 1 / (2 sigma^2) for a Gaussian of
// width sigma. An unset gamma means 1 / dimension.
struct KernelSpec {
  KernelKind kind = KernelKind::LINEAR;
  std::optional<double> gamma;
  double coef0 = 0.0;
  int degree = 3;

  double gamma_for(std::size_t dim) const {
    if (gamma) return *gamma;
    return dim ? 1.0 / static_cast<double>(dim) : 1.0;
  }

  // Copy with gamma fixed for the given dimension.
  KernelSpec resolved(std::size_t dim) const {
    KernelSpec k = *this;
    k.gamma = gamma_for(dim);
    return k;
  }

  friend bool operator==(const KernelSpec&, const KernelSpec&) = default;
};

inline double kernel_eval(const KernelSpec& spec, std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size())
    throw DimError("kernel arguments differ in dimension (" + std::to_string(x.size()) + " vs " +
                   std::to_string(y.size()) + ")");
  const double g = spec.gamma_for(x.size());
  switch (spec.kind) {
    case KernelKind::LINEAR:
      return dot(x, y) + spec.coef0;
    case KernelKind::RBF:
      return std::exp(-g * squared_distance(x, y));
    case KernelKind::POLY:
      return std::pow(g * dot(x, y) + spec.coef0, spec.degree);
    case KernelKind::SIGMOID:
      return std::tanh(g * dot(x, y) + spec.coef0);
  }
  return 0.0;
}

}  // namespace cryptoscope::learn
