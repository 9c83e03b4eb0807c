#pragma once

#include <algorithm>
#include <cstddef>
#include <span>
#include <vector>

#include "cryptoscope/error.hpp"

namespace cryptoscope::learn {

// Dense row-major sample matrix.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0) : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  static Matrix from_rows(const std::vector<std::vector<double>>& rows) {
    Matrix m;
    if (rows.empty()) return m;
    m.cols_ = rows.front().size();
    for (const auto& r : rows) m.push_row(r);
    return m;
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  bool empty() const { return rows_ == 0; }

  std::span<const double> row(std::size_t i) const { return {data_.data() + i * cols_, cols_}; }
  std::span<double> row(std::size_t i) { return {data_.data() + i * cols_, cols_}; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }
  double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }

  void push_row(std::span<const double> r) {
    if (rows_ == 0 && cols_ == 0) cols_ = r.size();
    if (r.size() != cols_) throw DimError("row has " + std::to_string(r.size()) + " columns, expected " + std::to_string(cols_));
    data_.insert(data_.end(), r.begin(), r.end());
    ++rows_;
  }

  Matrix select(std::span<const std::size_t> idx) const {
    Matrix m(0, cols_);
    m.data_.reserve(idx.size() * cols_);
    for (auto i : idx) m.push_row(row(i));
    return m;
  }

  std::vector<std::vector<double>> to_rows() const {
    std::vector<std::vector<double>> out;
    for (std::size_t i = 0; i < rows_; ++i) out.emplace_back(row(i).begin(), row(i).end());
    return out;
  }

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

inline void require_dim(std::span<const double> x, std::size_t dim) {
  if (x.size() != dim)
    throw DimError("vector has dimension " + std::to_string(x.size()) + ", model expects " + std::to_string(dim));
}

inline double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline double squared_distance(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

// Class labels are dense indices 0..n_classes-1.
inline std::size_t count_classes(std::span<const int> y) {
  int mx = -1;
  for (int v : y) {
    if (v < 0) throw TrainError("negative class index");
    mx = std::max(mx, v);
  }
  return static_cast<std::size_t>(mx + 1);
}

}  // namespace cryptoscope::learn
