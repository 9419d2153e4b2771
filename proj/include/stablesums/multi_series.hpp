#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "stablesums/error.hpp"

namespace stablesums {

/// n x d block of observations, stored row-major, with one label per column.
/// Every estimator in the library consumes this type.
class MultiSeries {
 public:
  MultiSeries() = default;

  MultiSeries(std::size_t n, std::size_t d, std::vector<double> values,
              std::vector<std::string> labels = {})
      : n_(n), d_(d), values_(std::move(values)), labels_(std::move(labels)) {
    require(d_ >= 1, "MultiSeries: dimension must be at least 1");
    require(values_.size() == n_ * d_, "MultiSeries: value count does not match n*d");
    if (labels_.empty()) {
      for (std::size_t j = 0; j < d_; ++j) labels_.push_back("X" + std::to_string(j + 1));
    }
    require(labels_.size() == d_, "MultiSeries: label count does not match dimension");
  }

  static MultiSeries univariate(std::vector<double> values, std::string label = "X1") {
    const std::size_t n = values.size();
    return MultiSeries(n, 1, std::move(values), {std::move(label)});
  }

  std::size_t rows() const { return n_; }
  std::size_t dim() const { return d_; }
  const std::vector<std::string>& labels() const { return labels_; }
  const std::vector<double>& values() const { return values_; }

  double operator()(std::size_t t, std::size_t j) const { return values_[t * d_ + j]; }

  std::span<const double> row(std::size_t t) const {
    return {values_.data() + t * d_, d_};
  }

  std::vector<double> column(std::size_t j) const {
    std::vector<double> out(n_);
    for (std::size_t t = 0; t < n_; ++t) out[t] = (*this)(t, j);
    return out;
  }

  MultiSeries select_column(std::size_t j) const {
    return MultiSeries(n_, 1, column(j), {labels_.at(j)});
  }

  /// Supremum norm |X_t| = max_j |X_t(j)|.
  double norm(std::size_t t) const {
    double m = 0.0;
    for (double v : row(t)) m = std::max(m, std::abs(v));
    return m;
  }

  std::vector<double> norms() const {
    std::vector<double> out(n_);
    for (std::size_t t = 0; t < n_; ++t) out[t] = norm(t);
    return out;
  }

  /// Multiplies every observation by c.
  MultiSeries scaled(double c) const {
    auto v = values_;
    for (auto& x : v) x *= c;
    return MultiSeries(n_, d_, std::move(v), labels_);
  }

  /// Reorders columns: column j of the result is column perm[j] of this.
  MultiSeries permuted(const std::vector<std::size_t>& perm) const {
    require(perm.size() == d_, "MultiSeries::permuted: permutation size mismatch");
    std::vector<double> v(values_.size());
    std::vector<std::string> labels(d_);
    for (std::size_t j = 0; j < d_; ++j) {
      labels[j] = labels_.at(perm[j]);
      for (std::size_t t = 0; t < n_; ++t) v[t * d_ + j] = (*this)(t, perm[j]);
    }
    return MultiSeries(n_, d_, std::move(v), std::move(labels));
  }

  bool operator==(const MultiSeries&) const = default;

 private:
  std::size_t n_ = 0;
  std::size_t d_ = 1;
  std::vector<double> values_;
  std::vector<std::string> labels_;
};

}  // namespace stablesums
