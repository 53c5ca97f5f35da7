// Copyright 2026 The DIPPM Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Dense float64 kernels, Huber loss, Adam and a finite-difference gradient
// checker. Everything here is deterministic for a fixed build.

#ifndef DIPPM_NUMERICS_H_
#define DIPPM_NUMERICS_H_

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace dippm {

/// Row-major matrix of doubles.
class Matrix {
 public:
  Matrix() = default;
  Matrix(int rows, int cols, double fill = 0.0);
  Matrix(int rows, int cols, std::vector<double> data);

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  size_t size() const { return data_.size(); }

  double& operator()(int r, int c) { return data_[Index(r, c)]; }
  double operator()(int r, int c) const { return data_[Index(r, c)]; }

  std::span<double> row(int r) { return {data_.data() + Index(r, 0), static_cast<size_t>(cols_)}; }
  std::span<const double> row(int r) const {
    return {data_.data() + Index(r, 0), static_cast<size_t>(cols_)};
  }

  std::span<double> data() { return data_; }
  std::span<const double> data() const { return data_; }

  void Fill(double value);
  bool AllFinite() const;

  bool operator==(const Matrix&) const = default;

 private:
  size_t Index(int r, int c) const {
    return static_cast<size_t>(r) * static_cast<size_t>(cols_) + static_cast<size_t>(c);
  }

  int rows_ = 0;
  int cols_ = 0;
  std::vector<double> data_;
};

Matrix Identity(int n);

Matrix MatMul(const Matrix& a, const Matrix& b);
/// aᵀ·b
Matrix MatMulTransposeA(const Matrix& a, const Matrix& b);
/// a·bᵀ
Matrix MatMulTransposeB(const Matrix& a, const Matrix& b);
/// out += aᵀ·b
void AccumulateMatMulTransposeA(const Matrix& a, const Matrix& b, Matrix& out);

Matrix Add(const Matrix& a, const Matrix& b);
Matrix Scale(const Matrix& a, double factor);
Matrix Relu(const Matrix& a);
/// Adds a 1×cols row vector to every row of `a` in place.
void AddRowInPlace(Matrix& a, const Matrix& row);
/// 1×cols sum over rows.
Matrix ColumnSums(const Matrix& a);
/// 1×cols mean over rows.
Matrix ColumnMeans(const Matrix& a);

/// xoshiro256** seeded through splitmix64. `stream` selects an independent
/// sequence for the same seed.
class Rng {
 public:
  explicit Rng(uint64_t seed, uint64_t stream = 0);

  uint64_t NextU64();
  /// Uniform on [0, 1) with 53 bits of resolution.
  double Uniform();
  double Uniform(double lo, double hi) { return lo + (hi - lo) * Uniform(); }
  /// Uniform on [0, bound) by rejection; bound must be positive.
  uint64_t UniformInt(uint64_t bound);

  template <typename T>
  void Shuffle(std::vector<T>& items) {
    for (size_t i = items.size(); i > 1; --i) {
      size_t j = static_cast<size_t>(UniformInt(i));
      std::swap(items[i - 1], items[j]);
    }
  }

 private:
  uint64_t state_[4];
};

/// Inverted-dropout mask: each entry is 0 with probability p, otherwise
/// 1/(1-p).
Matrix DropoutMask(int rows, int cols, double p, Rng& rng);

inline constexpr double kDefaultHuberDelta = 1.0;

struct LossAndGrad {
  double loss = 0.0;
  Matrix grad;
};

/// Mean-reduced Huber loss and its gradient with respect to `pred`.
LossAndGrad HuberLoss(const Matrix& pred, const Matrix& target, double delta = kDefaultHuberDelta);

inline constexpr double kDefaultLearningRate = 2.754e-5;

struct AdamConfig {
  double lr = kDefaultLearningRate;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

struct AdamState {
  Matrix m;
  Matrix v;
  int64_t t = 0;

  static AdamState ForParameter(const Matrix& param);
};

void AdamStep(Matrix& param, const Matrix& grad, AdamState& state, const AdamConfig& config);

/// Central-difference check of `analytic` against `loss`, perturbing every
/// coordinate of `params` in place (restored afterwards). Returns
/// max |fd - analytic| / max(1, |fd|, |analytic|).
double FiniteDiffCheck(const std::function<double()>& loss, std::span<Matrix* const> params,
                       std::span<const Matrix> analytic, double h);

}  // namespace dippm

#endif  // DIPPM_NUMERICS_H_
