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

#include "dippm/numerics.h"

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <string>

#include "dippm/error.h"

namespace dippm {
namespace {

using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ConstView = Eigen::Map<const RowMajor>;
using View = Eigen::Map<RowMajor>;

ConstView AsEigen(const Matrix& m) { return {m.data().data(), m.rows(), m.cols()}; }
View AsEigen(Matrix& m) { return {m.data().data(), m.rows(), m.cols()}; }

std::string Dims(const Matrix& m) {
  return std::to_string(m.rows()) + "x" + std::to_string(m.cols());
}

void RequireSameShape(const Matrix& a, const Matrix& b, const char* op) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    Fail(ErrorCode::kShapeMismatch, std::string(op) + ": " + Dims(a) + " vs " + Dims(b));
  }
}

uint64_t SplitMix64(uint64_t& x) {
  uint64_t z = (x += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

uint64_t Rotl(uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

}  // namespace

Matrix::Matrix(int rows, int cols, double fill)
    : rows_(rows), cols_(cols), data_(static_cast<size_t>(rows) * static_cast<size_t>(cols), fill) {
  if (rows < 0 || cols < 0) Fail(ErrorCode::kShapeMismatch, "negative matrix dimension");
}

Matrix::Matrix(int rows, int cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  if (rows < 0 || cols < 0 ||
      data_.size() != static_cast<size_t>(rows) * static_cast<size_t>(cols)) {
    Fail(ErrorCode::kShapeMismatch, "matrix data length does not match " +
                                        std::to_string(rows) + "x" + std::to_string(cols));
  }
}

void Matrix::Fill(double value) { std::fill(data_.begin(), data_.end(), value); }

bool Matrix::AllFinite() const {
  return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

Matrix Identity(int n) {
  Matrix m(n, n);
  for (int i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

Matrix MatMul(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows()) Fail(ErrorCode::kShapeMismatch, "matmul: " + Dims(a) + " * " + Dims(b));
  Matrix out(a.rows(), b.cols());
  if (a.cols() > 0) AsEigen(out).noalias() = AsEigen(a) * AsEigen(b);
  return out;
}

Matrix MatMulTransposeA(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows()) {
    Fail(ErrorCode::kShapeMismatch, "matmul_tn: " + Dims(a) + "^T * " + Dims(b));
  }
  Matrix out(a.cols(), b.cols());
  if (a.rows() > 0) AsEigen(out).noalias() = AsEigen(a).transpose() * AsEigen(b);
  return out;
}

Matrix MatMulTransposeB(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.cols()) {
    Fail(ErrorCode::kShapeMismatch, "matmul_nt: " + Dims(a) + " * " + Dims(b) + "^T");
  }
  Matrix out(a.rows(), b.rows());
  if (a.cols() > 0) AsEigen(out).noalias() = AsEigen(a) * AsEigen(b).transpose();
  return out;
}

void AccumulateMatMulTransposeA(const Matrix& a, const Matrix& b, Matrix& out) {
  if (a.rows() != b.rows() || out.rows() != a.cols() || out.cols() != b.cols()) {
    Fail(ErrorCode::kShapeMismatch,
         "matmul_tn accumulate: " + Dims(a) + "^T * " + Dims(b) + " into " + Dims(out));
  }
  if (a.rows() > 0) AsEigen(out).noalias() += AsEigen(a).transpose() * AsEigen(b);
}

Matrix Add(const Matrix& a, const Matrix& b) {
  RequireSameShape(a, b, "add");
  Matrix out = a;
  auto o = out.data();
  auto bd = b.data();
  for (size_t i = 0; i < o.size(); ++i) o[i] += bd[i];
  return out;
}

Matrix Scale(const Matrix& a, double factor) {
  Matrix out = a;
  for (double& v : out.data()) v *= factor;
  return out;
}

Matrix Relu(const Matrix& a) {
  Matrix out = a;
  for (double& v : out.data()) v = v > 0.0 ? v : 0.0;
  return out;
}

void AddRowInPlace(Matrix& a, const Matrix& row) {
  if (row.rows() != 1 || row.cols() != a.cols()) {
    Fail(ErrorCode::kShapeMismatch, "add_row: " + Dims(a) + " + " + Dims(row));
  }
  auto r = row.data();
  for (int i = 0; i < a.rows(); ++i) {
    auto dst = a.row(i);
    for (size_t j = 0; j < dst.size(); ++j) dst[j] += r[j];
  }
}

Matrix ColumnSums(const Matrix& a) {
  Matrix out(1, a.cols());
  auto o = out.data();
  for (int i = 0; i < a.rows(); ++i) {
    auto src = a.row(i);
    for (size_t j = 0; j < src.size(); ++j) o[j] += src[j];
  }
  return out;
}

Matrix ColumnMeans(const Matrix& a) {
  if (a.rows() == 0) Fail(ErrorCode::kShapeMismatch, "mean over zero rows");
  return Scale(ColumnSums(a), 1.0 / a.rows());
}

Rng::Rng(uint64_t seed, uint64_t stream) {
  uint64_t x = seed ^ (stream * 0xD1B54A32D192ED03ULL);
  for (auto& s : state_) s = SplitMix64(x);
}

uint64_t Rng::NextU64() {
  const uint64_t result = Rotl(state_[1] * 5, 7) * 9;
  const uint64_t t = state_[1] << 17;
  state_[2] ^= state_[0];
  state_[3] ^= state_[1];
  state_[1] ^= state_[2];
  state_[0] ^= state_[3];
  state_[2] ^= t;
  state_[3] = Rotl(state_[3], 45);
  return result;
}

double Rng::Uniform() { return static_cast<double>(NextU64() >> 11) * 0x1.0p-53; }

uint64_t Rng::UniformInt(uint64_t bound) {
  if (bound == 0) Fail(ErrorCode::kInvalidArgument, "UniformInt bound must be positive");
  const uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
  uint64_t x;
  do {
    x = NextU64();
  } while (x >= limit);
  return x % bound;
}

Matrix DropoutMask(int rows, int cols, double p, Rng& rng) {
  if (!(p >= 0.0 && p < 1.0)) Fail(ErrorCode::kInvalidArgument, "dropout p must be in [0,1)");
  Matrix mask(rows, cols, 1.0);
  if (p == 0.0) return mask;
  const double keep_scale = 1.0 / (1.0 - p);
  for (double& v : mask.data()) v = rng.Uniform() < p ? 0.0 : keep_scale;
  return mask;
}

LossAndGrad HuberLoss(const Matrix& pred, const Matrix& target, double delta) {
  RequireSameShape(pred, target, "huber");
  if (!(delta > 0.0)) Fail(ErrorCode::kInvalidArgument, "huber delta must be positive");
  LossAndGrad result{0.0, Matrix(pred.rows(), pred.cols())};
  const auto p = pred.data();
  const auto t = target.data();
  auto g = result.grad.data();
  const double inv_n = p.empty() ? 0.0 : 1.0 / static_cast<double>(p.size());
  for (size_t i = 0; i < p.size(); ++i) {
    const double r = p[i] - t[i];
    if (std::fabs(r) <= delta) {
      result.loss += 0.5 * r * r;
      g[i] = r * inv_n;
    } else {
      result.loss += delta * (std::fabs(r) - 0.5 * delta);
      g[i] = (r > 0 ? delta : -delta) * inv_n;
    }
  }
  result.loss *= inv_n;
  return result;
}

AdamState AdamState::ForParameter(const Matrix& param) {
  return {Matrix(param.rows(), param.cols()), Matrix(param.rows(), param.cols()), 0};
}

void AdamStep(Matrix& param, const Matrix& grad, AdamState& state, const AdamConfig& config) {
  RequireSameShape(param, grad, "adam");
  RequireSameShape(param, state.m, "adam state");
  ++state.t;
  const double c1 = 1.0 - std::pow(config.beta1, static_cast<double>(state.t));
  const double c2 = 1.0 - std::pow(config.beta2, static_cast<double>(state.t));
  auto w = param.data();
  auto g = grad.data();
  auto m = state.m.data();
  auto v = state.v.data();
  for (size_t i = 0; i < w.size(); ++i) {
    m[i] = config.beta1 * m[i] + (1.0 - config.beta1) * g[i];
    v[i] = config.beta2 * v[i] + (1.0 - config.beta2) * g[i] * g[i];
    const double m_hat = m[i] / c1;
    const double v_hat = v[i] / c2;
    w[i] -= config.lr * m_hat / (std::sqrt(v_hat) + config.eps);
  }
}

double FiniteDiffCheck(const std::function<double()>& loss, std::span<Matrix* const> params,
                       std::span<const Matrix> analytic, double h) {
  if (!(h > 0.0)) Fail(ErrorCode::kInvalidArgument, "finite difference step must be positive");
  if (params.size() != analytic.size()) {
    Fail(ErrorCode::kLengthMismatch, "parameter and gradient lists differ in length");
  }
  double worst = 0.0;
  for (size_t k = 0; k < params.size(); ++k) {
    RequireSameShape(*params[k], analytic[k], "finite difference");
    auto w = params[k]->data();
    auto an = analytic[k].data();
    for (size_t i = 0; i < w.size(); ++i) {
      const double saved = w[i];
      w[i] = saved + h;
      const double plus = loss();
      w[i] = saved - h;
      const double minus = loss();
      w[i] = saved;
      if (!std::isfinite(plus) || !std::isfinite(minus)) {
        Fail(ErrorCode::kNonFinite, "loss is not finite under perturbation");
      }
      const double fd = (plus - minus) / (2.0 * h);
      const double denom = std::max({1.0, std::fabs(fd), std::fabs(an[i])});
      worst = std::max(worst, std::fabs(fd - an[i]) / denom);
    }
  }
  return worst;
}

}  // namespace dippm
