#pragma once

// Dense row-major tensors with tape-based reverse-mode differentiation.
//
// A Tensor is a cheap handle to shared storage. Ops never mutate their
// inputs; the only in-place changes are gradient accumulation and explicit
// parameter updates through mutable_data().
//
// Recording: an op records itself on the thread's active Tape (see TapeScope)
// when at least one input requires a gradient. Without an active tape ops
// run as plain inference.

#include <cstddef>
#include <functional>
#include <initializer_list>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "dvit/rng.hpp"

namespace dvit {

using Shape = std::vector<std::size_t>;

std::size_t shape_numel(const Shape& shape);
std::string shape_str(const Shape& shape);

class Tensor {
 public:
  Tensor() = default;
  Tensor(Shape shape, std::vector<double> data, bool requires_grad = false);

  static Tensor zeros(Shape shape, bool requires_grad = false);
  static Tensor full(Shape shape, double value, bool requires_grad = false);
  static Tensor scalar(double value, bool requires_grad = false);
  /// Rank-2 tensor from nested rows; rows must have equal length.
  static Tensor matrix(std::initializer_list<std::initializer_list<double>> rows,
                       bool requires_grad = false);
  static Tensor identity(std::size_t n, bool requires_grad = false);

  bool defined() const { return impl_ != nullptr; }
  const Shape& shape() const;
  std::size_t rank() const { return shape().size(); }
  std::size_t numel() const;
  /// Extent of a rank-2 tensor.
  std::size_t rows() const;
  std::size_t cols() const;

  std::span<const double> data() const;
  /// Writable view for parameter updates and test fixtures. Never call on a
  /// tensor that is referenced by a live tape.
  std::span<double> mutable_data();
  double item() const;
  double at(std::size_t i, std::size_t j) const;

  bool requires_grad() const;
  void set_requires_grad(bool value);
  bool has_grad() const;
  /// Gradient buffer; empty span when no gradient has been accumulated.
  std::span<const double> grad() const;
  // Gradient state is shared by every handle, so these are const.
  std::span<double> mutable_grad() const;
  void zero_grad() const;
  void accumulate_grad(std::span<const double> g) const;

  /// Deep copy of the values; the copy does not share the gradient.
  Tensor clone() const;
  /// Same storage, no gradient tracking.
  Tensor detach() const;

  bool same_storage(const Tensor& other) const { return impl_ == other.impl_; }

 private:
  struct Impl;
  std::shared_ptr<Impl> impl_;
  friend class Tape;
};

/// Ordered record of executed ops. Backward visits records in exact reverse
/// order and sums gradient contributions into shared inputs.
class Tape {
 public:
  using BackwardFn = std::function<void()>;

  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  void record(const Tensor& output, BackwardFn fn);
  std::size_t size() const { return entries_.size(); }
  void clear() { entries_.clear(); }

  /// Seeds d(loss)/d(loss) = 1 and runs every record backwards.
  /// A loss that does not require a gradient is a constant: nothing to do.
  void backward(const Tensor& loss);

  /// Tape currently receiving records on this thread, or null.
  static Tape* active();

 private:
  struct Entry {
    Tensor output;
    BackwardFn fn;
  };
  std::vector<Entry> entries_;
  friend class TapeScope;
};

/// Makes a tape active on the current thread for the lifetime of the scope.
class TapeScope {
 public:
  explicit TapeScope(Tape& tape);
  ~TapeScope();
  TapeScope(const TapeScope&) = delete;
  TapeScope& operator=(const TapeScope&) = delete;

 private:
  Tape* previous_;
};

inline void backward(const Tensor& loss, Tape& tape) { tape.backward(loss); }

// Ops. Rank-2 ops throw DimensionError on shape mismatch; every op throws
// NumericError if it produces a non-finite value.

Tensor matmul(const Tensor& a, const Tensor& b);
/// a * b^T without materialising the transpose.
Tensor matmul_nt(const Tensor& a, const Tensor& b);
Tensor transpose(const Tensor& a);
Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
/// Adds a length-n vector (shape {n} or {1, n}) to every row of an m x n matrix.
Tensor add_row(const Tensor& a, const Tensor& row);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor scale(const Tensor& a, double s);
Tensor sum(const Tensor& a);
Tensor mean(const Tensor& a);

/// Row-wise softmax with row-max subtraction.
Tensor softmax_rows(const Tensor& x);

/// Tanh-approximated GeLU:
/// 0.5 x (1 + tanh(sqrt(2/pi) (x + 0.044715 x^3))).
Tensor gelu(const Tensor& x);
double gelu_scalar(double x);

inline constexpr double kLayerNormEps = 1e-6;
/// Normalises over the last extent, then applies gain * x_hat + bias.
Tensor layer_norm(const Tensor& x, const Tensor& gain, const Tensor& bias,
                  double eps = kLayerNormEps);

Tensor slice_rows(const Tensor& a, std::size_t begin, std::size_t end);
Tensor slice_cols(const Tensor& a, std::size_t begin, std::size_t end);
Tensor concat_rows(const std::vector<Tensor>& parts);
Tensor concat_cols(const std::vector<Tensor>& parts);

/// Inverted dropout: zeroes each value with probability `rate` and scales
/// survivors by 1 / (1 - rate). Rate 0 returns the input unchanged.
Tensor dropout(const Tensor& x, double rate, SeededGenerator& rng);

/// Mean softmax cross-entropy of m x C logits against class indices.
Tensor cross_entropy_logits(const Tensor& logits, std::span<const std::size_t> targets);

}  // namespace dvit
