#include "dvit/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "dvit/errors.hpp"
#include "dvit/simd/kernels.hpp"

namespace dvit {

struct Tensor::Impl {
  Shape shape;
  std::vector<double> data;
  std::vector<double> grad;
  bool requires_grad = false;
};

std::size_t shape_numel(const Shape& shape) {
  std::size_t n = 1;
  for (std::size_t e : shape) n *= e;
  return n;
}

std::string shape_str(const Shape& shape) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) os << (i ? "x" : "") << shape[i];
  os << ']';
  return os.str();
}

Tensor::Tensor(Shape shape, std::vector<double> data, bool requires_grad)
    : impl_(std::make_shared<Impl>()) {
  for (std::size_t e : shape)
    if (e == 0) throw DimensionError("tensor extents must be positive, got " + shape_str(shape));
  if (shape_numel(shape) != data.size())
    throw DimensionError("tensor shape " + shape_str(shape) + " does not match " +
                         std::to_string(data.size()) + " values");
  for (double v : data)
    if (!std::isfinite(v)) throw NumericError("tensor: non-finite input value");
  impl_->shape = std::move(shape);
  impl_->data = std::move(data);
  impl_->requires_grad = requires_grad;
}

Tensor Tensor::zeros(Shape shape, bool requires_grad) { return full(std::move(shape), 0.0, requires_grad); }

Tensor Tensor::full(Shape shape, double value, bool requires_grad) {
  const std::size_t n = shape_numel(shape);
  return Tensor(std::move(shape), std::vector<double>(n, value), requires_grad);
}

Tensor Tensor::scalar(double value, bool requires_grad) { return Tensor({}, {value}, requires_grad); }

Tensor Tensor::matrix(std::initializer_list<std::initializer_list<double>> rows, bool requires_grad) {
  if (rows.size() == 0) throw DimensionError("matrix: no rows");
  const std::size_t cols = rows.begin()->size();
  std::vector<double> data;
  data.reserve(rows.size() * cols);
  for (const auto& row : rows) {
    if (row.size() != cols) throw DimensionError("matrix: ragged rows");
    data.insert(data.end(), row.begin(), row.end());
  }
  return Tensor({rows.size(), cols}, std::move(data), requires_grad);
}

Tensor Tensor::identity(std::size_t n, bool requires_grad) {
  Tensor t = zeros({n, n}, requires_grad);
  for (std::size_t i = 0; i < n; ++i) t.impl_->data[i * n + i] = 1.0;
  return t;
}

const Shape& Tensor::shape() const { return impl_->shape; }
std::size_t Tensor::numel() const { return impl_->data.size(); }

std::size_t Tensor::rows() const {
  if (rank() != 2) throw DimensionError("rows(): expected rank 2, got " + shape_str(shape()));
  return impl_->shape[0];
}

std::size_t Tensor::cols() const {
  if (rank() != 2) throw DimensionError("cols(): expected rank 2, got " + shape_str(shape()));
  return impl_->shape[1];
}

std::span<const double> Tensor::data() const { return impl_->data; }
std::span<double> Tensor::mutable_data() { return impl_->data; }

double Tensor::item() const {
  if (numel() != 1) throw DimensionError("item(): tensor has " + std::to_string(numel()) + " values");
  return impl_->data[0];
}

double Tensor::at(std::size_t i, std::size_t j) const { return impl_->data[i * cols() + j]; }

bool Tensor::requires_grad() const { return impl_->requires_grad; }
void Tensor::set_requires_grad(bool value) { impl_->requires_grad = value; }
bool Tensor::has_grad() const { return !impl_->grad.empty(); }
std::span<const double> Tensor::grad() const { return impl_->grad; }

std::span<double> Tensor::mutable_grad() const {
  if (impl_->grad.empty()) impl_->grad.assign(impl_->data.size(), 0.0);
  return impl_->grad;
}

void Tensor::zero_grad() const { impl_->grad.clear(); }

void Tensor::accumulate_grad(std::span<const double> g) const {
  if (g.size() != numel()) throw DimensionError("accumulate_grad: size mismatch");
  auto dst = mutable_grad();
  for (std::size_t i = 0; i < g.size(); ++i) dst[i] += g[i];
}

Tensor Tensor::clone() const { return Tensor(shape(), impl_->data, requires_grad()); }

Tensor Tensor::detach() const {
  Tensor t;
  t.impl_ = std::make_shared<Impl>();
  t.impl_->shape = impl_->shape;
  t.impl_->data = impl_->data;
  return t;
}

// ---------------------------------------------------------------------------
// Tape

namespace {
thread_local Tape* g_active_tape = nullptr;
}

Tape* Tape::active() { return g_active_tape; }

void Tape::record(const Tensor& output, BackwardFn fn) {
  entries_.push_back(Entry{output, std::move(fn)});
}

void Tape::backward(const Tensor& loss) {
  if (loss.numel() != 1)
    throw ContractError("backward: loss must be a scalar, got shape " + shape_str(loss.shape()));
  if (!loss.requires_grad()) return;
  const bool on_tape = std::any_of(entries_.begin(), entries_.end(),
                                   [&](const Entry& e) { return e.output.same_storage(loss); });
  if (!on_tape)
    throw ContractError("backward: loss was not produced on this tape");
  Tensor seed = loss;
  seed.mutable_grad()[0] += 1.0;
  for (auto it = entries_.rbegin(); it != entries_.rend(); ++it) {
    if (!it->output.has_grad()) continue;
    it->fn();
  }
}

TapeScope::TapeScope(Tape& tape) : previous_(g_active_tape) { g_active_tape = &tape; }
TapeScope::~TapeScope() { g_active_tape = previous_; }

// ---------------------------------------------------------------------------
// Ops

namespace {

void check_finite(std::span<const double> values, const char* op) {
  for (double v : values)
    if (!std::isfinite(v)) throw NumericError(std::string(op) + ": produced a non-finite value");
}

bool tracking(std::initializer_list<const Tensor*> inputs) {
  if (Tape::active() == nullptr) return false;
  for (const Tensor* t : inputs)
    if (t->requires_grad()) return true;
  return false;
}

Tensor make_output(Shape shape, std::vector<double> data, const char* op) {
  check_finite(data, op);
  return Tensor(std::move(shape), std::move(data));
}

void record(Tensor& out, Tape::BackwardFn fn) {
  out.set_requires_grad(true);
  Tape::active()->record(out, std::move(fn));
}

void require_rank2(const Tensor& t, const char* op) {
  if (t.rank() != 2) throw DimensionError(std::string(op) + ": expected a matrix, got " + shape_str(t.shape()));
}

void require_same_shape(const Tensor& a, const Tensor& b, const char* op) {
  if (a.shape() != b.shape())
    throw DimensionError(std::string(op) + ": shape mismatch " + shape_str(a.shape()) + " vs " +
                         shape_str(b.shape()));
}

// Rows of the trailing extent: (count, width).
std::pair<std::size_t, std::size_t> row_view(const Tensor& t, const char* op) {
  if (t.rank() == 0) throw DimensionError(std::string(op) + ": needs rank >= 1");
  const std::size_t width = t.shape().back();
  return {t.numel() / width, width};
}

}  // namespace

Tensor matmul(const Tensor& a, const Tensor& b) {
  require_rank2(a, "matmul");
  require_rank2(b, "matmul");
  const std::size_t m = a.rows(), k = a.cols(), n = b.cols();
  if (b.rows() != k)
    throw DimensionError("matmul: inner extents differ " + shape_str(a.shape()) + " x " + shape_str(b.shape()));
  const auto& kern = simd::active_kernels();
  std::vector<double> c(m * n, 0.0);
  kern.gemm_nn(a.data().data(), b.data().data(), c.data(), m, k, n);
  Tensor out = make_output({m, n}, std::move(c), "matmul");
  if (tracking({&a, &b})) {
    record(out, [a, b, out, m, k, n]() mutable {
      const auto& kern = simd::active_kernels();
      const double* dc = out.grad().data();
      if (a.requires_grad()) kern.gemm_nt(dc, b.data().data(), a.mutable_grad().data(), m, n, k);
      if (b.requires_grad()) kern.gemm_tn(a.data().data(), dc, b.mutable_grad().data(), k, m, n);
    });
  }
  return out;
}

Tensor matmul_nt(const Tensor& a, const Tensor& b) {
  require_rank2(a, "matmul_nt");
  require_rank2(b, "matmul_nt");
  const std::size_t m = a.rows(), k = a.cols(), n = b.rows();
  if (b.cols() != k)
    throw DimensionError("matmul_nt: inner extents differ " + shape_str(a.shape()) + " x " +
                         shape_str(b.shape()) + "^T");
  const auto& kern = simd::active_kernels();
  std::vector<double> c(m * n, 0.0);
  kern.gemm_nt(a.data().data(), b.data().data(), c.data(), m, k, n);
  Tensor out = make_output({m, n}, std::move(c), "matmul_nt");
  if (tracking({&a, &b})) {
    record(out, [a, b, out, m, k, n]() mutable {
      const auto& kern = simd::active_kernels();
      const double* dc = out.grad().data();
      if (a.requires_grad()) kern.gemm_nn(dc, b.data().data(), a.mutable_grad().data(), m, n, k);
      if (b.requires_grad()) kern.gemm_tn(dc, a.data().data(), b.mutable_grad().data(), n, m, k);
    });
  }
  return out;
}

Tensor transpose(const Tensor& a) {
  require_rank2(a, "transpose");
  const std::size_t m = a.rows(), n = a.cols();
  std::vector<double> t(m * n);
  const auto src = a.data();
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) t[j * m + i] = src[i * n + j];
  Tensor out = make_output({n, m}, std::move(t), "transpose");
  if (tracking({&a})) {
    record(out, [a, out, m, n]() mutable {
      const auto g = out.grad();
      auto dst = a.mutable_grad();
      for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < n; ++j) dst[i * n + j] += g[j * m + i];
    });
  }
  return out;
}

namespace {

template <class Fwd>
Tensor elementwise_binary(const Tensor& a, const Tensor& b, const char* op, Fwd fwd, double sign_b,
                          bool product) {
  require_same_shape(a, b, op);
  const auto x = a.data(), y = b.data();
  std::vector<double> r(x.size());
  for (std::size_t i = 0; i < r.size(); ++i) r[i] = fwd(x[i], y[i]);
  Tensor out = make_output(a.shape(), std::move(r), op);
  if (tracking({&a, &b})) {
    record(out, [a, b, out, sign_b, product]() mutable {
      const auto g = out.grad();
      if (a.requires_grad()) {
        auto dst = a.mutable_grad();
        const auto y = b.data();
        for (std::size_t i = 0; i < g.size(); ++i) dst[i] += product ? g[i] * y[i] : g[i];
      }
      if (b.requires_grad()) {
        auto dst = b.mutable_grad();
        const auto x = a.data();
        for (std::size_t i = 0; i < g.size(); ++i) dst[i] += product ? g[i] * x[i] : sign_b * g[i];
      }
    });
  }
  return out;
}

}  // namespace

Tensor add(const Tensor& a, const Tensor& b) {
  return elementwise_binary(a, b, "add", [](double x, double y) { return x + y; }, 1.0, false);
}

Tensor sub(const Tensor& a, const Tensor& b) {
  return elementwise_binary(a, b, "sub", [](double x, double y) { return x - y; }, -1.0, false);
}

Tensor mul(const Tensor& a, const Tensor& b) {
  return elementwise_binary(a, b, "mul", [](double x, double y) { return x * y; }, 1.0, true);
}

Tensor add_row(const Tensor& a, const Tensor& row) {
  require_rank2(a, "add_row");
  const std::size_t m = a.rows(), n = a.cols();
  if (row.numel() != n || row.rank() > 2 || (row.rank() == 2 && row.rows() != 1))
    throw DimensionError("add_row: row " + shape_str(row.shape()) + " does not fit " + shape_str(a.shape()));
  std::vector<double> r(a.data().begin(), a.data().end());
  const auto bias = row.data();
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) r[i * n + j] += bias[j];
  Tensor out = make_output(a.shape(), std::move(r), "add_row");
  if (tracking({&a, &row})) {
    record(out, [a, row, out, m, n]() mutable {
      const auto g = out.grad();
      if (a.requires_grad()) a.accumulate_grad(g);
      if (row.requires_grad()) {
        auto dst = row.mutable_grad();
        for (std::size_t i = 0; i < m; ++i)
          for (std::size_t j = 0; j < n; ++j) dst[j] += g[i * n + j];
      }
    });
  }
  return out;
}

Tensor scale(const Tensor& a, double s) {
  std::vector<double> r(a.data().begin(), a.data().end());
  for (double& v : r) v *= s;
  Tensor out = make_output(a.shape(), std::move(r), "scale");
  if (tracking({&a})) {
    record(out, [a, out, s]() mutable {
      const auto g = out.grad();
      auto dst = a.mutable_grad();
      for (std::size_t i = 0; i < g.size(); ++i) dst[i] += s * g[i];
    });
  }
  return out;
}

Tensor sum(const Tensor& a) {
  double total = 0.0;
  for (double v : a.data()) total += v;
  Tensor out = make_output({}, {total}, "sum");
  if (tracking({&a})) {
    record(out, [a, out]() mutable {
      const double g = out.grad()[0];
      for (double& d : a.mutable_grad()) d += g;
    });
  }
  return out;
}

Tensor mean(const Tensor& a) { return scale(sum(a), 1.0 / static_cast<double>(a.numel())); }

Tensor softmax_rows(const Tensor& x) {
  const auto [rows, width] = row_view(x, "softmax_rows");
  const auto src = x.data();
  std::vector<double> y(src.size());
  for (std::size_t r = 0; r < rows; ++r) {
    const double* in = src.data() + r * width;
    double* o = y.data() + r * width;
    const double mx = *std::max_element(in, in + width);
    double z = 0.0;
    for (std::size_t j = 0; j < width; ++j) z += (o[j] = std::exp(in[j] - mx));
    for (std::size_t j = 0; j < width; ++j) o[j] /= z;
  }
  Tensor out = make_output(x.shape(), std::move(y), "softmax_rows");
  if (tracking({&x})) {
    record(out, [x, out, rows, width]() mutable {
      const auto g = out.grad();
      const auto y = out.data();
      auto dst = x.mutable_grad();
      for (std::size_t r = 0; r < rows; ++r) {
        const std::size_t off = r * width;
        double inner = 0.0;
        for (std::size_t j = 0; j < width; ++j) inner += g[off + j] * y[off + j];
        for (std::size_t j = 0; j < width; ++j) dst[off + j] += y[off + j] * (g[off + j] - inner);
      }
    });
  }
  return out;
}

namespace {
constexpr double kGeluC = 0.044715;
const double kSqrt2OverPi = std::sqrt(2.0 / std::numbers::pi);

double gelu_grad(double x) {
  const double u = kSqrt2OverPi * (x + kGeluC * x * x * x);
  const double t = std::tanh(u);
  return 0.5 * (1.0 + t) + 0.5 * x * (1.0 - t * t) * kSqrt2OverPi * (1.0 + 3.0 * kGeluC * x * x);
}
}  // namespace

double gelu_scalar(double x) {
  return 0.5 * x * (1.0 + std::tanh(kSqrt2OverPi * (x + kGeluC * x * x * x)));
}

Tensor gelu(const Tensor& x) {
  std::vector<double> y(x.numel());
  const auto src = x.data();
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = gelu_scalar(src[i]);
  Tensor out = make_output(x.shape(), std::move(y), "gelu");
  if (tracking({&x})) {
    record(out, [x, out]() mutable {
      const auto g = out.grad();
      const auto src = x.data();
      auto dst = x.mutable_grad();
      for (std::size_t i = 0; i < g.size(); ++i) dst[i] += g[i] * gelu_grad(src[i]);
    });
  }
  return out;
}

Tensor layer_norm(const Tensor& x, const Tensor& gain, const Tensor& bias, double eps) {
  const auto [rows, width] = row_view(x, "layer_norm");
  if (gain.numel() != width || bias.numel() != width)
    throw DimensionError("layer_norm: gain/bias must have " + std::to_string(width) + " values");
  if (!(eps >= 0.0)) throw ContractError("layer_norm: eps must be non-negative");
  const auto src = x.data();
  const auto gv = gain.data(), bv = bias.data();
  std::vector<double> xhat(src.size()), y(src.size()), inv_std(rows);
  for (std::size_t r = 0; r < rows; ++r) {
    const std::size_t off = r * width;
    double mu = 0.0;
    for (std::size_t j = 0; j < width; ++j) mu += src[off + j];
    mu /= static_cast<double>(width);
    double var = 0.0;
    for (std::size_t j = 0; j < width; ++j) var += (src[off + j] - mu) * (src[off + j] - mu);
    var /= static_cast<double>(width);
    inv_std[r] = 1.0 / std::sqrt(var + eps);
    for (std::size_t j = 0; j < width; ++j) {
      xhat[off + j] = (src[off + j] - mu) * inv_std[r];
      y[off + j] = gv[j] * xhat[off + j] + bv[j];
    }
  }
  Tensor out = make_output(x.shape(), std::move(y), "layer_norm");
  if (tracking({&x, &gain, &bias})) {
    record(out, [x, gain, bias, out, xhat = std::move(xhat), inv_std = std::move(inv_std), rows,
                 width]() mutable {
      const auto g = out.grad();
      const auto gv = gain.data();
      if (gain.requires_grad()) {
        auto dst = gain.mutable_grad();
        for (std::size_t r = 0; r < rows; ++r)
          for (std::size_t j = 0; j < width; ++j) dst[j] += g[r * width + j] * xhat[r * width + j];
      }
      if (bias.requires_grad()) {
        auto dst = bias.mutable_grad();
        for (std::size_t r = 0; r < rows; ++r)
          for (std::size_t j = 0; j < width; ++j) dst[j] += g[r * width + j];
      }
      if (x.requires_grad()) {
        auto dst = x.mutable_grad();
        const double w = static_cast<double>(width);
        for (std::size_t r = 0; r < rows; ++r) {
          const std::size_t off = r * width;
          double mean_d = 0.0, mean_dx = 0.0;
          for (std::size_t j = 0; j < width; ++j) {
            const double d = g[off + j] * gv[j];
            mean_d += d;
            mean_dx += d * xhat[off + j];
          }
          mean_d /= w;
          mean_dx /= w;
          for (std::size_t j = 0; j < width; ++j) {
            const double d = g[off + j] * gv[j];
            dst[off + j] += inv_std[r] * (d - mean_d - xhat[off + j] * mean_dx);
          }
        }
      }
    });
  }
  return out;
}

Tensor slice_rows(const Tensor& a, std::size_t begin, std::size_t end) {
  require_rank2(a, "slice_rows");
  const std::size_t n = a.cols();
  if (begin >= end || end > a.rows()) throw DimensionError("slice_rows: bad range");
  std::vector<double> r(a.data().begin() + begin * n, a.data().begin() + end * n);
  Tensor out = make_output({end - begin, n}, std::move(r), "slice_rows");
  if (tracking({&a})) {
    record(out, [a, out, begin, n]() mutable {
      const auto g = out.grad();
      auto dst = a.mutable_grad();
      for (std::size_t i = 0; i < g.size(); ++i) dst[begin * n + i] += g[i];
    });
  }
  return out;
}

Tensor slice_cols(const Tensor& a, std::size_t begin, std::size_t end) {
  require_rank2(a, "slice_cols");
  const std::size_t m = a.rows(), n = a.cols(), w = end - begin;
  if (begin >= end || end > n) throw DimensionError("slice_cols: bad range");
  std::vector<double> r(m * w);
  const auto src = a.data();
  for (std::size_t i = 0; i < m; ++i)
    std::copy_n(src.begin() + i * n + begin, w, r.begin() + i * w);
  Tensor out = make_output({m, w}, std::move(r), "slice_cols");
  if (tracking({&a})) {
    record(out, [a, out, begin, m, n, w]() mutable {
      const auto g = out.grad();
      auto dst = a.mutable_grad();
      for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < w; ++j) dst[i * n + begin + j] += g[i * w + j];
    });
  }
  return out;
}

Tensor concat_rows(const std::vector<Tensor>& parts) {
  if (parts.empty()) throw DimensionError("concat_rows: nothing to concatenate");
  const std::size_t n = parts.front().cols();
  std::size_t m = 0;
  for (const Tensor& p : parts) {
    if (p.cols() != n) throw DimensionError("concat_rows: column count mismatch");
    m += p.rows();
  }
  std::vector<double> r;
  r.reserve(m * n);
  bool any_grad = false;
  for (const Tensor& p : parts) {
    r.insert(r.end(), p.data().begin(), p.data().end());
    any_grad = any_grad || p.requires_grad();
  }
  Tensor out = make_output({m, n}, std::move(r), "concat_rows");
  if (any_grad && Tape::active() != nullptr) {
    record(out, [parts, out]() mutable {
      const auto g = out.grad();
      std::size_t off = 0;
      for (const Tensor& p : parts) {
        if (p.requires_grad()) p.accumulate_grad(g.subspan(off, p.numel()));
        off += p.numel();
      }
    });
  }
  return out;
}

Tensor concat_cols(const std::vector<Tensor>& parts) {
  if (parts.empty()) throw DimensionError("concat_cols: nothing to concatenate");
  const std::size_t m = parts.front().rows();
  std::size_t n = 0;
  bool any_grad = false;
  for (const Tensor& p : parts) {
    if (p.rows() != m) throw DimensionError("concat_cols: row count mismatch");
    n += p.cols();
    any_grad = any_grad || p.requires_grad();
  }
  std::vector<double> r(m * n);
  std::size_t col = 0;
  for (const Tensor& p : parts) {
    const std::size_t w = p.cols();
    for (std::size_t i = 0; i < m; ++i)
      std::copy_n(p.data().begin() + i * w, w, r.begin() + i * n + col);
    col += w;
  }
  Tensor out = make_output({m, n}, std::move(r), "concat_cols");
  if (any_grad && Tape::active() != nullptr) {
    record(out, [parts, out, m, n]() mutable {
      const auto g = out.grad();
      std::size_t col = 0;
      for (const Tensor& p : parts) {
        const std::size_t w = p.cols();
        if (p.requires_grad()) {
          auto dst = p.mutable_grad();
          for (std::size_t i = 0; i < m; ++i)
            for (std::size_t j = 0; j < w; ++j) dst[i * w + j] += g[i * n + col + j];
        }
        col += w;
      }
    });
  }
  return out;
}

Tensor dropout(const Tensor& x, double rate, SeededGenerator& rng) {
  if (!(rate >= 0.0 && rate < 1.0)) throw ContractError("dropout: rate must lie in [0, 1)");
  if (rate == 0.0) return x;
  const double keep = 1.0 / (1.0 - rate);
  std::vector<double> mask(x.numel());
  for (double& m : mask) m = rng.uniform() < rate ? 0.0 : keep;
  return mul(x, Tensor(x.shape(), std::move(mask)));
}

Tensor cross_entropy_logits(const Tensor& logits, std::span<const std::size_t> targets) {
  require_rank2(logits, "cross_entropy_logits");
  const std::size_t m = logits.rows(), c = logits.cols();
  if (targets.size() != m) throw DimensionError("cross_entropy_logits: target count mismatch");
  const auto z = logits.data();
  std::vector<double> probs(m * c);
  double total = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    if (targets[i] >= c) throw ContractError("cross_entropy_logits: target out of range");
    const double* row = z.data() + i * c;
    const double mx = *std::max_element(row, row + c);
    double s = 0.0;
    for (std::size_t j = 0; j < c; ++j) s += std::exp(row[j] - mx);
    const double lse = mx + std::log(s);
    for (std::size_t j = 0; j < c; ++j) probs[i * c + j] = std::exp(row[j] - lse);
    total += lse - row[targets[i]];
  }
  Tensor out = make_output({}, {total / static_cast<double>(m)}, "cross_entropy_logits");
  if (tracking({&logits})) {
    std::vector<std::size_t> t(targets.begin(), targets.end());
    record(out, [logits, out, probs = std::move(probs), t = std::move(t), m, c]() mutable {
      const double g = out.grad()[0] / static_cast<double>(m);
      auto dst = logits.mutable_grad();
      for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < c; ++j)
          dst[i * c + j] += g * (probs[i * c + j] - (j == t[i] ? 1.0 : 0.0));
    });
  }
  return out;
}

}  // namespace dvit
