#include "lzsc/tensor.hpp"

#include <algorithm>
#include <cmath>

#include "lzsc/error.hpp"

namespace lzsc {

std::string to_string(const Shape& s) {
  return std::to_string(s.height) + "x" + std::to_string(s.width) + "x" + std::to_string(s.channels);
}

Tensor::Tensor(Shape shape, double fill) : shape_(shape), data_(shape.size(), fill) {}

Tensor::Tensor(Shape shape, std::vector<double> values) : shape_(shape), data_(std::move(values)) {
  require(data_.size() == shape_.size(),
          "Tensor: " + std::to_string(data_.size()) + " values for shape " + to_string(shape_));
}

Tensor& Tensor::operator+=(const Tensor& o) {
  require(shape_ == o.shape_, "Tensor +=: shape mismatch " + to_string(shape_) + " vs " + to_string(o.shape_));
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += o.data_[i];
  return *this;
}

Tensor& Tensor::operator-=(const Tensor& o) {
  require(shape_ == o.shape_, "Tensor -=: shape mismatch " + to_string(shape_) + " vs " + to_string(o.shape_));
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= o.data_[i];
  return *this;
}

Tensor& Tensor::operator*=(double s) {
  for (double& v : data_) v *= s;
  return *this;
}

Tensor& Tensor::add_scaled(const Tensor& o, double s) {
  require(shape_ == o.shape_, "Tensor add_scaled: shape mismatch");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += s * o.data_[i];
  return *this;
}

void Tensor::fill(double v) { std::fill(data_.begin(), data_.end(), v); }

Tensor operator+(Tensor a, const Tensor& b) { return a += b; }
Tensor operator-(Tensor a, const Tensor& b) { return a -= b; }
Tensor operator*(double s, Tensor a) { return a *= s; }

Tensor zeros_like(const Tensor& t) { return Tensor(t.shape()); }

Tensor channel_concat(const Tensor& a, const Tensor& b) {
  require(a.shape().same_spatial(b.shape()),
          "channel_concat: spatial mismatch " + to_string(a.shape()) + " vs " + to_string(b.shape()));
  const std::size_t ca = a.channels(), cb = b.channels();
  Tensor out(a.height(), a.width(), ca + cb);
  const std::size_t n = a.shape().pixels();
  for (std::size_t p = 0; p < n; ++p) {
    std::copy_n(a.data() + p * ca, ca, out.data() + p * (ca + cb));
    std::copy_n(b.data() + p * cb, cb, out.data() + p * (ca + cb) + ca);
  }
  return out;
}

Tensor channel_slice(const Tensor& t, std::size_t first, std::size_t count) {
  require(first + count <= t.channels(), "channel_slice: range exceeds channel count");
  Tensor out(t.height(), t.width(), count);
  const std::size_t n = t.shape().pixels(), c = t.channels();
  for (std::size_t p = 0; p < n; ++p) std::copy_n(t.data() + p * c + first, count, out.data() + p * count);
  return out;
}

Tensor transpose_spatial(const Tensor& t) {
  Tensor out(t.width(), t.height(), t.channels());
  for (std::size_t y = 0; y < t.height(); ++y)
    for (std::size_t x = 0; x < t.width(); ++x)
      for (std::size_t c = 0; c < t.channels(); ++c) out(x, y, c) = t(y, x, c);
  return out;
}

Tensor flip_horizontal(const Tensor& t) {
  Tensor out(t.shape());
  const std::size_t w = t.width();
  for (std::size_t y = 0; y < t.height(); ++y)
    for (std::size_t x = 0; x < w; ++x)
      for (std::size_t c = 0; c < t.channels(); ++c) out(y, w - 1 - x, c) = t(y, x, c);
  return out;
}

Tensor flip_vertical(const Tensor& t) {
  Tensor out(t.shape());
  const std::size_t h = t.height();
  for (std::size_t y = 0; y < h; ++y)
    for (std::size_t x = 0; x < t.width(); ++x)
      for (std::size_t c = 0; c < t.channels(); ++c) out(h - 1 - y, x, c) = t(y, x, c);
  return out;
}

Tensor crop(const Tensor& t, std::size_t y0, std::size_t x0, std::size_t h, std::size_t w) {
  require(y0 + h <= t.height() && x0 + w <= t.width(), "crop: window exceeds tensor " + to_string(t.shape()));
  Tensor out(h, w, t.channels());
  const std::size_t c = t.channels();
  for (std::size_t y = 0; y < h; ++y)
    std::copy_n(t.data() + ((y0 + y) * t.width() + x0) * c, w * c, out.data() + y * w * c);
  return out;
}

Tensor elementwise_max(const Tensor& a, const Tensor& b) {
  require(a.shape() == b.shape(), "elementwise_max: shape mismatch");
  Tensor out(a.shape());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = std::max(a[i], b[i]);
  return out;
}

Tensor clamp(const Tensor& t, double lo, double hi) {
  Tensor out(t.shape());
  for (std::size_t i = 0; i < t.size(); ++i) out[i] = std::clamp(t[i], lo, hi);
  return out;
}

double sum(const Tensor& t) {
  double s = 0.0;
  for (double v : t.values()) s += v;
  return s;
}

double mean(const Tensor& t) { return t.empty() ? 0.0 : sum(t) / static_cast<double>(t.size()); }

double dot(const Tensor& a, const Tensor& b) {
  require(a.shape() == b.shape(), "dot: shape mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double l2_norm(const Tensor& t) { return std::sqrt(dot(t, t)); }

double max_abs(const Tensor& t) {
  double m = 0.0;
  for (double v : t.values()) m = std::max(m, std::abs(v));
  return m;
}

double max_abs_diff(const Tensor& a, const Tensor& b) {
  require(a.shape() == b.shape(), "max_abs_diff: shape mismatch");
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

double mean_abs_diff(const Tensor& a, const Tensor& b) {
  require(a.shape() == b.shape(), "mean_abs_diff: shape mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += std::abs(a[i] - b[i]);
  return a.empty() ? 0.0 : s / static_cast<double>(a.size());
}

bool all_finite(const Tensor& t) {
  return std::all_of(t.values().begin(), t.values().end(), [](double v) { return std::isfinite(v); });
}

std::size_t count_zeros(const Tensor& t) {
  return static_cast<std::size_t>(std::count(t.values().begin(), t.values().end(), 0.0));
}

}  // namespace lzsc
