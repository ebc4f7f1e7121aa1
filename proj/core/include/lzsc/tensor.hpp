#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace lzsc {

struct Shape {
  std::size_t height = 0;
  std::size_t width = 0;
  std::size_t channels = 0;

  std::size_t size() const { return height * width * channels; }
  std::size_t pixels() const { return height * width; }
  bool same_spatial(const Shape& o) const { return height == o.height && width == o.width; }
  friend bool operator==(const Shape&, const Shape&) = default;
};

std::string to_string(const Shape& s);

/// Dense H x W x C array of doubles. Layout is row-major with the channel
/// index fastest: element (y, x, c) lives at (y * W + x) * C + c.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(Shape shape, double fill = 0.0);
  Tensor(std::size_t height, std::size_t width, std::size_t channels, double fill = 0.0)
      : Tensor(Shape{height, width, channels}, fill) {}
  Tensor(Shape shape, std::vector<double> values);

  const Shape& shape() const { return shape_; }
  std::size_t height() const { return shape_.height; }
  std::size_t width() const { return shape_.width; }
  std::size_t channels() const { return shape_.channels; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  double& operator()(std::size_t y, std::size_t x, std::size_t c = 0) {
    return data_[(y * shape_.width + x) * shape_.channels + c];
  }
  double operator()(std::size_t y, std::size_t x, std::size_t c = 0) const {
    return data_[(y * shape_.width + x) * shape_.channels + c];
  }
  double& operator[](std::size_t i) { return data_[i]; }
  double operator[](std::size_t i) const { return data_[i]; }

  std::span<double> values() { return data_; }
  std::span<const double> values() const { return data_; }
  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }

  Tensor& operator+=(const Tensor& o);
  Tensor& operator-=(const Tensor& o);
  Tensor& operator*=(double s);
  /// this += s * o
  Tensor& add_scaled(const Tensor& o, double s);

  void fill(double v);

  friend bool operator==(const Tensor&, const Tensor&) = default;

 private:
  Shape shape_;
  std::vector<double> data_;
};

Tensor operator+(Tensor a, const Tensor& b);
Tensor operator-(Tensor a, const Tensor& b);
Tensor operator*(double s, Tensor a);

Tensor zeros_like(const Tensor& t);

/// Stacks a's channels followed by b's channels.
Tensor channel_concat(const Tensor& a, const Tensor& b);
Tensor channel_slice(const Tensor& t, std::size_t first, std::size_t count = 1);

/// Swaps height and width.
Tensor transpose_spatial(const Tensor& t);
Tensor flip_horizontal(const Tensor& t);
Tensor flip_vertical(const Tensor& t);
Tensor crop(const Tensor& t, std::size_t y0, std::size_t x0, std::size_t h, std::size_t w);

Tensor elementwise_max(const Tensor& a, const Tensor& b);
Tensor clamp(const Tensor& t, double lo, double hi);

double sum(const Tensor& t);
double mean(const Tensor& t);
double dot(const Tensor& a, const Tensor& b);
double l2_norm(const Tensor& t);
double max_abs(const Tensor& t);
double max_abs_diff(const Tensor& a, const Tensor& b);
double mean_abs_diff(const Tensor& a, const Tensor& b);
bool all_finite(const Tensor& t);
std::size_t count_zeros(const Tensor& t);

}  // namespace lzsc
