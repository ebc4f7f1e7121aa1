#include "lzsc/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "lzsc/error.hpp"

namespace lzsc {

namespace {

using Rng = std::mt19937_64;

double uniform(Rng& rng, double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); }
std::size_t uniform_index(Rng& rng, std::size_t lo, std::size_t hi) {
  return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
}

ImagePair make_pair(std::size_t h, std::size_t w, Rng& rng, double noise_sigma) {
  Tensor m1(h, w, 1), m2(h, w, 1);
  const double H = static_cast<double>(h), W = static_cast<double>(w);

  // Shared smooth shading.
  const double bg1 = uniform(rng, 0.3, 0.5), bg2 = uniform(rng, 0.1, 0.3);
  const double sx = uniform(rng, -0.15, 0.15), sy = uniform(rng, -0.15, 0.15);
  for (std::size_t y = 0; y < h; ++y)
    for (std::size_t x = 0; x < w; ++x) {
      const double shade = sx * (static_cast<double>(x) / W - 0.5) + sy * (static_cast<double>(y) / H - 0.5);
      m1(y, x) = bg1 + shade;
      m2(y, x) = bg2 + 0.5 * shade;
    }

  // Shared shapes, each with its own contrast per modality.
  const std::size_t rects = uniform_index(rng, 2, 4);
  for (std::size_t r = 0; r < rects; ++r) {
    const std::size_t rh = uniform_index(rng, h / 8, h / 3), rw = uniform_index(rng, w / 8, w / 3);
    const std::size_t y0 = uniform_index(rng, 0, h - rh), x0 = uniform_index(rng, 0, w - rw);
    const double v1 = uniform(rng, 0.1, 0.9), v2 = uniform(rng, 0.1, 0.7);
    for (std::size_t y = y0; y < y0 + rh; ++y)
      for (std::size_t x = x0; x < x0 + rw; ++x) {
        m1(y, x) = v1;
        m2(y, x) = v2;
      }
  }
  const std::size_t disks = uniform_index(rng, 1, 3);
  for (std::size_t d = 0; d < disks; ++d) {
    const double cy = uniform(rng, 0, H), cx = uniform(rng, 0, W), rad = uniform(rng, H / 12, H / 5);
    const double v1 = uniform(rng, 0.1, 0.9), v2 = uniform(rng, 0.1, 0.7);
    for (std::size_t y = 0; y < h; ++y)
      for (std::size_t x = 0; x < w; ++x)
        if (std::hypot(static_cast<double>(y) - cy, static_cast<double>(x) - cx) <= rad) {
          m1(y, x) = v1;
          m2(y, x) = v2;
        }
  }

  // Modality 1 only: oriented texture patch and thin lines.
  {
    const std::size_t th = uniform_index(rng, h / 4, h / 2), tw = uniform_index(rng, w / 4, w / 2);
    const std::size_t y0 = uniform_index(rng, 0, h - th), x0 = uniform_index(rng, 0, w - tw);
    const double angle = uniform(rng, 0, std::numbers::pi), freq = uniform(rng, 0.5, 1.2);
    const double amp = uniform(rng, 0.08, 0.15);
    for (std::size_t y = y0; y < y0 + th; ++y)
      for (std::size_t x = x0; x < x0 + tw; ++x)
        m1(y, x) += amp * std::sin(freq * (std::cos(angle) * static_cast<double>(x) +
                                           std::sin(angle) * static_cast<double>(y)));
    const std::size_t lines = uniform_index(rng, 1, 2);
    for (std::size_t l = 0; l < lines; ++l) {
      const double v = uniform(rng, 0.0, 1.0) < 0.5 ? 0.05 : 0.95;
      if (uniform(rng, 0, 1) < 0.5) {
        const std::size_t y = uniform_index(rng, 0, h - 1);
        for (std::size_t x = 0; x < w; ++x) m1(y, x) = v;
      } else {
        const std::size_t x = uniform_index(rng, 0, w - 1);
        for (std::size_t y = 0; y < h; ++y) m1(y, x) = v;
      }
    }
  }

  // Modality 2 only: compact hot spots.
  const std::size_t spots = uniform_index(rng, 1, 3);
  for (std::size_t s = 0; s < spots; ++s) {
    const double cy = uniform(rng, 0, H), cx = uniform(rng, 0, W), sigma = uniform(rng, 1.5, 3.0);
    const double amp = uniform(rng, 0.5, 0.8);
    for (std::size_t y = 0; y < h; ++y)
      for (std::size_t x = 0; x < w; ++x) {
        const double dy = static_cast<double>(y) - cy, dx = static_cast<double>(x) - cx;
        m2(y, x) += amp * std::exp(-(dy * dy + dx * dx) / (2 * sigma * sigma));
      }
  }

  std::normal_distribution<double> noise(0.0, noise_sigma);
  for (std::size_t i = 0; i < m1.size(); ++i) {
    m1[i] = std::clamp(m1[i] + (noise_sigma > 0 ? noise(rng) : 0.0), 0.0, 1.0);
    m2[i] = std::clamp(m2[i] + (noise_sigma > 0 ? noise(rng) : 0.0), 0.0, 1.0);
  }
  return {std::move(m1), std::move(m2)};
}

}  // namespace

std::vector<ImagePair> synthetic_pairs(std::size_t count, std::size_t height, std::size_t width, std::uint64_t seed,
                                       double noise_sigma) {
  require(height >= 16 && width >= 16, "synthetic_pairs: images must be at least 16x16");
  require(noise_sigma >= 0.0, "synthetic_pairs: noise must be non-negative");
  Rng rng(seed);
  std::vector<ImagePair> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) out.push_back(make_pair(height, width, rng, noise_sigma));
  return out;
}

std::vector<CscSample> synthetic_csc_samples(const ConvKernel& dictionary, std::size_t count, std::size_t size,
                                             double density, double noise_sigma, std::uint64_t seed) {
  require(dictionary.out_channels() == 1, "synthetic_csc: dictionary must synthesise one channel");
  require(density > 0.0 && density <= 1.0, "synthetic_csc: density must lie in (0, 1]");
  Rng rng(seed);
  std::vector<CscSample> out;
  std::normal_distribution<double> noise(0.0, noise_sigma);
  for (std::size_t n = 0; n < count; ++n) {
    CscSample s;
    s.code = Tensor(size, size, dictionary.in_channels());
    for (std::size_t i = 0; i < s.code.size(); ++i) {
      if (uniform(rng, 0, 1) >= density) continue;
      const double mag = uniform(rng, 0.5, 1.5);
      s.code[i] = uniform(rng, 0, 1) < 0.5 ? -mag : mag;
    }
    s.signal = conv2d_same(s.code, dictionary);
    if (noise_sigma > 0)
      for (std::size_t i = 0; i < s.signal.size(); ++i) s.signal[i] += noise(rng);
    out.push_back(std::move(s));
  }
  return out;
}

CscDataset synthetic_csc(std::size_t count, std::size_t size, std::size_t atoms, std::size_t kernel_size,
                         double density, double noise_sigma, std::uint64_t seed) {
  Rng rng(seed);
  CscDataset d{ConvKernel(KernelShape{1, atoms, kernel_size, kernel_size}), {}};
  std::normal_distribution<double> gauss(0.0, 1.0);
  const std::size_t taps = kernel_size * kernel_size;
  for (std::size_t k = 0; k < atoms; ++k) {
    double norm = 0.0;
    for (std::size_t t = 0; t < taps; ++t) {
      const double v = gauss(rng);
      d.dictionary.at(0, k, t / kernel_size, t % kernel_size) = v;
      norm += v * v;
    }
    norm = std::sqrt(norm);
    for (std::size_t t = 0; t < taps; ++t) d.dictionary.at(0, k, t / kernel_size, t % kernel_size) /= norm;
  }
  d.samples = synthetic_csc_samples(d.dictionary, count, size, density, noise_sigma, rng());
  return d;
}

}  // namespace lzsc
