#pragma once

#include <cstdint>
#include <vector>

#include "lzsc/conv.hpp"
#include "lzsc/tensor.hpp"

namespace lzsc {

/// Two registered single-channel views of one scene.
struct ImagePair {
  Tensor m1;
  Tensor m2;
};

/// Procedural multi-modal pairs in [0, 1]. Both modalities share a scene of
/// smooth shading, rectangles and disks rendered with modality-specific
/// contrast. Modality 1 adds oriented texture and fine line detail that
/// modality 2 lacks; modality 2 adds bright compact hot spots that modality 1
/// lacks. Each image also gets independent Gaussian noise.
std::vector<ImagePair> synthetic_pairs(std::size_t count, std::size_t height, std::size_t width, std::uint64_t seed,
                                       double noise_sigma = 0.01);

struct CscSample {
  Tensor signal;  // D(code) + noise, single channel
  Tensor code;    // K channels
};

struct CscDataset {
  ConvKernel dictionary;  // K -> 1, unit-norm atoms
  std::vector<CscSample> samples;
};

/// Convolutional sparse-coding data: each code entry is non-zero with
/// probability `density`, amplitude uniformly in +-[0.5, 1.5].
CscDataset synthetic_csc(std::size_t count, std::size_t size, std::size_t atoms, std::size_t kernel_size,
                         double density, double noise_sigma, std::uint64_t seed);

/// Same as above with a caller-supplied dictionary.
std::vector<CscSample> synthetic_csc_samples(const ConvKernel& dictionary, std::size_t count, std::size_t size,
                                             double density, double noise_sigma, std::uint64_t seed);

}  // namespace lzsc
