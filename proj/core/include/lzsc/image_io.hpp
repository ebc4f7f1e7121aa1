#pragma once

#include <filesystem>

#include "lzsc/tensor.hpp"

namespace lzsc {

/// Reads an 8-bit PNG, PGM (P2/P5) or PPM (P3/P6) file as an H x W x C tensor
/// with values in [0, 1]; C is 1 for grayscale sources and 3 for colour.
/// Alpha is dropped. Throws IoError with the path on failure.
Tensor read_image(const std::filesystem::path& path);

/// Writes a 1- or 3-channel tensor as 8-bit PNG (.png) or PGM/PPM (.pgm,
/// .ppm), clamping to [0, 1] and rounding to the nearest level.
void write_image(const std::filesystem::path& path, const Tensor& image);

/// BT.601 luma 0.299 R + 0.587 G + 0.114 B; single-channel input is returned
/// unchanged.
Tensor to_luma(const Tensor& image);

struct YCbCr {
  Tensor y, cb, cr;
};
/// Full-range BT.601 conversion (chroma centred on 0.5).
YCbCr rgb_to_ycbcr(const Tensor& rgb);
Tensor ycbcr_to_rgb(const YCbCr& ycc);

/// Affine map of the value range onto [0, 1]; constant tensors map to 0.
Tensor normalize_for_display(const Tensor& t);

/// Bilinear resampling (pixel-centre aligned) of every channel.
Tensor resize_bilinear(const Tensor& t, std::size_t height, std::size_t width);

}  // namespace lzsc
