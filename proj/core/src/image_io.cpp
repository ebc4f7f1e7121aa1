#include "lzsc/image_io.hpp"

#include <Eigen/Dense>

#include <png.h>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "lzsc/error.hpp"

namespace lzsc {

namespace {

std::string lower_extension(const std::filesystem::path& p) {
  std::string e = p.extension().string();
  std::transform(e.begin(), e.end(), e.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return e;
}

std::uint8_t to_byte(double v) {
  if (!(v > 0.0)) return 0;
  if (v >= 1.0) return 255;
  return static_cast<std::uint8_t>(std::lround(v * 255.0));
}

Tensor read_png(const std::filesystem::path& path) {
  png_image img{};
  img.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&img, path.c_str()))
    throw IoError("cannot decode PNG " + path.string() + ": " + img.message);
  const bool color = (img.format & PNG_FORMAT_FLAG_COLOR) != 0;
  img.format = color ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;
  const std::size_t c = color ? 3 : 1;
  std::vector<png_byte> buf(PNG_IMAGE_SIZE(img));
  if (!png_image_finish_read(&img, nullptr, buf.data(), 0, nullptr)) {
    const std::string msg = img.message;
    png_image_free(&img);
    throw IoError("cannot decode PNG " + path.string() + ": " + msg);
  }
  Tensor t(img.height, img.width, c);
  for (std::size_t i = 0; i < t.size(); ++i) t[i] = buf[i] / 255.0;
  return t;
}

void write_png(const std::filesystem::path& path, const Tensor& image) {
  png_image img{};
  img.version = PNG_IMAGE_VERSION;
  img.width = static_cast<png_uint_32>(image.width());
  img.height = static_cast<png_uint_32>(image.height());
  img.format = image.channels() == 3 ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;
  std::vector<png_byte> buf(image.size());
  for (std::size_t i = 0; i < buf.size(); ++i) buf[i] = to_byte(image[i]);
  if (!png_image_write_to_file(&img, path.c_str(), 0, buf.data(), 0, nullptr))
    throw IoError("cannot write PNG " + path.string() + ": " + img.message);
}

// Netpbm header token, skipping whitespace and '#' comments.
std::string pnm_token(std::istream& in) {
  std::string tok;
  int ch;
  while ((ch = in.get()) != EOF) {
    if (ch == '#') {
      while ((ch = in.get()) != EOF && ch != '\n') {
      }
      continue;
    }
    if (std::isspace(ch)) {
      if (!tok.empty()) break;
      continue;
    }
    tok.push_back(static_cast<char>(ch));
  }
  return tok;
}

Tensor read_pnm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  const std::string magic = pnm_token(in);
  const bool ascii = magic == "P2" || magic == "P3";
  const bool color = magic == "P3" || magic == "P6";
  if (!(ascii || magic == "P5" || magic == "P6")) throw IoError("not a PGM/PPM file: " + path.string());
  std::size_t w = 0, h = 0;
  long maxval = 0;
  try {
    w = std::stoul(pnm_token(in));
    h = std::stoul(pnm_token(in));
    maxval = std::stol(pnm_token(in));
  } catch (const std::exception&) {
    throw IoError("malformed PGM/PPM header in " + path.string());
  }
  if (w == 0 || h == 0 || maxval <= 0 || maxval > 255)
    throw IoError("unsupported PGM/PPM header in " + path.string() + " (8-bit images only)");
  Tensor t(h, w, color ? 3 : 1);
  if (ascii) {
    for (std::size_t i = 0; i < t.size(); ++i) {
      long v = -1;
      if (!(in >> v) || v < 0 || v > maxval) throw IoError("truncated or invalid pixel data in " + path.string());
      t[i] = static_cast<double>(v) / static_cast<double>(maxval);
    }
  } else {
    std::vector<unsigned char> buf(t.size());
    in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
    if (in.gcount() != static_cast<std::streamsize>(buf.size()))
      throw IoError("truncated pixel data in " + path.string());
    for (std::size_t i = 0; i < t.size(); ++i)
      t[i] = std::min(1.0, static_cast<double>(buf[i]) / static_cast<double>(maxval));
  }
  return t;
}

void write_pnm(const std::filesystem::path& path, const Tensor& image) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << (image.channels() == 3 ? "P6" : "P5") << '\n' << image.width() << ' ' << image.height() << "\n255\n";
  std::vector<unsigned char> buf(image.size());
  for (std::size_t i = 0; i < buf.size(); ++i) buf[i] = to_byte(image[i]);
  out.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
  if (!out) throw IoError("write failed for " + path.string());
}

}  // namespace

Tensor read_image(const std::filesystem::path& path) {
  if (!std::filesystem::is_regular_file(path)) throw IoError("no such image file: " + path.string());
  const std::string ext = lower_extension(path);
  if (ext == ".png") return read_png(path);
  if (ext == ".pgm" || ext == ".ppm" || ext == ".pnm") return read_pnm(path);
  throw IoError("unsupported image format " + path.string() + " (use PNG, PGM or PPM)");
}

void write_image(const std::filesystem::path& path, const Tensor& image) {
  require(image.channels() == 1 || image.channels() == 3, "write_image: images must have 1 or 3 channels");
  require(!image.empty(), "write_image: empty image");
  const std::string ext = lower_extension(path);
  if (ext == ".png") return write_png(path, image);
  if (ext == ".pgm" || ext == ".ppm" || ext == ".pnm") {
    require((ext == ".ppm") == (image.channels() == 3) || ext == ".pnm",
            "write_image: .pgm holds grayscale and .ppm holds colour images");
    return write_pnm(path, image);
  }
  throw IoError("unsupported image format " + path.string() + " (use PNG, PGM or PPM)");
}

Tensor to_luma(const Tensor& image) {
  if (image.channels() == 1) return image;
  require(image.channels() == 3, "to_luma: expected 1 or 3 channels");
  Tensor y(image.height(), image.width(), 1);
  for (std::size_t p = 0; p < y.size(); ++p)
    y[p] = 0.299 * image[3 * p] + 0.587 * image[3 * p + 1] + 0.114 * image[3 * p + 2];
  return y;
}

namespace {

// Full-range BT.601 rows for Y, Cb - 0.5, Cr - 0.5.
const Eigen::Matrix3d& ycbcr_matrix() {
  static const Eigen::Matrix3d m = (Eigen::Matrix3d() << 0.299, 0.587, 0.114,  //
                                    -0.168736, -0.331264, 0.5,                  //
                                    0.5, -0.418688, -0.081312)
                                       .finished();
  return m;
}

}  // namespace

YCbCr rgb_to_ycbcr(const Tensor& rgb) {
  require(rgb.channels() == 3, "rgb_to_ycbcr: expected 3 channels");
  const Eigen::Matrix3d& m = ycbcr_matrix();
  YCbCr o{Tensor(rgb.height(), rgb.width(), 1), Tensor(rgb.height(), rgb.width(), 1),
          Tensor(rgb.height(), rgb.width(), 1)};
  for (std::size_t p = 0; p < o.y.size(); ++p) {
    const Eigen::Vector3d v = m * Eigen::Vector3d(rgb[3 * p], rgb[3 * p + 1], rgb[3 * p + 2]);
    o.y[p] = v(0);
    o.cb[p] = v(1) + 0.5;
    o.cr[p] = v(2) + 0.5;
  }
  return o;
}

Tensor ycbcr_to_rgb(const YCbCr& ycc) {
  require(ycc.y.shape() == ycc.cb.shape() && ycc.y.shape() == ycc.cr.shape() && ycc.y.channels() == 1,
          "ycbcr_to_rgb: planes must be single-channel and equally sized");
  static const Eigen::Matrix3d inv = ycbcr_matrix().inverse();
  Tensor rgb(ycc.y.height(), ycc.y.width(), 3);
  for (std::size_t p = 0; p < ycc.y.size(); ++p) {
    const Eigen::Vector3d v = inv * Eigen::Vector3d(ycc.y[p], ycc.cb[p] - 0.5, ycc.cr[p] - 0.5);
    for (int c = 0; c < 3; ++c) rgb[3 * p + static_cast<std::size_t>(c)] = v(c);
  }
  return rgb;
}

Tensor normalize_for_display(const Tensor& t) {
  Tensor out(t.shape());
  if (t.empty()) return out;
  const auto [lo, hi] = std::minmax_element(t.values().begin(), t.values().end());
  const double range = *hi - *lo;
  if (!(range > 0.0)) return out;
  for (std::size_t i = 0; i < t.size(); ++i) out[i] = (t[i] - *lo) / range;
  return out;
}

Tensor resize_bilinear(const Tensor& t, std::size_t height, std::size_t width) {
  require(height > 0 && width > 0 && !t.empty(), "resize_bilinear: empty size");
  if (t.height() == height && t.width() == width) return t;
  Tensor out(height, width, t.channels());
  const double sy = static_cast<double>(t.height()) / static_cast<double>(height);
  const double sx = static_cast<double>(t.width()) / static_cast<double>(width);
  auto source = [](double pos, std::size_t n, std::size_t& i0, std::size_t& i1, double& f) {
    pos = std::clamp(pos, 0.0, static_cast<double>(n - 1));
    i0 = static_cast<std::size_t>(pos);
    i1 = std::min(i0 + 1, n - 1);
    f = pos - static_cast<double>(i0);
  };
  for (std::size_t y = 0; y < height; ++y) {
    std::size_t y0, y1;
    double fy;
    source((static_cast<double>(y) + 0.5) * sy - 0.5, t.height(), y0, y1, fy);
    for (std::size_t x = 0; x < width; ++x) {
      std::size_t x0, x1;
      double fx;
      source((static_cast<double>(x) + 0.5) * sx - 0.5, t.width(), x0, x1, fx);
      for (std::size_t c = 0; c < t.channels(); ++c) {
        const double top = (1 - fx) * t(y0, x0, c) + fx * t(y0, x1, c);
        const double bottom = (1 - fx) * t(y1, x0, c) + fx * t(y1, x1, c);
        out(y, x, c) = (1 - fy) * top + fy * bottom;
      }
    }
  }
  return out;
}

}  // namespace lzsc
