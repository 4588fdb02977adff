#include "georeg/image.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <string>

#include "georeg/error.hpp"
#include "georeg/geo.hpp"

namespace georeg {

Image::Image(int width, int height, double fill) : width_(width), height_(height) {
  if (width < 0 || height < 0) fail(ErrorCode::BadDimensions, "negative image size");
  pixels_.assign(static_cast<size_t>(width) * static_cast<size_t>(height), fill);
}

double sample_bilinear(const Image& image, double x, double y) noexcept {
  const int w = image.width();
  const int h = image.height();
  x = std::clamp(x, 0.0, static_cast<double>(w - 1));
  y = std::clamp(y, 0.0, static_cast<double>(h - 1));
  const int x0 = std::min(static_cast<int>(x), w - 1);
  const int y0 = std::min(static_cast<int>(y), h - 1);
  const int x1 = std::min(x0 + 1, w - 1);
  const int y1 = std::min(y0 + 1, h - 1);
  const double fx = x - x0;
  const double fy = y - y0;
  // Exact pass-through at integer coordinates keeps identity crops bit-exact.
  if (fx == 0.0 && fy == 0.0) return image.at(x0, y0);
  const double top = image.at(x0, y0) * (1.0 - fx) + image.at(x1, y0) * fx;
  const double bottom = image.at(x0, y1) * (1.0 - fx) + image.at(x1, y1) * fx;
  return top * (1.0 - fy) + bottom * fy;
}

Image shift_columns(const Image& image, int k) {
  return column_window(image, wrap_index(k, std::max(image.width(), 1)), image.width());
}

Image column_window(const Image& image, int start, int width) {
  if (image.width() == 0 || width < 0) fail(ErrorCode::BadDimensions, "column window on empty image");
  Image out(width, image.height());
  for (int y = 0; y < image.height(); ++y) {
    auto src = image.row(y);
    auto dst = out.row(y);
    for (int x = 0; x < width; ++x) dst[x] = src[wrap_index(static_cast<long long>(start) + x, image.width())];
  }
  return out;
}

void quantize_8bit(Image& image) noexcept {
  for (double& v : image.pixels()) v = std::round(std::clamp(v, 0.0, 1.0) * 255.0) / 255.0;
}

void write_pgm(const std::filesystem::path& path, const Image& image) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorCode::Io, "cannot open " + path.string() + " for writing");
  out << "P5\n" << image.width() << " " << image.height() << "\n255\n";
  std::vector<unsigned char> bytes(image.pixels().size());
  std::transform(image.pixels().begin(), image.pixels().end(), bytes.begin(), [](double v) {
    return static_cast<unsigned char>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0));
  });
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) fail(ErrorCode::Io, "short write to " + path.string());
}

namespace {

int read_header_int(std::istream& in) {
  // Skip whitespace and '#' comments between header tokens.
  for (;;) {
    const int c = in.peek();
    if (c == '#') {
      std::string ignored;
      std::getline(in, ignored);
    } else if (std::isspace(c)) {
      in.get();
    } else {
      break;
    }
  }
  int v = 0;
  if (!(in >> v)) fail(ErrorCode::Io, "malformed PGM header");
  return v;
}

}  // namespace

Image read_pgm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::Io, "cannot open " + path.string());
  std::string magic;
  in >> magic;
  if (magic != "P5") fail(ErrorCode::Io, path.string() + " is not a binary PGM");
  const int w = read_header_int(in);
  const int h = read_header_int(in);
  const int maxval = read_header_int(in);
  if (w <= 0 || h <= 0 || maxval <= 0 || maxval > 65535) fail(ErrorCode::Io, "bad PGM dimensions in " + path.string());
  in.get();  // single whitespace before raster
  Image image(w, h);
  const size_t n = static_cast<size_t>(w) * h;
  if (maxval < 256) {
    std::vector<unsigned char> bytes(n);
    in.read(reinterpret_cast<char*>(bytes.data()), static_cast<std::streamsize>(n));
    if (!in) fail(ErrorCode::Io, "truncated PGM " + path.string());
    for (size_t i = 0; i < n; ++i) image.pixels()[i] = bytes[i] / static_cast<double>(maxval);
  } else {
    std::vector<unsigned char> bytes(2 * n);
    in.read(reinterpret_cast<char*>(bytes.data()), static_cast<std::streamsize>(2 * n));
    if (!in) fail(ErrorCode::Io, "truncated PGM " + path.string());
    for (size_t i = 0; i < n; ++i) image.pixels()[i] = ((bytes[2 * i] << 8) | bytes[2 * i + 1]) / static_cast<double>(maxval);
  }
  return image;
}

}  // namespace georeg
