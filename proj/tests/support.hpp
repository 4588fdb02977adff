#pragma once

// Shared helpers for the test binaries: seeded random data and small
// independent re-implementations used as oracles.

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "georeg/alignment.hpp"
#include "georeg/feature_map.hpp"
#include "georeg/geo.hpp"
#include "georeg/image.hpp"
#include "georeg/raster.hpp"

namespace testing {

inline georeg::FeatureMap random_map(std::mt19937_64& rng, int w, int h, int k, bool unit = true) {
  std::normal_distribution<double> n(0.0, 1.0);
  georeg::FeatureMap f(w, h, k);
  for (double& v : f.values()) v = n(rng);
  if (!unit) return f;
  double sq = 0.0;
  for (double v : f.values()) sq += v * v;
  for (double& v : f.values()) v /= std::sqrt(sq);
  return f;
}

inline georeg::Image random_image(std::mt19937_64& rng, int w, int h) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  georeg::Image img(w, h);
  for (double& v : img.pixels()) v = u(rng);
  return img;
}

// Independent triple loop written against at(), not the library's storage.
inline std::vector<double> oracle_similarity(const georeg::FeatureMap& fg, const georeg::FeatureMap& fs) {
  const int ws = fs.width();
  std::vector<double> s(ws, 0.0);
  for (int i = 0; i < ws; ++i) {
    double acc = 0.0;
    for (int k = 0; k < fg.channels(); ++k)
      for (int h = 0; h < fg.height(); ++h)
        for (int w = 0; w < fg.width(); ++w) acc += fg.at(w, h, k) * fs.at((w + i) % ws, h, k);
    s[i] = acc;
  }
  return s;
}

inline double frobenius(const georeg::FeatureMap& a, const georeg::FeatureMap& b) {
  double sq = 0.0;
  for (int w = 0; w < a.width(); ++w)
    for (int h = 0; h < a.height(); ++h)
      for (int k = 0; k < a.channels(); ++k) {
        const double d = a.at(w, h, k) - b.at(w, h, k);
        sq += d * d;
      }
  return std::sqrt(sq);
}

// Columns [start, start + width) of fs, wrapping.
inline georeg::FeatureMap oracle_window(const georeg::FeatureMap& fs, int start, int width) {
  georeg::FeatureMap out(width, fs.height(), fs.channels());
  for (int w = 0; w < width; ++w)
    for (int h = 0; h < fs.height(); ++h)
      for (int k = 0; k < fs.channels(); ++k) out.at(w, h, k) = fs.at((start + w) % fs.width(), h, k);
  return out;
}

inline int oracle_argmax(const std::vector<double>& v) {
  int best = 0;
  for (int i = 1; i < static_cast<int>(v.size()); ++i)
    if (v[i] > v[best]) best = i;
  return best;
}

inline double wrapped_error(double a, double b) {
  double d = std::fmod(std::fabs(a - b), 360.0);
  return d > 180.0 ? 360.0 - d : d;
}

// Flat world raster with a georeference centered at `center`.
inline georeg::GeoRaster flat_world(int side, double value, double mpp = 1.0,
                                    georeg::GeoPoint center = {37.4275, -122.1697}) {
  georeg::GeoRaster r;
  r.image = georeg::Image(side, side, value);
  r.georef = georeg::GeoReference{center, mpp};
  return r;
}

}  // namespace testing
