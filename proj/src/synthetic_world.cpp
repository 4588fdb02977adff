#include "georeg/synthetic_world.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "georeg/error.hpp"

namespace georeg {

void validate(const WorldSpec& s) {
  if (!(s.extent_meters > 0.0) || !(s.meters_per_pixel > 0.0))
    fail(ErrorCode::InvalidArgument, "world extent and resolution must be positive");
  if (!(s.density >= 0.0)) fail(ErrorCode::InvalidArgument, "structure density must be non-negative");
  if (s.road_count < 0 || !(s.road_width_meters >= 0.0)) fail(ErrorCode::InvalidArgument, "bad road parameters");
  if (s.smoothness < 0) fail(ErrorCode::InvalidArgument, "smoothness must be non-negative");
  if (!is_valid(s.center)) fail(ErrorCode::InvalidArgument, "world center is not a valid geo-location");
}

namespace {

constexpr double kBackground = 0.35;
constexpr double kRoad = 0.12;

double uniform(std::mt19937_64& rng, double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); }

// Thick line through (px, py) with direction angle `theta`, in pixels.
void draw_road(Image& img, double px, double py, double theta, double half_width) {
  const double dx = std::cos(theta), dy = std::sin(theta);
  for (int y = 0; y < img.height(); ++y)
    for (int x = 0; x < img.width(); ++x) {
      const double d = std::fabs((x - px) * dy - (y - py) * dx);
      if (d <= half_width) img.at(x, y) = kRoad;
    }
}

void draw_building(Image& img, double cx, double cy, double a, double b, double theta, double value) {
  const double c = std::cos(theta), s = std::sin(theta);
  const double r = std::hypot(a, b);
  const int x0 = std::max(0, static_cast<int>(std::floor(cx - r)));
  const int x1 = std::min(img.width() - 1, static_cast<int>(std::ceil(cx + r)));
  const int y0 = std::max(0, static_cast<int>(std::floor(cy - r)));
  const int y1 = std::min(img.height() - 1, static_cast<int>(std::ceil(cy + r)));
  for (int y = y0; y <= y1; ++y)
    for (int x = x0; x <= x1; ++x) {
      const double u = (x - cx) * c + (y - cy) * s;
      const double v = -(x - cx) * s + (y - cy) * c;
      if (std::fabs(u) <= a && std::fabs(v) <= b) img.at(x, y) = value;
    }
}

void draw_blob(Image& img, double cx, double cy, double radius, double amplitude) {
  const double reach = 3.0 * radius;
  const int x0 = std::max(0, static_cast<int>(std::floor(cx - reach)));
  const int x1 = std::min(img.width() - 1, static_cast<int>(std::ceil(cx + reach)));
  const int y0 = std::max(0, static_cast<int>(std::floor(cy - reach)));
  const int y1 = std::min(img.height() - 1, static_cast<int>(std::ceil(cy + reach)));
  const double inv = 1.0 / (2.0 * radius * radius);
  for (int y = y0; y <= y1; ++y)
    for (int x = x0; x <= x1; ++x) {
      const double d2 = (x - cx) * (x - cx) + (y - cy) * (y - cy);
      img.at(x, y) += amplitude * std::exp(-d2 * inv);
    }
}

Image box_blur(const Image& in) {
  Image out(in.width(), in.height());
  for (int y = 0; y < in.height(); ++y)
    for (int x = 0; x < in.width(); ++x) {
      double sum = 0.0;
      int n = 0;
      for (int dy = -1; dy <= 1; ++dy)
        for (int dx = -1; dx <= 1; ++dx) {
          const int xx = x + dx, yy = y + dy;
          if (xx < 0 || yy < 0 || xx >= in.width() || yy >= in.height()) continue;
          sum += in.at(xx, yy);
          ++n;
        }
      out.at(x, y) = sum / n;
    }
  return out;
}

}  // namespace

GeoRaster generate_world(const WorldSpec& spec) {
  validate(spec);
  const int n = std::max(2, static_cast<int>(std::lround(spec.extent_meters / spec.meters_per_pixel)));
  Image img(n, n, kBackground);
  std::mt19937_64 rng(spec.seed);
  const double mpp = spec.meters_per_pixel;

  if (spec.density > 0.0) {
    const double hectares = (n * mpp) * (n * mpp) / 10000.0;
    const int structures = static_cast<int>(std::lround(spec.density * hectares));
    const double half_road = spec.road_width_meters / mpp / 2.0;
    for (int r = 0; r < spec.road_count; ++r) {
      const double px = uniform(rng, 0.0, n - 1.0), py = uniform(rng, 0.0, n - 1.0);
      draw_road(img, px, py, uniform(rng, 0.0, kPi), half_road);
    }
    if (spec.symmetric) draw_road(img, (n - 1) / 2.0, (n - 1) / 2.0, uniform(rng, 0.0, kPi), half_road);
    for (int i = 0; i < structures; ++i) {
      const double cx = uniform(rng, 0.0, n - 1.0), cy = uniform(rng, 0.0, n - 1.0);
      if (uniform(rng, 0.0, 1.0) < 0.5) {
        const double a = uniform(rng, 2.0, 10.0) / mpp, b = uniform(rng, 2.0, 10.0) / mpp;
        const double value = uniform(rng, 0.0, 1.0) < 0.5 ? uniform(rng, 0.0, 0.25) : uniform(rng, 0.55, 1.0);
        draw_building(img, cx, cy, a, b, uniform(rng, 0.0, kPi), value);
      } else {
        draw_blob(img, cx, cy, uniform(rng, 3.0, 15.0) / mpp, uniform(rng, -0.35, 0.35));
      }
    }
    for (int i = 0; i < spec.smoothness; ++i) img = box_blur(img);
    for (double& v : img.pixels()) v = std::clamp(v, 0.0, 1.0);
  }

  if (spec.symmetric) {
    auto px = img.pixels();
    const std::size_t total = px.size();
    for (std::size_t i = total / 2; i < total; ++i) px[i] = px[total - 1 - i];
  }
  quantize_8bit(img);
  return GeoRaster{std::move(img), GeoReference{spec.center, mpp}};
}

Image render_ground_view(const GeoRaster& world, const GeoPose& pose, double fov_degrees, const GeometryConfig& geometry,
                         double noise_sigma, std::mt19937_64* rng) {
  const PolarImage polar = reference_polar(world, pose.position, geometry);
  const int w = polar.pixels.width();
  const int width = fov_to_width(fov_degrees, w);
  const int start = wrap_index(std::llround(wrap360(pose.heading_degrees) * w / 360.0), w);
  Image view = column_window(polar.pixels, start, width);
  if (noise_sigma > 0.0) {
    if (!rng) fail(ErrorCode::InvalidArgument, "pixel noise needs a random generator");
    std::normal_distribution<double> noise(0.0, noise_sigma);
    for (double& v : view.pixels()) v += noise(*rng);
  }
  return view;
}

void validate(const TrajectorySpec& s) {
  if (!(s.frame_rate > 0.0)) fail(ErrorCode::InvalidArgument, "frame rate must be positive");
  if (!(s.duration_seconds > 0.0)) fail(ErrorCode::InvalidArgument, "duration must be positive");
  if (!(s.heading_sigma >= 0.0) || !(s.position_sigma >= 0.0) || !(s.pixel_noise >= 0.0))
    fail(ErrorCode::InvalidArgument, "noise levels must be non-negative");
  if (!(s.camera_fov > 0.0 && s.camera_fov <= 360.0)) fail(ErrorCode::InvalidFov, "camera fov must lie in (0, 360]");
  if (s.kind == TrajectoryKind::Waypoints && (s.waypoints.empty() || !(s.speed >= 0.0)))
    fail(ErrorCode::InvalidArgument, "waypoint trajectory needs waypoints and a non-negative speed");
}

std::vector<TrajectoryFrame> generate_poses(const TrajectorySpec& spec, const GeoPoint& world_center) {
  validate(spec);
  const GeoPoint origin = spec.start.value_or(world_center);
  const int n = std::max(1, static_cast<int>(std::lround(spec.duration_seconds * spec.frame_rate)));
  std::vector<EastNorth> pos(n);
  std::vector<double> heading(n);
  if (spec.kind == TrajectoryKind::StationarySweep) {
    for (int i = 0; i < n; ++i) heading[i] = wrap360(spec.start_heading + (n > 1 ? spec.sweep_degrees * i / (n - 1) : 0.0));
  } else {
    std::vector<EastNorth> path{{0.0, 0.0}};
    path.insert(path.end(), spec.waypoints.begin(), spec.waypoints.end());
    for (int i = 0; i < n; ++i) {
      double remaining = spec.speed * i / spec.frame_rate;
      std::size_t seg = 0;
      EastNorth p = path[0];
      double bearing = 0.0;
      for (; seg + 1 < path.size(); ++seg) {
        const double de = path[seg + 1].east - path[seg].east, dn = path[seg + 1].north - path[seg].north;
        const double len = std::hypot(de, dn);
        bearing = rad2deg(std::atan2(de, dn));
        if (remaining <= len || seg + 2 == path.size()) {
          const double f = len > 0.0 ? std::min(remaining, len) / len : 0.0;
          p = {path[seg].east + f * de, path[seg].north + f * dn};
          break;
        }
        remaining -= len;
      }
      pos[i] = p;
      heading[i] = wrap360(bearing + spec.heading_offset);
    }
  }

  std::mt19937_64 rng(spec.seed);
  std::normal_distribution<double> unit(0.0, 1.0);
  const double h0 = deg2rad(heading[0]);
  std::vector<TrajectoryFrame> frames(n);
  for (int i = 0; i < n; ++i) {
    auto& f = frames[i];
    f.truth.position = from_local(origin, pos[i]);
    f.truth.heading_degrees = heading[i];
    f.observation.global_position = f.truth.position;
    f.observation.timestamp = i / spec.frame_rate;
    if (i == 0) continue;
    const double delta = wrap180(heading[i] - heading[i - 1]);
    const double de = pos[i].east - pos[i - 1].east, dn = pos[i].north - pos[i - 1].north;
    double fwd = de * std::sin(h0) + dn * std::cos(h0);
    double right = de * std::cos(h0) - dn * std::sin(h0);
    double noise_h = spec.heading_sigma > 0.0 ? spec.heading_sigma * unit(rng) : 0.0;
    f.observation.heading_delta = delta + noise_h;
    if (spec.position_sigma > 0.0) {
      fwd += spec.position_sigma * unit(rng);
      right += spec.position_sigma * unit(rng);
    }
    f.observation.translation_forward = fwd;
    f.observation.translation_right = right;
  }
  return frames;
}

void render_frames(const GeoRaster& world, const TrajectorySpec& spec, const GeometryConfig& geometry,
                   std::vector<TrajectoryFrame>& frames) {
  std::mt19937_64 rng(spec.seed ^ 0x9e3779b97f4a7c15ULL);
  for (auto& f : frames)
    f.observation.image = render_ground_view(world, f.truth, spec.camera_fov, geometry, spec.pixel_noise, &rng);
}

std::vector<TrajectoryFrame> generate_trajectory(const GeoRaster& world, const TrajectorySpec& spec,
                                                 const GeometryConfig& geometry) {
  if (!world.georef) fail(ErrorCode::MissingGeoreference, "trajectory needs a geo-referenced world");
  auto frames = generate_poses(spec, world.georef->center);
  render_frames(world, spec, geometry, frames);
  return frames;
}

std::vector<PairRecord> generate_pairs(const GeoRaster& world, const PairSpec& spec, const GeometryConfig& geometry) {
  if (!world.georef) fail(ErrorCode::MissingGeoreference, "pair generation needs a geo-referenced world");
  if (spec.count < 0 || !(spec.min_separation_meters >= 0.0) || !(spec.pixel_noise >= 0.0))
    fail(ErrorCode::InvalidArgument, "bad pair spec");
  const double mpp = world.georef->meters_per_pixel;
  const double half_w = (world.image.width() - 1) * mpp / 2.0;
  const double half_h = (world.image.height() - 1) * mpp / 2.0;
  const double margin = geometry.coverage_meters / 2.0 + 2.0 * mpp;
  if (half_w <= margin || half_h <= margin) fail(ErrorCode::InvalidArgument, "world too small for the tile coverage");

  std::mt19937_64 rng(spec.seed);
  std::vector<EastNorth> chosen;
  const long long max_attempts = 1000LL * std::max(spec.count, 1);
  long long attempts = 0;
  while (static_cast<int>(chosen.size()) < spec.count) {
    if (++attempts > max_attempts)
      fail(ErrorCode::InvalidArgument, "could not place " + std::to_string(spec.count) + " pairs at the requested separation");
    const EastNorth p{uniform(rng, -half_w + margin, half_w - margin), uniform(rng, -half_h + margin, half_h - margin)};
    bool ok = true;
    for (const auto& q : chosen)
      if (std::hypot(p.east - q.east, p.north - q.north) < spec.min_separation_meters) {
        ok = false;
        break;
      }
    if (ok) chosen.push_back(p);
  }

  std::vector<PairRecord> out;
  out.reserve(chosen.size());
  for (const auto& p : chosen) {
    PairRecord r;
    r.location = from_local(world.georef->center, p);
    r.heading_degrees = uniform(rng, 0.0, 360.0);
    r.reference = reference_polar(world, r.location, geometry).pixels;
    r.ground = render_ground_view(world, {r.location, r.heading_degrees}, 360.0, geometry, spec.pixel_noise, &rng);
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace georeg
