#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <vector>

#include "georeg/geo.hpp"
#include "georeg/image.hpp"
#include "georeg/imaging_geometry.hpp"
#include "georeg/raster.hpp"
#include "georeg/sequencer.hpp"

namespace georeg {

struct WorldSpec {
  std::uint64_t seed = 1;
  double extent_meters = 800.0;
  double meters_per_pixel = 1.0;
  double density = 30.0;       // buildings and blobs per hectare; 0 gives a uniform raster
  int road_count = 3;          // straight roads, drawn only when density > 0
  double road_width_meters = 6.0;
  int smoothness = 1;          // 3x3 box-blur passes
  /// Point-symmetric world (p(x, y) = p(W-1-x, H-1-y)) with a road through
  /// the center: every bearing looks like its opposite from the center.
  bool symmetric = false;
  GeoPoint center{37.4275, -122.1697};
};

void validate(const WorldSpec& spec);

/// Seeded, 8-bit quantized north-up raster with its georeference.
GeoRaster generate_world(const WorldSpec& spec);

/// Ground view for a pose: the fov-wide window of the local polar image
/// starting at column round(heading * W / 360), plus optional Gaussian
/// pixel noise. Throws OutOfBounds when the tile leaves the world.
Image render_ground_view(const GeoRaster& world, const GeoPose& pose, double fov_degrees,
                         const GeometryConfig& geometry, double noise_sigma = 0.0, std::mt19937_64* rng = nullptr);

enum class TrajectoryKind { StationarySweep, Waypoints };

struct TrajectorySpec {
  TrajectoryKind kind = TrajectoryKind::StationarySweep;
  std::optional<GeoPoint> start;  // defaults to the world center
  double start_heading = 0.0;
  double sweep_degrees = 180.0;   // stationary sweep: heading change over the run
  double duration_seconds = 10.0;
  /// Waypoints: offsets from the start in meters, walked at `speed`; the
  /// camera heading is the travel bearing plus `heading_offset`.
  std::vector<EastNorth> waypoints;
  double speed = 1.4;
  double heading_offset = 0.0;
  double frame_rate = 15.0;
  double heading_sigma = 0.0;   // odometry heading-delta noise per frame, degrees
  double position_sigma = 0.0;  // odometry translation noise per frame, meters
  double camera_fov = 69.0;
  double pixel_noise = 0.0;
  std::uint64_t seed = 1;
};

void validate(const TrajectorySpec& spec);

struct TrajectoryFrame {
  FrameObservation observation;
  GeoPose truth;
};

/// Poses and odometry only; observation images are left empty.
std::vector<TrajectoryFrame> generate_poses(const TrajectorySpec& spec, const GeoPoint& world_center);

/// Fills in the observation image of every frame.
void render_frames(const GeoRaster& world, const TrajectorySpec& spec, const GeometryConfig& geometry,
                   std::vector<TrajectoryFrame>& frames);

std::vector<TrajectoryFrame> generate_trajectory(const GeoRaster& world, const TrajectorySpec& spec,
                                                 const GeometryConfig& geometry);

struct PairSpec {
  int count = 600;
  double min_separation_meters = 15.0;
  double pixel_noise = 0.02;
  std::uint64_t seed = 3;
};

/// 360-degree ground panorama and its polar reference at one location.
struct PairRecord {
  Image ground;
  Image reference;
  GeoPoint location;
  double heading_degrees = 0.0;
};

/// Random locations at least `min_separation_meters` apart whose tiles fit
/// inside the world, each with a uniformly random heading.
std::vector<PairRecord> generate_pairs(const GeoRaster& world, const PairSpec& spec, const GeometryConfig& geometry);

}  // namespace georeg
