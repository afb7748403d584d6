#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "seqnav/errors.hpp"

namespace seqnav {

struct CameraIntrinsics {
  double fx, fy;
  double cx, cy;
  int width, height;

  CameraIntrinsics(double fx_, double fy_, double cx_, double cy_, int w,
                   int h)
      : fx(fx_), fy(fy_), cx(cx_), cy(cy_), width(w), height(h) {
    if (!(fx > 0.0) || !(fy > 0.0)) {
      throw InvalidSpec("CameraIntrinsics: focal lengths must be positive");
    }
    if (cx < 0.0 || cx >= width || cy < 0.0 || cy >= height) {
      throw InvalidSpec("CameraIntrinsics: principal point outside image");
    }
  }
};

// Rigid transform from the camera frame to the robot frame
// (x right, y forward, z up). Row-major 3x3 rotation.
struct CameraToRobot {
  std::array<double, 9> rotation;
  std::array<double, 3> translation;

  CameraToRobot(const std::array<double, 9>& rot,
                const std::array<double, 3>& trans)
      : rotation(rot), translation(trans) {
    validate();
  }

  static CameraToRobot identity() {
    return CameraToRobot({1, 0, 0, 0, 1, 0, 0, 0, 1}, {0, 0, 0});
  }

  // Camera mounted at `height_m` looking forward, pitched down by
  // `pitch_rad`. Camera axes: x right, y down, z along the optical axis.
  static CameraToRobot forward_mount(double height_m, double pitch_rad) {
    const double sp = std::sin(pitch_rad);
    const double cp = std::cos(pitch_rad);
    return CameraToRobot({1, 0, 0,  //
                          0, -sp, cp,  //
                          0, -cp, -sp},
                         {0.0, 0.0, height_m});
  }

  void apply(double px, double py, double pz, double& ox, double& oy,
             double& oz) const {
    const auto& r = rotation;
    ox = r[0] * px + r[1] * py + r[2] * pz + translation[0];
    oy = r[3] * px + r[4] * py + r[5] * pz + translation[1];
    oz = r[6] * px + r[7] * py + r[8] * pz + translation[2];
  }

  // Inverse transform (robot frame -> camera frame).
  void apply_inverse(double px, double py, double pz, double& ox, double& oy,
                     double& oz) const {
    const auto& r = rotation;
    const double qx = px - translation[0];
    const double qy = py - translation[1];
    const double qz = pz - translation[2];
    ox = r[0] * qx + r[3] * qy + r[6] * qz;
    oy = r[1] * qx + r[4] * qy + r[7] * qz;
    oz = r[2] * qx + r[5] * qy + r[8] * qz;
  }

 private:
  void validate() const {
    const auto& r = rotation;
    // R^T R = I to 1e-9.
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j) {
        double dot = 0.0;
        for (int k = 0; k < 3; ++k) dot += r[3 * k + i] * r[3 * k + j];
        const double expect = (i == j) ? 1.0 : 0.0;
        if (std::abs(dot - expect) > 1e-9) {
          throw InvalidSpec("CameraToRobot: rotation is not orthonormal");
        }
      }
    }
    const double det = r[0] * (r[4] * r[8] - r[5] * r[7]) -
                       r[1] * (r[3] * r[8] - r[5] * r[6]) +
                       r[2] * (r[3] * r[7] - r[4] * r[6]);
    if (std::abs(det - 1.0) > 1e-9) {
      throw InvalidSpec("CameraToRobot: rotation determinant is not +1");
    }
  }
};

// Per-pixel depth in meters. A pixel is valid when its depth is finite and
// strictly positive; invalid pixels are skipped, never imputed.
struct DepthImage {
  int height = 0;
  int width = 0;
  std::vector<double> depth;       // row-major
  std::vector<std::uint8_t> valid;

  DepthImage() = default;
  DepthImage(int h, int w)
      : height(h), width(w), depth(static_cast<std::size_t>(h) * w, 0.0),
        valid(static_cast<std::size_t>(h) * w, 0) {}

  static DepthImage from_depths(int h, int w, std::vector<double> d) {
    if (static_cast<std::size_t>(h) * w != d.size()) {
      throw ShapeMismatch("DepthImage: dims do not match data");
    }
    DepthImage img(h, w);
    img.depth = std::move(d);
    for (std::size_t i = 0; i < img.depth.size(); ++i) {
      img.valid[i] = (std::isfinite(img.depth[i]) && img.depth[i] > 0.0) ? 1 : 0;
    }
    return img;
  }

  std::size_t idx(int v, int u) const {
    return static_cast<std::size_t>(v) * width + u;
  }
  double at(int v, int u) const { return depth[idx(v, u)]; }
  bool is_valid(int v, int u) const { return valid[idx(v, u)] != 0; }
  void set(int v, int u, double d) {
    depth[idx(v, u)] = d;
    valid[idx(v, u)] = (std::isfinite(d) && d > 0.0) ? 1 : 0;
  }
};

inline constexpr int kBevClassCount = 20;

// Per-pixel class scores in [0, 1], channel-minor layout.
struct SegScores {
  int height = 0;
  int width = 0;
  int channels = kBevClassCount;
  std::vector<double> scores;

  SegScores() = default;
  SegScores(int h, int w, int c)
      : height(h), width(w), channels(c),
        scores(static_cast<std::size_t>(h) * w * c, 0.0) {}

  std::size_t idx(int v, int u, int c) const {
    return (static_cast<std::size_t>(v) * width + u) * channels + c;
  }
  double at(int v, int u, int c) const { return scores[idx(v, u, c)]; }
  double& at(int v, int u, int c) { return scores[idx(v, u, c)]; }

  // Highest-scoring class at a pixel; ties resolve to the lower class id.
  int argmax_class(int v, int u) const {
    int best = 0;
    double best_score = at(v, u, 0);
    for (int c = 1; c < channels; ++c) {
      const double s = at(v, u, c);
      if (s > best_score) {
        best_score = s;
        best = c;
      }
    }
    return best;
  }
};

// Grid geometry: x forward in (0, rows*cell], y lateral in
// [-y_half_extent, y_half_extent), robot at bottom-center.
struct BevGridSpec {
  int rows = 128;
  int cols = 256;
  int channels = kBevClassCount;
  double cell_m = 0.125;
  double y_half_extent_m = 16.0;

  bool operator==(const BevGridSpec&) const = default;
};

struct BevGrid {
  BevGridSpec spec;
  std::vector<double> data;

  BevGrid() : BevGrid(BevGridSpec{}) {}
  explicit BevGrid(const BevGridSpec& s)
      : spec(s), data(static_cast<std::size_t>(s.rows) * s.cols * s.channels,
                      0.0) {}

  std::size_t idx(int i, int j, int c) const {
    return (static_cast<std::size_t>(i) * spec.cols + j) * spec.channels + c;
  }
  double at(int i, int j, int c) const { return data[idx(i, j, c)]; }
  double& at(int i, int j, int c) { return data[idx(i, j, c)]; }
};

struct BackProjectedPoint {
  double x, y, z;  // robot frame, meters
  int u, v;        // source pixel
};

// Back-project every valid depth pixel through the pinhole model and into
// the robot frame. Output preserves row-major pixel order.
inline std::vector<BackProjectedPoint> back_project(
    const DepthImage& depth, const CameraIntrinsics& intr,
    const CameraToRobot& ext) {
  if (depth.width != intr.width || depth.height != intr.height) {
    throw DimensionMismatch("back_project: depth dims do not match intrinsics");
  }
  std::vector<BackProjectedPoint> points;
  points.reserve(depth.depth.size());
  for (int v = 0; v < depth.height; ++v) {
    for (int u = 0; u < depth.width; ++u) {
      if (!depth.is_valid(v, u)) continue;
      const double d = depth.at(v, u);
      const double cx = (u - intr.cx) * d / intr.fx;
      const double cy = (v - intr.cy) * d / intr.fy;
      BackProjectedPoint p;
      p.u = u;
      p.v = v;
      ext.apply(cx, cy, d, p.x, p.y, p.z);
      points.push_back(p);
    }
  }
  return points;
}

// Project a robot-frame point back to pixel coordinates (the inverse of
// back_project for points in front of the camera).
inline std::optional<std::pair<double, double>> reproject(
    double x, double y, double z, const CameraIntrinsics& intr,
    const CameraToRobot& ext) {
  double cx_, cy_, cz_;
  ext.apply_inverse(x, y, z, cx_, cy_, cz_);
  if (!(cz_ > 0.0)) return std::nullopt;
  return std::make_pair(intr.fx * cx_ / cz_ + intr.cx,
                        intr.fy * cy_ / cz_ + intr.cy);
}

// Cell index for a robot-frame point; empty when the point lies outside the
// covered area (including anything at or behind the robot, x <= 0).
inline std::optional<std::pair<int, int>> grid_index(double x, double y,
                                                     const BevGridSpec& spec) {
  if (!(x > 0.0)) return std::nullopt;
  const int i = static_cast<int>(std::floor(x / spec.cell_m));
  const int j =
      static_cast<int>(std::floor((y + spec.y_half_extent_m) / spec.cell_m));
  if (i < 0 || i >= spec.rows || j < 0 || j >= spec.cols) return std::nullopt;
  return std::make_pair(i, j);
}

struct ClassifiedPoint {
  double x, y, z;
  int class_id;
};

enum class SplatReducer : std::uint8_t {
  Majority,    // one-hot of the most frequent class, ties to the lower id
  ChannelMax,  // per-channel max of the one-hot votes (multi-hot cells)
};

inline constexpr double kDefaultHeightCeilingM = 2.5;

// Rasterize classified points into a one-hot (or multi-hot) grid. Points
// above the height ceiling are discarded so overhanging structure stays out
// of the ground-plane map.
inline BevGrid splat(const std::vector<ClassifiedPoint>& points,
                     const BevGridSpec& spec,
                     SplatReducer reducer = SplatReducer::Majority,
                     double height_ceiling_m = kDefaultHeightCeilingM) {
  BevGrid grid(spec);
  std::vector<std::uint32_t> counts(grid.data.size(), 0);
  std::vector<std::size_t> touched;
  for (const auto& p : points) {
    if (p.class_id < 0 || p.class_id >= spec.channels) {
      throw ClassOutOfRange("splat: class id outside grid channels");
    }
    if (p.z > height_ceiling_m) continue;
    const auto ij = grid_index(p.x, p.y, spec);
    if (!ij) continue;
    const std::size_t cell =
        (static_cast<std::size_t>(ij->first) * spec.cols + ij->second) *
        spec.channels;
    if (reducer == SplatReducer::ChannelMax) {
      grid.data[cell + p.class_id] = 1.0;
      continue;
    }
    bool first_touch = true;
    for (int c = 0; c < spec.channels; ++c) {
      if (counts[cell + c] != 0) {
        first_touch = false;
        break;
      }
    }
    if (first_touch) touched.push_back(cell);
    ++counts[cell + p.class_id];
  }
  if (reducer == SplatReducer::Majority) {
    for (const std::size_t cell : touched) {
      int best = 0;
      std::uint32_t best_count = counts[cell];
      for (int c = 1; c < spec.channels; ++c) {
        if (counts[cell + c] > best_count) {
          best_count = counts[cell + c];
          best = c;
        }
      }
      grid.data[cell + best] = 1.0;
    }
  }
  return grid;
}

// Exponential-moving-average fusion of the current grid into the running
// fused grid; alpha = 1 reproduces the current grid exactly.
inline BevGrid ema_fuse(const BevGrid& current, const BevGrid& previous_fused,
                        double alpha) {
  if (!(alpha > 0.0) || alpha > 1.0) {
    throw AlphaOutOfRange("ema_fuse: alpha must be in (0, 1]");
  }
  if (!(current.spec == previous_fused.spec)) {
    throw DimensionMismatch("ema_fuse: grid specs differ");
  }
  BevGrid out(current.spec);
  if (alpha == 1.0) {
    out.data = current.data;
    return out;
  }
  for (std::size_t i = 0; i < out.data.size(); ++i) {
    out.data[i] = alpha * current.data[i] + (1.0 - alpha) * previous_fused.data[i];
  }
  return out;
}

inline constexpr double kDefaultEmaAlpha = 0.5;

// Full single-frame pipeline: back-project, classify by per-pixel argmax,
// splat, then EMA-fuse into the previous grid when one is provided.
inline BevGrid build_bev(const SegScores& seg, const DepthImage& depth,
                         const CameraIntrinsics& intr, const CameraToRobot& ext,
                         const BevGrid* prev_fused = nullptr,
                         double alpha = kDefaultEmaAlpha,
                         const BevGridSpec& spec = BevGridSpec{},
                         SplatReducer reducer = SplatReducer::Majority,
                         double height_ceiling_m = kDefaultHeightCeilingM) {
  if (seg.width != depth.width || seg.height != depth.height) {
    throw DimensionMismatch("build_bev: seg dims do not match depth");
  }
  const auto points = back_project(depth, intr, ext);
  std::vector<ClassifiedPoint> classified;
  classified.reserve(points.size());
  for (const auto& p : points) {
    classified.push_back({p.x, p.y, p.z, seg.argmax_class(p.v, p.u)});
  }
  BevGrid grid = splat(classified, spec, reducer, height_ceiling_m);
  if (prev_fused != nullptr) return ema_fuse(grid, *prev_fused, alpha);
  return grid;
}

}  // namespace seqnav
