#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "seqnav/bev.hpp"
#include "seqnav/controller.hpp"
#include "seqnav/errors.hpp"
#include "seqnav/planner.hpp"

namespace seqnav {

// Binary segmentation masks, channel-minor like SegScores.
struct BinaryMasks {
  int height = 0;
  int width = 0;
  int channels = 0;
  std::vector<std::uint8_t> mask;

  BinaryMasks() = default;
  BinaryMasks(int h, int w, int c)
      : height(h), width(w), channels(c),
        mask(static_cast<std::size_t>(h) * w * c, 0) {}

  std::size_t idx(int v, int u, int c) const {
    return (static_cast<std::size_t>(v) * width + u) * channels + c;
  }
  std::uint8_t at(int v, int u, int c) const { return mask[idx(v, u, c)]; }
  std::uint8_t& at(int v, int u, int c) { return mask[idx(v, u, c)]; }

  static BinaryMasks threshold(const SegScores& scores, double thr = 0.5) {
    BinaryMasks m(scores.height, scores.width, scores.channels);
    for (std::size_t i = 0; i < scores.scores.size(); ++i) {
      m.mask[i] = scores.scores[i] >= thr ? 1 : 0;
    }
    return m;
  }
};

// Mean per-class intersection-over-union. Classes whose union is empty in
// both masks are skipped from the mean unless `count_empty_as_one` is set.
inline double iou(const BinaryMasks& pred, const BinaryMasks& truth,
                  bool count_empty_as_one = false) {
  if (pred.height != truth.height || pred.width != truth.width ||
      pred.channels != truth.channels) {
    throw ShapeMismatch("iou: mask shapes differ");
  }
  double sum = 0.0;
  int counted = 0;
  const std::size_t pixels =
      static_cast<std::size_t>(pred.height) * pred.width;
  for (int c = 0; c < pred.channels; ++c) {
    std::size_t inter = 0, uni = 0;
    for (std::size_t p = 0; p < pixels; ++p) {
      const std::size_t i = p * pred.channels + c;
      const bool a = pred.mask[i] != 0;
      const bool b = truth.mask[i] != 0;
      inter += (a && b) ? 1 : 0;
      uni += (a || b) ? 1 : 0;
    }
    if (uni == 0) {
      if (count_empty_as_one) {
        sum += 1.0;
        ++counted;
      }
      continue;
    }
    sum += static_cast<double>(inter) / static_cast<double>(uni);
    ++counted;
  }
  return counted == 0 ? 0.0 : sum / counted;
}

// Mean absolute depth error over pixels valid in both images.
inline double depth_mae(const DepthImage& pred, const DepthImage& truth) {
  if (pred.height != truth.height || pred.width != truth.width) {
    throw ShapeMismatch("depth_mae: image shapes differ");
  }
  double sum = 0.0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < truth.depth.size(); ++i) {
    if (truth.valid[i] == 0 || pred.valid[i] == 0) continue;
    sum += std::abs(pred.depth[i] - truth.depth[i]);
    ++n;
  }
  if (n == 0) throw NoValidPixels("depth_mae: no jointly valid pixels");
  return sum / static_cast<double>(n);
}

// Mean per-waypoint L1 distance.
inline double wp_mae(const WaypointPlan& pred, const WaypointPlan& truth) {
  double sum = 0.0;
  for (int i = 0; i < kNumWaypoints; ++i) {
    sum += std::abs(pred.waypoint[i].x - truth.waypoint[i].x) +
           std::abs(pred.waypoint[i].y - truth.waypoint[i].y);
  }
  return sum / kNumWaypoints;
}

inline double ctrl_mae(const ControlAction& pred, const ControlAction& truth) {
  return (std::abs(pred.x - truth.x) + std::abs(pred.y - truth.y) +
          std::abs(pred.theta - truth.theta)) /
         3.0;
}

struct RouteMetrics {
  std::string route_name;
  double iou = 0.0;
  double depth_mae = 0.0;
  double wp_mae = 0.0;
  double ctrl_mae = 0.0;
  std::size_t samples = 0;
};

struct EvalReport {
  double iou = 0.0;
  double depth_mae = 0.0;
  double wp_mae = 0.0;
  double ctrl_mae = 0.0;
  std::vector<RouteMetrics> per_route;

  // Sample-weighted aggregate of per-route metrics.
  static EvalReport aggregate(std::vector<RouteMetrics> routes) {
    EvalReport r;
    r.per_route = std::move(routes);
    std::size_t total = 0;
    for (const auto& m : r.per_route) total += m.samples;
    if (total == 0) return r;
    for (const auto& m : r.per_route) {
      const double w = static_cast<double>(m.samples) / total;
      r.iou += w * m.iou;
      r.depth_mae += w * m.depth_mae;
      r.wp_mae += w * m.wp_mae;
      r.ctrl_mae += w * m.ctrl_mae;
    }
    return r;
  }
};

// Mean and population standard deviation across runs (seeds).
struct MeanStd {
  double mean = 0.0;
  double std = 0.0;
};

inline MeanStd mean_std(const std::vector<double>& values) {
  MeanStd ms;
  if (values.empty()) return ms;
  for (double v : values) ms.mean += v;
  ms.mean /= static_cast<double>(values.size());
  double var = 0.0;
  for (double v : values) var += (v - ms.mean) * (v - ms.mean);
  ms.std = std::sqrt(var / static_cast<double>(values.size()));
  return ms;
}

}  // namespace seqnav
