#pragma once

#include <Eigen/Dense>
#include <array>
#include <cmath>

#include "seqnav/errors.hpp"
#include "seqnav/geodesy.hpp"
#include "seqnav/rng.hpp"

namespace seqnav {

using FeatureVector = Eigen::VectorXd;

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

inline Eigen::VectorXd sigmoid(const Eigen::VectorXd& v) {
  return v.unaryExpr([](double x) { return sigmoid(x); });
}

// Gate and candidate parameters of a single GRU cell. Each weight matrix
// multiplies the concatenation [input; hidden].
struct GruParams {
  Eigen::MatrixXd w_reset, w_update, w_cand;
  Eigen::VectorXd b_reset, b_update, b_cand;

  int hidden_size() const { return static_cast<int>(w_reset.rows()); }
  int input_size() const {
    return static_cast<int>(w_reset.cols()) - hidden_size();
  }

  static GruParams zeros(int input, int hidden) {
    GruParams p;
    p.w_reset = Eigen::MatrixXd::Zero(hidden, input + hidden);
    p.w_update = Eigen::MatrixXd::Zero(hidden, input + hidden);
    p.w_cand = Eigen::MatrixXd::Zero(hidden, input + hidden);
    p.b_reset = Eigen::VectorXd::Zero(hidden);
    p.b_update = Eigen::VectorXd::Zero(hidden);
    p.b_cand = Eigen::VectorXd::Zero(hidden);
    return p;
  }

  static GruParams random(int input, int hidden, Rng& rng, double scale) {
    GruParams p = zeros(input, hidden);
    for (auto* m : {&p.w_reset, &p.w_update, &p.w_cand}) {
      for (Eigen::Index i = 0; i < m->size(); ++i) {
        m->data()[i] = rng.uniform(-scale, scale);
      }
    }
    return p;
  }

  void check_shapes() const {
    const auto h = w_reset.rows();
    const auto c = w_reset.cols();
    if (w_update.rows() != h || w_update.cols() != c || w_cand.rows() != h ||
        w_cand.cols() != c || b_reset.size() != h || b_update.size() != h ||
        b_cand.size() != h) {
      throw DimensionMismatch("GruParams: inconsistent shapes");
    }
  }
};

// GRU hidden state.
struct PlannerState {
  Eigen::VectorXd h;

  static PlannerState zero(int hidden) {
    return PlannerState{Eigen::VectorXd::Zero(hidden)};
  }
};

// One GRU step with the gate activations exposed (the learning module
// backpropagates through them).
struct GruStepTrace {
  Eigen::VectorXd reset, update, candidate, h_next;
};

inline GruStepTrace gru_step_traced(const FeatureVector& z,
                                    const PlannerState& h_prev,
                                    const GruParams& params) {
  params.check_shapes();
  const int hidden = params.hidden_size();
  if (h_prev.h.size() != hidden ||
      z.size() + hidden != params.w_reset.cols()) {
    throw DimensionMismatch("gru_step: input/hidden sizes do not match params");
  }
  Eigen::VectorXd zh(z.size() + hidden);
  zh << z, h_prev.h;
  GruStepTrace t;
  t.reset = sigmoid(params.w_reset * zh + params.b_reset);
  t.update = sigmoid(params.w_update * zh + params.b_update);
  Eigen::VectorXd zrh(z.size() + hidden);
  zrh << z, t.reset.cwiseProduct(h_prev.h);
  t.candidate = (params.w_cand * zrh + params.b_cand)
                    .unaryExpr([](double x) { return std::tanh(x); });
  t.h_next = (Eigen::VectorXd::Ones(hidden) - t.update)
                 .cwiseProduct(h_prev.h) +
             t.update.cwiseProduct(t.candidate);
  return t;
}

inline PlannerState gru_step(const FeatureVector& z, const PlannerState& h_prev,
                             const GruParams& params) {
  return PlannerState{gru_step_traced(z, h_prev, params).h_next};
}

// Deterministic concatenation [f_rgb, f_bev, p1.x, p1.y, p2.x, p2.y, speed].
inline FeatureVector fuse_inputs(const FeatureVector& f_rgb,
                                 const FeatureVector& f_bev,
                                 const LocalPoint& p1, const LocalPoint& p2,
                                 double speed_mps) {
  FeatureVector z(f_rgb.size() + f_bev.size() + 5);
  z << f_rgb, f_bev, p1.x, p1.y, p2.x, p2.y, speed_mps;
  return z;
}

inline constexpr int kNumWaypoints = 5;

// Per-step linear heads predicting incremental displacements.
struct WaypointHeads {
  std::array<Eigen::MatrixXd, kNumWaypoints> weight;  // each 2 x hidden
  std::array<Eigen::VectorXd, kNumWaypoints> bias;    // each 2

  static WaypointHeads zeros(int hidden) {
    WaypointHeads h;
    for (int i = 0; i < kNumWaypoints; ++i) {
      h.weight[i] = Eigen::MatrixXd::Zero(2, hidden);
      h.bias[i] = Eigen::VectorXd::Zero(2);
    }
    return h;
  }

  static WaypointHeads random(int hidden, Rng& rng, double scale) {
    WaypointHeads h = zeros(hidden);
    for (int i = 0; i < kNumWaypoints; ++i) {
      for (Eigen::Index k = 0; k < h.weight[i].size(); ++k) {
        h.weight[i].data()[k] = rng.uniform(-scale, scale);
      }
      h.bias[i][0] = rng.uniform(-scale, scale);
      h.bias[i][1] = rng.uniform(-scale, scale);
    }
    return h;
  }
};

// N waypoints in the robot-local frame, with the per-step deltas they were
// accumulated from. waypoint[l] == waypoint[l-1] + delta[l] exactly.
struct WaypointPlan {
  std::array<LocalPoint, kNumWaypoints> waypoint;
  std::array<LocalPoint, kNumWaypoints> delta;

  static WaypointPlan from_deltas(
      const std::array<LocalPoint, kNumWaypoints>& deltas) {
    WaypointPlan plan;
    plan.delta = deltas;
    double x = 0.0, y = 0.0;
    for (int i = 0; i < kNumWaypoints; ++i) {
      x += deltas[i].x;
      y += deltas[i].y;
      plan.waypoint[i] = LocalPoint{x, y};
    }
    return plan;
  }
};

inline WaypointPlan rollout_waypoints(const PlannerState& state,
                                      const WaypointHeads& heads) {
  std::array<LocalPoint, kNumWaypoints> deltas;
  for (int i = 0; i < kNumWaypoints; ++i) {
    if (heads.weight[i].cols() != state.h.size() ||
        heads.weight[i].rows() != 2 || heads.bias[i].size() != 2) {
      throw DimensionMismatch("rollout_waypoints: head shape mismatch");
    }
    const Eigen::Vector2d d = heads.weight[i] * state.h + heads.bias[i];
    deltas[i] = LocalPoint{d[0], d[1]};
  }
  return WaypointPlan::from_deltas(deltas);
}

// Heading/speed references derived from the first two waypoints.
struct MotionReference {
  double theta_ref_rad;
  double v_ref_mps;
  LocalPoint aim;
};

inline constexpr double kDegenerateAimNormM = 1e-9;

inline MotionReference motion_reference(const WaypointPlan& plan,
                                        double gamma = 1.0) {
  const LocalPoint& w1 = plan.waypoint[0];
  const LocalPoint& w2 = plan.waypoint[1];
  const LocalPoint aim{0.5 * (w1.x + w2.x), 0.5 * (w1.y + w2.y)};
  if (std::hypot(aim.x, aim.y) < kDegenerateAimNormM) {
    throw DegenerateAim("motion_reference: aim point at the origin");
  }
  MotionReference ref;
  ref.aim = aim;
  ref.theta_ref_rad = std::atan2(aim.y, aim.x);
  ref.v_ref_mps = gamma * std::hypot(w1.x - w2.x, w1.y - w2.y);
  return ref;
}

}  // namespace seqnav
