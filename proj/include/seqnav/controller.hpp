#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <optional>

#include "seqnav/errors.hpp"
#include "seqnav/geodesy.hpp"
#include "seqnav/planner.hpp"

namespace seqnav {

// Normalized position-orientation command for the holonomic base.
// Components are clamped to [-1, 1] on construction.
struct ControlAction {
  double x = 0.0;      // lateral step
  double y = 0.0;      // forward step
  double theta = 0.0;  // yaw rate

  ControlAction() = default;
  ControlAction(double x_, double y_, double theta_)
      : x(std::clamp(x_, -1.0, 1.0)),
        y(std::clamp(y_, -1.0, 1.0)),
        theta(std::clamp(theta_, -1.0, 1.0)) {}

  double norm_l2() const { return std::sqrt(x * x + y * y + theta * theta); }
  double norm_linf() const {
    return std::max({std::abs(x), std::abs(y), std::abs(theta)});
  }
};

struct PidState {
  double kp = 0.0;
  double ki = 0.0;
  double kd = 0.0;
  double integral = 0.0;
  double prev_error = 0.0;
  double integral_clamp = 1.0;

  static PidState with_gains(double kp_, double ki_, double kd_,
                             double clamp_ = 1.0) {
    PidState s;
    s.kp = kp_;
    s.ki = ki_;
    s.kd = kd_;
    s.integral_clamp = clamp_;
    return s;
  }
};

// Default gains, tuned in the closed-loop simulator.
inline PidState default_lateral_pid() { return PidState::with_gains(1.0, 0.05, 0.1); }
inline PidState default_longitudinal_pid() { return PidState::with_gains(0.8, 0.05, 0.0); }

struct PidOutput {
  double output;
  PidState state;
};

// One discrete PID tick with anti-windup on the integral accumulator.
inline PidOutput pid_step(const PidState& state, double error, double dt_s) {
  if (!(dt_s > 0.0)) throw NonPositiveInterval("pid_step: dt must be > 0");
  PidState next = state;
  next.integral = std::clamp(state.integral + error * dt_s,
                             -state.integral_clamp, state.integral_clamp);
  const double derivative = (error - state.prev_error) / dt_s;
  next.prev_error = error;
  const double out =
      state.kp * error + state.ki * next.integral + state.kd * derivative;
  return {out, next};
}

struct PidControlResult {
  ControlAction action;
  PidState lateral;
  PidState longitudinal;
};

// Lateral PID on the wrapped heading error, longitudinal PID on the speed
// error, mapped to (x, y, theta): the lateral output drives both the lateral
// step and the yaw rate, the longitudinal output drives the forward step.
inline PidControlResult pid_control(const MotionReference& ref,
                                    double theta_meas_rad, double v_meas_mps,
                                    const PidState& lateral,
                                    const PidState& longitudinal, double dt_s) {
  const double heading_error = wrap_angle(ref.theta_ref_rad - theta_meas_rad);
  const PidOutput lat = pid_step(lateral, heading_error, dt_s);
  const PidOutput lon = pid_step(longitudinal, ref.v_ref_mps - v_meas_mps, dt_s);
  return {ControlAction(lat.output, lon.output, lat.output), lat.state,
          lon.state};
}

// Two-layer tanh MLP mapping the GRU state to a raw 3-vector.
struct MlpHead {
  Eigen::MatrixXd w1;  // hidden2 x hidden
  Eigen::VectorXd b1;
  Eigen::MatrixXd w2;  // 3 x hidden2
  Eigen::VectorXd b2;

  static MlpHead zeros(int hidden, int hidden2) {
    MlpHead h;
    h.w1 = Eigen::MatrixXd::Zero(hidden2, hidden);
    h.b1 = Eigen::VectorXd::Zero(hidden2);
    h.w2 = Eigen::MatrixXd::Zero(3, hidden2);
    h.b2 = Eigen::VectorXd::Zero(3);
    return h;
  }

  Eigen::Vector3d forward(const Eigen::VectorXd& h) const {
    if (w1.cols() != h.size()) {
      throw DimensionMismatch("MlpHead: hidden size mismatch");
    }
    const Eigen::VectorXd a =
        (w1 * h + b1).unaryExpr([](double x) { return std::tanh(x); });
    return w2 * a + b2;
  }
};

// One head per discrete command.
struct MlpHeads {
  MlpHead left, straight, right;

  const MlpHead& for_command(Command c) const {
    switch (c) {
      case Command::Left: return left;
      case Command::Straight: return straight;
      case Command::Right: return right;
    }
    throw Error("MlpHeads: unknown command");
  }
  MlpHead& for_command(Command c) {
    return const_cast<MlpHead&>(
        static_cast<const MlpHeads*>(this)->for_command(c));
  }

  static MlpHeads zeros(int hidden, int hidden2) {
    return MlpHeads{MlpHead::zeros(hidden, hidden2),
                    MlpHead::zeros(hidden, hidden2),
                    MlpHead::zeros(hidden, hidden2)};
  }
};

inline ControlAction mlp_control(const PlannerState& state, Command cmd,
                                 const MlpHeads& heads) {
  const Eigen::Vector3d raw = heads.for_command(cmd).forward(state.h);
  return ControlAction(raw[0], raw[1], raw[2]);
}

// Blend weights beta[row][col]: row 0 weights the MLP action, row 1 the PID
// action; column 0 applies to the translational components, column 1 to the
// rotational component.
struct BlendWeights {
  double beta[2][2];

  BlendWeights(double mlp_xy, double pid_xy, double mlp_theta, double pid_theta)
      : beta{{mlp_xy, mlp_theta}, {pid_xy, pid_theta}} {
    for (auto& row : beta) {
      for (double v : row) {
        if (!(v >= 0.0) || v > 1.0) {
          throw InvalidSpec("BlendWeights: entries must be in [0, 1]");
        }
      }
    }
  }

  // Deterministic half/half blend for tests and PID-forcing configurations.
  static BlendWeights fixed_half() { return BlendWeights(0.5, 0.5, 0.5, 0.5); }
};

enum class BlendBranch : std::uint8_t { Both, MlpOnly, PidOnly, Neither };

inline const char* to_string(BlendBranch b) {
  switch (b) {
    case BlendBranch::Both: return "both";
    case BlendBranch::MlpOnly: return "mlp";
    case BlendBranch::PidOnly: return "pid";
    case BlendBranch::Neither: return "none";
  }
  return "?";
}

enum class GateNorm : std::uint8_t { L2, Linf };

inline constexpr double kDefaultGateEpsilon = 0.05;

struct BlendResult {
  ControlAction action;
  BlendBranch branch;
};

// Confidence-gated blending of the two controller outputs. Single-controller
// branches pass the corresponding action through bit-exactly.
inline BlendResult blend(const ControlAction& u_mlp, const ControlAction& u_pid,
                         const BlendWeights& weights,
                         double epsilon = kDefaultGateEpsilon,
                         GateNorm norm = GateNorm::L2) {
  if (!(epsilon > 0.0)) throw InvalidSpec("blend: epsilon must be > 0");
  const double n_mlp =
      (norm == GateNorm::L2) ? u_mlp.norm_l2() : u_mlp.norm_linf();
  const double n_pid =
      (norm == GateNorm::L2) ? u_pid.norm_l2() : u_pid.norm_linf();
  if (n_mlp >= epsilon && n_pid >= epsilon) {
    const auto& b = weights.beta;
    return {ControlAction(b[0][0] * u_mlp.x + b[1][0] * u_pid.x,
                          b[0][0] * u_mlp.y + b[1][0] * u_pid.y,
                          b[0][1] * u_mlp.theta + b[1][1] * u_pid.theta),
            BlendBranch::Both};
  }
  if (n_mlp >= epsilon) return {u_mlp, BlendBranch::MlpOnly};
  if (n_pid >= epsilon) return {u_pid, BlendBranch::PidOnly};
  return {ControlAction(), BlendBranch::Neither};
}

// Everything the policy computed on one tick, for logging and tests.
struct ControlDiagnostics {
  PlannerState h;
  WaypointPlan plan;
  std::optional<MotionReference> reference;
  Command command = Command::Straight;
  ControlAction u_mlp;
  ControlAction u_pid;
  ControlAction u_final;
  BlendBranch branch = BlendBranch::Neither;
};

struct PolicyParams {
  GruParams gru;
  WaypointHeads waypoint_heads;
  MlpHeads mlp_heads;
  BlendWeights blend_weights = BlendWeights::fixed_half();
  double epsilon = kDefaultGateEpsilon;
  double gamma = 1.0;
  double tau1_m = kDefaultTau1M;
  double tau2_m = kDefaultTau2M;
  GateNorm gate_norm = GateNorm::L2;
};

// Mutable per-control-loop state: the PID accumulators and the last valid
// motion reference (held across degenerate-aim ticks).
struct ControllerState {
  PidState lateral = default_lateral_pid();
  PidState longitudinal = default_longitudinal_pid();
  std::optional<MotionReference> last_reference;
  CommandDiagnostics command_diag;
};

struct PolicyResult {
  ControlAction action;
  PlannerState h;
  ControlDiagnostics diagnostics;
};

// The control policy: GRU step, waypoint rollout, PID pathway, command
// inference, command-specific MLP, confidence-gated blend.
inline PolicyResult control_policy(const FeatureVector& z,
                                   const PlannerState& h_prev,
                                   const LocalPoint& route_p1,
                                   const LocalPoint& route_p2,
                                   double theta_meas_rad, double v_meas_mps,
                                   double dt_s, const PolicyParams& params,
                                   ControllerState& state) {
  ControlDiagnostics diag;
  diag.h = gru_step(z, h_prev, params.gru);
  diag.plan = rollout_waypoints(diag.h, params.waypoint_heads);

  std::optional<MotionReference> ref;
  try {
    ref = motion_reference(diag.plan, params.gamma);
    state.last_reference = ref;
  } catch (const DegenerateAim&) {
    ref = state.last_reference;  // hold; stays empty at episode start
  }
  diag.reference = ref;
  if (ref.has_value()) {
    const PidControlResult pid = pid_control(
        *ref, theta_meas_rad, v_meas_mps, state.lateral, state.longitudinal,
        dt_s);
    diag.u_pid = pid.action;
    state.lateral = pid.lateral;
    state.longitudinal = pid.longitudinal;
  } else {
    diag.u_pid = ControlAction();
  }

  diag.command = infer_command(route_p1, route_p2, params.tau1_m, params.tau2_m,
                               &state.command_diag);
  diag.u_mlp = mlp_control(diag.h, diag.command, params.mlp_heads);

  const BlendResult blended = blend(diag.u_mlp, diag.u_pid,
                                    params.blend_weights, params.epsilon,
                                    params.gate_norm);
  diag.u_final = blended.action;
  diag.branch = blended.branch;
  return {blended.action, diag.h, diag};
}

}  // namespace seqnav
