#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Geometry>

#include "hinge_rl/envdomain.hpp"
#include "hinge_rl/kinematics.hpp"
#include "hinge_rl/rng.hpp"

namespace hinge_rl {

inline constexpr int kStateDim = 12;  // [wrench(6), gripper world twist(6)]

struct DoorState {
  double angle = 0.0;             // rad, signed about the hinge axis
  double angular_velocity = 0.0;  // rad/s
};

struct GripperState {
  Pose pose;          // world frame
  Twist twist;        // world frame
};

/// Per-step sensor view handed to policies. door_angle is a ground-truth
/// channel for rewards and metrics, not part of s.
struct Observation {
  Eigen::Matrix<double, kStateDim, 1> s = Eigen::Matrix<double, kStateDim, 1>::Zero();
  int step_index = 0;
  double door_angle = 0.0;
};

struct SimConfig {
  double control_dt = 0.01;        // s, 100 Hz control
  int physics_substeps = 10;       // 1 ms physics step
  int max_steps = 500;
  double coupling_stiffness_linear = 5000.0;  // N/m
  double coupling_stiffness_angular = 50.0;   // N*m/rad
  double coupling_damping_ratio = 1.0;
  /// The gripper executes its commanded twist plus wrench/admittance: a
  /// grasped gripper cannot drift arbitrarily far off the door arc, so the
  /// coupling force is proportional to the current command error instead of
  /// its integral. Very large values approach a pure velocity source.
  double gripper_admittance_linear = 300.0;   // N*s/m
  double gripper_admittance_angular = 10.0;   // N*m*s/rad
  double success_angle = M_PI / 4.0;  // rad, success is strictly greater
  double done_angle = M_PI / 2.0;     // rad, fully open
  double friction_torque_scale = 1.0; // N*m per unit friction coefficient
  double friction_smoothing = 1e-3;   // rad/s, tanh width for Coulomb torque
};

struct StepResult {
  Observation obs;
  bool done = false;
  double door_angle = 0.0;
  double r_true = 0.0;
  double theta_true = 0.0;
  Wrench wrench;  // gripper frame, same values as obs.s.head<6>()
};

/// Deterministic desk-scale door-on-a-hinge simulation. The door is a
/// uniform rectangular panel on a torsionally damped revolute joint; the
/// gripper is a kinematic velocity source tied to the door's grasp point by
/// a 6-D linear spring-damper. The force-torque sensor reads the coupling
/// wrench in the gripper frame.
///
/// One instance owns its state and must not be shared across threads;
/// independent instances may run in parallel.
class DoorSim {
 public:
  explicit DoorSim(SimConfig config = SimConfig{});

  /// Start an episode on door e: door closed and at rest, gripper placed by
  /// the grasp geometry (r = panel width, theta = e.theta_init), coupling
  /// unstretched so the initial wrench is zero.
  Observation reset(const EnvParams& e);

  /// Advance one control step under a constant commanded gripper-frame
  /// twist. Throws std::logic_error if the episode is already finished.
  StepResult step(const Twist& commanded_gripper_twist);

  /// Coupling wrench currently acting on the gripper, gripper frame.
  Wrench sensor_wrench() const;
  /// Reaction wrench on the door, world frame, taken about the gripper
  /// center (the same point as sensor_wrench, so the pair sums to zero).
  Wrench door_reaction_world() const;
  Wrench sensor_wrench_world() const;

  bool success() const;
  bool done() const { return done_; }

  /// Current true hinge radius and grasp angle, measured geometrically from
  /// the gripper pose relative to the door.
  double ground_truth_r() const;
  double ground_truth_theta() const;

  const DoorState& door() const { return door_; }
  const GripperState& gripper() const { return gripper_; }
  const EnvParams& env() const { return env_; }
  const SimConfig& config() const { return config_; }
  int step_index() const { return step_index_; }

  double door_inertia() const { return inertia_; }
  double kinetic_energy() const;
  /// Door kinetic energy plus coupling spring energy; with a stationary
  /// gripper this is the quantity dissipation drives down.
  double mechanical_energy() const;

  Pose grasp_anchor_pose() const;
  Eigen::Vector3d hinge_axis_world() const { return hinge_axis_; }

 private:
  void integrate_substep(const Eigen::Vector3d& v_body, const Eigen::Vector3d& w_body);
  void compute_coupling(Eigen::Vector3d* force_world, Eigen::Vector3d* torque_world) const;
  Observation make_observation() const;

  SimConfig config_;
  EnvParams env_;

  DoorState door_;
  GripperState gripper_;

  Pose hinge_pose_;                 // world pose of the closed-door frame
  Eigen::Vector3d hinge_axis_ = Eigen::Vector3d::UnitZ();
  double grasp_radius_ = 0.0;       // r at grasp time
  double grasp_theta_ = 0.0;        // theta at grasp time
  double grasp_height_ = 0.0;       // z_dg

  double inertia_ = 0.0;            // kg*m^2 about the hinge
  double joint_damping_ = 0.0;      // N*m*s/rad
  double friction_torque_ = 0.0;    // N*m
  double coupling_damping_linear_ = 0.0;
  double coupling_damping_angular_ = 0.0;

  Eigen::Vector3d cmd_linear_body_ = Eigen::Vector3d::Zero();
  Eigen::Vector3d cmd_angular_body_ = Eigen::Vector3d::Zero();

  int step_index_ = 0;
  bool done_ = false;
  bool active_ = false;
};

/// Rigid-attachment grasp pose for the door at its current angle; reset()
/// places the gripper here and ideal tracking keeps it here.
Pose rigid_grasp_pose(const Pose& hinge, double r, double theta, double z_dg,
                      double door_angle);

/// Trajectory log row: step, door_angle, s[0..11], a[0..1], reward.
struct TrajectoryRow {
  int step = 0;
  double door_angle = 0.0;
  Eigen::Matrix<double, kStateDim, 1> s = Eigen::Matrix<double, kStateDim, 1>::Zero();
  double a0 = 0.0;
  double a1 = 0.0;
  double reward = 0.0;
};

void write_trajectory_csv(std::ostream& out, const std::vector<TrajectoryRow>& rows);

}  // namespace hinge_rl
