#include "hinge_rl/doorsim.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>
#include <stdexcept>

namespace hinge_rl {

namespace {

Eigen::Matrix3d skew(const Eigen::Vector3d& v) {
  Eigen::Matrix3d m;
  m << 0.0, -v.z(), v.y(),
       v.z(), 0.0, -v.x(),
      -v.y(), v.x(), 0.0;
  return m;
}

/// Axis-angle vector of a rotation, radians.
Eigen::Vector3d rotation_vector(const Eigen::Quaterniond& q) {
  Eigen::AngleAxisd aa(q.normalized());
  double angle = aa.angle();
  Eigen::Vector3d axis = aa.axis();
  if (angle > M_PI) {  // keep the short way around
    angle = 2.0 * M_PI - angle;
    axis = -axis;
  }
  return angle * axis;
}

/// Body-frame displacement of a constant twist over dt (SE(3) exponential),
/// so a constant commanded twist traces an exact screw path.
void twist_displacement(const Eigen::Vector3d& v, const Eigen::Vector3d& w, double dt,
                        Eigen::Vector3d* dp, Eigen::Quaterniond* dq) {
  const Eigen::Vector3d phi = w * dt;
  const double a = phi.norm();
  const Eigen::Matrix3d s = skew(phi);
  Eigen::Matrix3d jac;
  if (a < 1e-9) {
    jac = Eigen::Matrix3d::Identity() + 0.5 * s + (1.0 / 6.0) * s * s;
  } else {
    jac = Eigen::Matrix3d::Identity() + ((1.0 - std::cos(a)) / (a * a)) * s +
          ((a - std::sin(a)) / (a * a * a)) * s * s;
  }
  *dp = jac * (v * dt);
  if (a < 1e-12) {
    *dq = Eigen::Quaterniond::Identity();
  } else {
    *dq = Eigen::Quaterniond(Eigen::AngleAxisd(a, phi / a));
  }
}

}  // namespace

Pose rigid_grasp_pose(const Pose& hinge, double r, double theta, double z_dg,
                      double door_angle) {
  GraspGeometry g;
  g.r = r;
  g.theta = theta;
  g.z_dg = z_dg;
  return gripper_pose_from_door(hinge, g, door_angle);
}

DoorSim::DoorSim(SimConfig config) : config_(config) {}

Observation DoorSim::reset(const EnvParams& e) {
  env_ = e;
  door_ = DoorState{};
  step_index_ = 0;
  done_ = false;
  active_ = true;

  hinge_pose_.position = e.position();
  hinge_pose_.orientation = e.orientation();
  hinge_axis_ = hinge_pose_.orientation * Eigen::Vector3d::UnitZ();

  grasp_radius_ = e.width;
  grasp_theta_ = e.theta_init;
  grasp_height_ = 0.0;

  // Uniform panel hinged on one vertical edge.
  const double mass = e.density * e.length * e.width * e.thickness;
  inertia_ = mass * (e.width * e.width / 3.0 + e.thickness * e.thickness / 12.0);
  joint_damping_ = e.damping;
  friction_torque_ = e.friction * config_.friction_torque_scale;

  // Critically damped coupling against the door's effective inertia.
  const double m_eff = inertia_ / (grasp_radius_ * grasp_radius_);
  coupling_damping_linear_ = 2.0 * config_.coupling_damping_ratio *
                             std::sqrt(config_.coupling_stiffness_linear * m_eff);
  coupling_damping_angular_ = 2.0 * config_.coupling_damping_ratio *
                              std::sqrt(config_.coupling_stiffness_angular * inertia_);

  gripper_.pose = rigid_grasp_pose(hinge_pose_, grasp_radius_, grasp_theta_,
                                   grasp_height_, door_.angle);
  gripper_.twist = Twist{};
  gripper_.twist.frame = Frame::World;
  cmd_linear_body_.setZero();
  cmd_angular_body_.setZero();

  return make_observation();
}

Pose DoorSim::grasp_anchor_pose() const {
  return rigid_grasp_pose(hinge_pose_, grasp_radius_, grasp_theta_, grasp_height_,
                          door_.angle);
}

void DoorSim::compute_coupling(Eigen::Vector3d* force_world,
                               Eigen::Vector3d* torque_world) const {
  const Pose anchor = grasp_anchor_pose();

  const Eigen::Vector3d w_door = door_.angular_velocity * hinge_axis_;
  const Eigen::Vector3d v_anchor = w_door.cross(anchor.position - hinge_pose_.position);

  const Eigen::Vector3d v_cmd = gripper_.pose.orientation * cmd_linear_body_;
  const Eigen::Vector3d w_cmd = gripper_.pose.orientation * cmd_angular_body_;

  const Eigen::Vector3d dp = anchor.position - gripper_.pose.position;
  const Eigen::Vector3d rot_err =
      rotation_vector(anchor.orientation * gripper_.pose.orientation.conjugate());

  // The coupling damping acts on the actual gripper velocity, which itself
  // contains the admittance yield F/c; solving that algebraic loop exactly
  // keeps heavy-door damping (d > c) stable:
  //   F (1 + d/c) = k dp + d (v_anchor - v_cmd)
  const double kl = config_.coupling_stiffness_linear;
  const double dl = coupling_damping_linear_;
  const double cl = config_.gripper_admittance_linear;
  *force_world = (kl * dp + dl * (v_anchor - v_cmd)) / (1.0 + dl / cl);

  const double ka = config_.coupling_stiffness_angular;
  const double da = coupling_damping_angular_;
  const double ca = config_.gripper_admittance_angular;
  *torque_world = (ka * rot_err + da * (w_door - w_cmd)) / (1.0 + da / ca);
}

void DoorSim::integrate_substep(const Eigen::Vector3d& v_body,
                                const Eigen::Vector3d& w_body) {
  const double dt = config_.control_dt / config_.physics_substeps;

  Eigen::Vector3d force, torque;
  compute_coupling(&force, &torque);

  // Reaction on the door, taken about the gripper center so the pair with
  // the sensor wrench sums to zero exactly.
  const Eigen::Vector3d arm = gripper_.pose.position - hinge_pose_.position;
  const double hinge_torque = (arm.cross(-force) - torque).dot(hinge_axis_);

  const double friction = friction_torque_ *
                          std::tanh(door_.angular_velocity / config_.friction_smoothing);
  const double accel =
      (hinge_torque - joint_damping_ * door_.angular_velocity - friction) / inertia_;

  // Semi-implicit Euler on the hinge DOF.
  door_.angular_velocity += accel * dt;
  door_.angle += door_.angular_velocity * dt;

  // Gripper: exact screw displacement of the commanded body twist, plus the
  // admittance yield under the coupling wrench.
  Eigen::Vector3d dp;
  Eigen::Quaterniond dq;
  twist_displacement(v_body, w_body, dt, &dp, &dq);
  const Eigen::Vector3d v_yield = force / config_.gripper_admittance_linear;
  const Eigen::Vector3d w_yield = torque / config_.gripper_admittance_angular;
  gripper_.pose.position += gripper_.pose.orientation * dp + v_yield * dt;

  // Zero-rotation substeps leave the quaternion bit-untouched; composing
  // with identity and renormalizing would creep it by ulps and load the
  // angular spring at rest.
  const double yield_angle = w_yield.norm() * dt;
  const bool cmd_rotates = w_body.norm() * dt > 1e-15;
  const bool yield_rotates = yield_angle > 1e-15;
  if (cmd_rotates || yield_rotates) {
    Eigen::Quaterniond q_new = gripper_.pose.orientation;
    if (cmd_rotates) q_new = q_new * dq;
    if (yield_rotates) {
      q_new = Eigen::Quaterniond(Eigen::AngleAxisd(yield_angle, w_yield.normalized())) *
              q_new;
    }
    gripper_.pose.orientation = q_new.normalized();
  }

  // Actual world twist, consumed by the next substep's damping term and by
  // the observation.
  gripper_.twist.linear = gripper_.pose.orientation * v_body + v_yield;
  gripper_.twist.angular = gripper_.pose.orientation * w_body + w_yield;
}

StepResult DoorSim::step(const Twist& commanded_gripper_twist) {
  if (!active_) throw std::logic_error("step() before reset()");
  if (done_) throw std::logic_error("step() called on a finished episode");
  if (!commanded_gripper_twist.all_finite()) {
    throw std::invalid_argument("commanded twist must be finite");
  }

  cmd_linear_body_ = commanded_gripper_twist.linear;
  cmd_angular_body_ = commanded_gripper_twist.angular;

  for (int i = 0; i < config_.physics_substeps; ++i) {
    integrate_substep(cmd_linear_body_, cmd_angular_body_);
  }

  ++step_index_;
  done_ = step_index_ >= config_.max_steps || std::abs(door_.angle) >= config_.done_angle;

  StepResult result;
  result.obs = make_observation();
  result.done = done_;
  result.door_angle = door_.angle;
  result.r_true = ground_truth_r();
  result.theta_true = ground_truth_theta();
  result.wrench = sensor_wrench();
  return result;
}

Wrench DoorSim::sensor_wrench_world() const {
  Eigen::Vector3d force, torque;
  compute_coupling(&force, &torque);
  Wrench w;
  w.frame = Frame::World;
  w.force = force;
  w.torque = torque;
  return w;
}

Wrench DoorSim::sensor_wrench() const {
  const Wrench world = sensor_wrench_world();
  const Eigen::Quaterniond q = gripper_.pose.orientation;
  Wrench w;
  w.frame = Frame::Gripper;
  w.force = q.conjugate() * world.force;
  w.torque = q.conjugate() * world.torque;
  return w;
}

Wrench DoorSim::door_reaction_world() const {
  const Wrench world = sensor_wrench_world();
  Wrench w;
  w.frame = Frame::World;
  w.force = -world.force;
  w.torque = -world.torque;
  return w;
}

bool DoorSim::success() const {
  return std::abs(door_.angle) > config_.success_angle;
}

double DoorSim::ground_truth_r() const {
  const Eigen::Vector3d rel = gripper_.pose.position - hinge_pose_.position;
  const Eigen::Vector3d radial = rel - rel.dot(hinge_axis_) * hinge_axis_;
  return radial.norm();
}

double DoorSim::ground_truth_theta() const {
  const Eigen::Quaterniond door_rot =
      hinge_pose_.orientation *
      Eigen::Quaterniond(Eigen::AngleAxisd(door_.angle, Eigen::Vector3d::UnitZ()));
  const Eigen::Matrix3d rel =
      (door_rot.conjugate() * gripper_.pose.orientation).toRotationMatrix();
  // rel(1,1) = -sin(theta), rel(1,2) = -cos(theta)
  return std::atan2(-rel(1, 1), -rel(1, 2));
}

double DoorSim::kinetic_energy() const {
  return 0.5 * inertia_ * door_.angular_velocity * door_.angular_velocity;
}

double DoorSim::mechanical_energy() const {
  const Pose anchor = grasp_anchor_pose();
  const Eigen::Vector3d dp = anchor.position - gripper_.pose.position;
  const Eigen::Vector3d rot_err =
      rotation_vector(anchor.orientation * gripper_.pose.orientation.conjugate());
  const double spring = 0.5 * config_.coupling_stiffness_linear * dp.squaredNorm() +
                        0.5 * config_.coupling_stiffness_angular * rot_err.squaredNorm();
  return kinetic_energy() + spring;
}

Observation DoorSim::make_observation() const {
  Observation obs;
  const Wrench w = sensor_wrench();
  obs.s.segment<3>(0) = w.force;
  obs.s.segment<3>(3) = w.torque;
  obs.s.segment<3>(6) = gripper_.twist.linear;
  obs.s.segment<3>(9) = gripper_.twist.angular;
  obs.step_index = step_index_;
  obs.door_angle = door_.angle;
  return obs;
}

void write_trajectory_csv(std::ostream& out, const std::vector<TrajectoryRow>& rows) {
  out << "step,door_angle";
  for (int i = 0; i < kStateDim; ++i) out << ",s" << i;
  out << ",a0,a1,reward\n";
  char buf[64];
  for (const auto& row : rows) {
    out << row.step;
    auto put = [&](double v) {
      std::snprintf(buf, sizeof(buf), ",%.12g", v);
      out << buf;
    };
    put(row.door_angle);
    for (int i = 0; i < kStateDim; ++i) put(row.s[i]);
    put(row.a0);
    put(row.a1);
    put(row.reward);
    out << "\n";
  }
}

}  // namespace hinge_rl
