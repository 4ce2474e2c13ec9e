#include "hinge_rl/kinematics.hpp"

#include <cmath>
#include <stdexcept>

namespace hinge_rl {

namespace {

void require_finite(double v, const char* name) {
  if (!std::isfinite(v)) {
    throw std::invalid_argument(std::string(name) + " must be finite");
  }
}

}  // namespace

double clamp_grasp_angle(double theta) {
  constexpr double kLimit = M_PI / 2.0 - 1e-3;
  if (theta > kLimit) return kLimit;
  if (theta < -kLimit) return -kLimit;
  return theta;
}

Eigen::Matrix3d rotation_door_to_gripper(double theta) {
  require_finite(theta, "theta");
  const double s = std::sin(theta);
  const double c = std::cos(theta);
  Eigen::Matrix3d r;
  r << -1.0, 0.0, 0.0,
        0.0,  -s,  -c,
        0.0,  -c,   s;
  return r;
}

Twist twist_from_action(double r, double theta, double omega) {
  require_finite(r, "r");
  require_finite(theta, "theta");
  require_finite(omega, "omega");
  if (r <= 0.0) {
    throw std::invalid_argument("r must be positive");
  }
  Twist t;
  t.frame = Frame::Gripper;
  t.linear = Eigen::Vector3d(omega * r, 0.0, 0.0);
  t.angular = Eigen::Vector3d(0.0, -omega * std::cos(theta), omega * std::sin(theta));
  return t;
}

Twist door_frame_velocity(double omega, double r) {
  require_finite(r, "r");
  require_finite(omega, "omega");
  if (r <= 0.0) {
    throw std::invalid_argument("r must be positive");
  }
  Twist t;
  t.frame = Frame::Door;
  t.linear = Eigen::Vector3d(-omega * r, 0.0, 0.0);
  t.angular = Eigen::Vector3d(0.0, 0.0, omega);
  return t;
}

Twist transform_chain(double r, double theta, double omega) {
  const Twist door = door_frame_velocity(omega, r);
  const Eigen::Matrix3d r_dg = rotation_door_to_gripper(theta);
  Twist t;
  t.frame = Frame::Gripper;
  t.linear = r_dg.transpose() * door.linear;
  t.angular = r_dg.transpose() * door.angular;
  return t;
}

Wrench ideal_wrench(double theta, double f, double tau) {
  require_finite(theta, "theta");
  require_finite(f, "f");
  require_finite(tau, "tau");
  if (f <= 0.0 || tau <= 0.0) {
    throw std::invalid_argument("f and tau must be positive");
  }
  Wrench w;
  w.frame = Frame::Gripper;
  w.force = Eigen::Vector3d(f, 0.0, 0.0);
  w.torque = Eigen::Vector3d(0.0, -tau * std::cos(theta), tau * std::sin(theta));
  return w;
}

Pose gripper_pose_from_door(const Pose& hinge_world, const GraspGeometry& geometry,
                            double door_angle) {
  if (!(geometry.r > 0.0) || !std::isfinite(geometry.r)) {
    throw std::invalid_argument("grasp radius must be positive");
  }
  require_finite(geometry.theta, "theta");
  require_finite(geometry.z_dg, "z_dg");
  require_finite(door_angle, "door_angle");

  const Eigen::Quaterniond door_rot =
      hinge_world.orientation *
      Eigen::Quaterniond(Eigen::AngleAxisd(door_angle, Eigen::Vector3d::UnitZ()));
  const Eigen::Vector3d grasp_in_door(0.0, geometry.r, geometry.z_dg);

  Pose pose;
  pose.position = hinge_world.position + door_rot * grasp_in_door;
  pose.orientation =
      (door_rot * Eigen::Quaterniond(rotation_door_to_gripper(geometry.theta)))
          .normalized();
  return pose;
}

}  // namespace hinge_rl
