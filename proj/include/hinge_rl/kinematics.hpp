#pragma once

#include <Eigen/Dense>
#include <Eigen/Geometry>

namespace hinge_rl {

/// Coordinate frames of the door-opening task. The door frame's z-axis is
/// the hinge axis; the gripper frame is attached to the gripper's end center
/// with its YZ-plane parallel to the door's YZ-plane.
enum class Frame { World, Door, Gripper };

/// Spatial velocity. Layout is fixed as [linear(3), angular(3)] everywhere
/// a 6-vector appears (observations, logs, checkpoint I/O).
struct Twist {
  Eigen::Vector3d linear = Eigen::Vector3d::Zero();   // m/s
  Eigen::Vector3d angular = Eigen::Vector3d::Zero();  // rad/s
  Frame frame = Frame::World;

  Eigen::Matrix<double, 6, 1> vector6() const {
    Eigen::Matrix<double, 6, 1> v;
    v << linear, angular;
    return v;
  }
  bool all_finite() const {
    return linear.allFinite() && angular.allFinite();
  }
};

/// Force-torque pair, same [force(3), torque(3)] layout convention as Twist.
struct Wrench {
  Eigen::Vector3d force = Eigen::Vector3d::Zero();   // N
  Eigen::Vector3d torque = Eigen::Vector3d::Zero();  // N*m
  Frame frame = Frame::World;

  Eigen::Matrix<double, 6, 1> vector6() const {
    Eigen::Matrix<double, 6, 1> v;
    v << force, torque;
    return v;
  }
  bool all_finite() const {
    return force.allFinite() && torque.allFinite();
  }
};

/// Rigid-body pose (world frame unless stated otherwise).
struct Pose {
  Eigen::Vector3d position = Eigen::Vector3d::Zero();
  Eigen::Quaterniond orientation = Eigen::Quaterniond::Identity();
};

/// Grasp parameters: distance r from the gripper's end center to the hinge
/// axis, grasp angle theta between gripper z and door y, height offset z_dg
/// along the hinge, and the signed target door angular speed omega.
struct GraspGeometry {
  double r = 0.0;      // m, > 0
  double theta = 0.0;  // rad
  double z_dg = 0.0;   // m
  double omega = 0.0;  // rad/s, negative = opening direction
};

/// Grasp angles are kept strictly inside (-pi/2, pi/2) before any tan(theta)
/// evaluation; the parameter domain only uses (-0.3, 0.3) so the clamp is a
/// numerical guard, not a behavioral limit.
double clamp_grasp_angle(double theta);

/// Gripper orientation relative to the door frame, rows
/// [[-1,0,0],[0,-sin,-cos],[0,-cos,sin]]. Orthonormal for all theta.
Eigen::Matrix3d rotation_door_to_gripper(double theta);

/// Closed-form desired gripper twist omega*[r,0,0, 0,-cos,sin] in the
/// gripper frame.
Twist twist_from_action(double r, double theta, double omega);

/// Desired gripper velocity in the door frame: linear [-omega*r,0,0],
/// angular [0,0,omega].
Twist door_frame_velocity(double omega, double r);

/// Same quantity as twist_from_action computed the long way: door-frame
/// velocity mapped through rotation_door_to_gripper. Kept as an independent
/// cross-check of the closed form.
Twist transform_chain(double r, double theta, double omega);

/// Reaction wrench on the gripper during ideal constant-speed opening:
/// force [F,0,0], torque [0,-tau*cos,tau*sin] in the gripper frame.
/// Satisfies tau_z/tau_y = -tan(theta) whenever cos(theta) != 0.
Wrench ideal_wrench(double theta, double f, double tau);

/// World pose of a gripper rigidly attached to the door: origin at door-frame
/// point [0, r, z_dg], orientation rotation_door_to_gripper(theta), both
/// carried through the hinge pose rotated by door_angle about the hinge axis.
Pose gripper_pose_from_door(const Pose& hinge_world, const GraspGeometry& geometry,
                            double door_angle);

}  // namespace hinge_rl
