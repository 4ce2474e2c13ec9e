#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "hinge_rl/kinematics.hpp"
#include "hinge_rl/rng.hpp"

using namespace hinge_rl;

namespace {
constexpr double kTight = 1e-12;
}

TEST_CASE("twist_from_action matches direct evaluation") {
  const Twist a = twist_from_action(1.0, 0.0, 1.0);
  CHECK(a.frame == Frame::Gripper);
  CHECK(a.linear.isApprox(Eigen::Vector3d(1, 0, 0), kTight));
  CHECK(a.angular.isApprox(Eigen::Vector3d(0, -1, 0), kTight));

  const Twist b = twist_from_action(0.3, M_PI / 2.0, -0.2);
  CHECK(b.linear.x() == doctest::Approx(-0.06).epsilon(1e-12));
  CHECK(std::abs(b.angular.y()) < 1e-15);
  CHECK(b.angular.z() == doctest::Approx(-0.2).epsilon(1e-12));
}

TEST_CASE("twist_from_action rejects bad arguments") {
  CHECK_THROWS_AS(twist_from_action(0.0, 0.1, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(twist_from_action(-0.2, 0.1, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(twist_from_action(0.5, std::nan(""), 1.0), std::invalid_argument);
  CHECK_THROWS_AS(twist_from_action(0.5, 0.1, std::numeric_limits<double>::infinity()),
                  std::invalid_argument);
}

TEST_CASE("rotation_door_to_gripper endpoint values") {
  const Eigen::Matrix3d r0 = rotation_door_to_gripper(0.0);
  Eigen::Matrix3d want0;
  want0 << -1, 0, 0, 0, 0, -1, 0, -1, 0;
  CHECK((r0 - want0).lpNorm<Eigen::Infinity>() < kTight);

  const Eigen::Matrix3d r90 = rotation_door_to_gripper(M_PI / 2.0);
  Eigen::Matrix3d want90;
  want90 << -1, 0, 0, 0, -1, 0, 0, 0, 1;
  CHECK((r90 - want90).lpNorm<Eigen::Infinity>() < kTight);
}

TEST_CASE("rotation_door_to_gripper is orthonormal everywhere") {
  Rng rng(11);
  for (int i = 0; i < 500; ++i) {
    const double theta = rng.uniform(-M_PI, M_PI);
    const Eigen::Matrix3d r = rotation_door_to_gripper(theta);
    const Eigen::Matrix3d err = r * r.transpose() - Eigen::Matrix3d::Identity();
    CHECK(err.lpNorm<Eigen::Infinity>() < kTight);
  }
}

TEST_CASE("door_frame_velocity values") {
  const Twist a = door_frame_velocity(1.0, 1.0);
  CHECK(a.frame == Frame::Door);
  CHECK(a.linear.isApprox(Eigen::Vector3d(-1, 0, 0), kTight));
  CHECK(a.angular.isApprox(Eigen::Vector3d(0, 0, 1), kTight));

  const Twist zero = door_frame_velocity(0.0, 0.3);
  CHECK(zero.vector6().norm() == 0.0);

  const Twist c = door_frame_velocity(-0.2, 0.4);
  CHECK(c.linear.x() == doctest::Approx(0.08).epsilon(1e-12));
  CHECK(c.angular.z() == doctest::Approx(-0.2).epsilon(1e-12));

  CHECK_THROWS_AS(door_frame_velocity(0.5, 0.0), std::invalid_argument);
}

TEST_CASE("transform chain equals the closed form on 10^4 random inputs") {
  Rng rng(42);
  double max_err = 0.0;
  for (int i = 0; i < 10000; ++i) {
    const double r = rng.uniform(0.01, 2.0);
    const double theta = rng.uniform(-1.5, 1.5);
    const double omega = rng.uniform(-2.0, 2.0);
    const auto closed = twist_from_action(r, theta, omega).vector6();
    const auto chained = transform_chain(r, theta, omega).vector6();
    max_err = std::max(max_err, (closed - chained).lpNorm<Eigen::Infinity>());
  }
  CHECK(max_err < kTight);
}

TEST_CASE("twist_from_action is linear in omega") {
  Rng rng(7);
  for (int i = 0; i < 200; ++i) {
    const double r = rng.uniform(0.05, 1.0);
    const double theta = rng.uniform(-0.4, 0.4);
    const double omega = rng.uniform(-0.5, 0.5);
    const double c = rng.uniform(-3.0, 3.0);
    if (std::abs(omega) < 1e-9) continue;
    const auto base = twist_from_action(r, theta, omega).vector6();
    const auto scaled = twist_from_action(r, theta, c * omega).vector6();
    CHECK((scaled - c * base).lpNorm<Eigen::Infinity>() < 1e-12);
  }
}

TEST_CASE("ideal wrench values and k5 identity") {
  const Wrench w0 = ideal_wrench(0.0, 10.0, 2.0);
  CHECK(w0.force.isApprox(Eigen::Vector3d(10, 0, 0), kTight));
  CHECK(w0.torque.isApprox(Eigen::Vector3d(0, -2, 0), kTight));

  const Wrench w45 = ideal_wrench(M_PI / 4.0, 1.0, 1.0);
  CHECK(w45.torque.y() == doctest::Approx(-std::sqrt(2.0) / 2.0).epsilon(1e-12));
  CHECK(w45.torque.z() == doctest::Approx(std::sqrt(2.0) / 2.0).epsilon(1e-12));

  // tau_z / tau_y = -tan(theta), the identity that zeroes the k5 term.
  Rng rng(3);
  for (int i = 0; i < 200; ++i) {
    const double theta = rng.uniform(-1.2, 1.2);
    const Wrench w = ideal_wrench(theta, rng.uniform(0.1, 20.0), rng.uniform(0.1, 5.0));
    CHECK(w.torque.z() / w.torque.y() == doctest::Approx(-std::tan(theta)).epsilon(1e-9));
  }

  CHECK_THROWS_AS(ideal_wrench(0.1, 0.0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(ideal_wrench(0.1, 1.0, -1.0), std::invalid_argument);
}

TEST_CASE("ideal wrench at theta=0.3 by substitution") {
  const double theta = 0.3;
  const Wrench w = ideal_wrench(theta, 5.0, 1.5);
  CHECK(w.force.x() == doctest::Approx(5.0));
  CHECK(w.torque.y() == doctest::Approx(-1.5 * std::cos(theta)).epsilon(1e-12));
  CHECK(w.torque.z() == doctest::Approx(1.5 * std::sin(theta)).epsilon(1e-12));
}

TEST_CASE("gripper pose keeps hinge distance invariant") {
  Rng rng(99);
  Pose hinge;
  hinge.position = Eigen::Vector3d(0.5, -0.02, 0.03);
  hinge.orientation =
      Eigen::Quaterniond(0.43, 0.01, -0.02, 0.99).normalized();
  const Eigen::Vector3d axis = hinge.orientation * Eigen::Vector3d::UnitZ();

  GraspGeometry g;
  g.r = 0.37;
  g.theta = 0.21;
  g.z_dg = 0.05;

  for (int i = 0; i < 300; ++i) {
    const double angle = rng.uniform(-M_PI, M_PI);
    const Pose pose = gripper_pose_from_door(hinge, g, angle);
    const Eigen::Vector3d rel = pose.position - hinge.position;
    const Eigen::Vector3d radial = rel - rel.dot(axis) * axis;
    CHECK(radial.norm() == doctest::Approx(g.r).epsilon(1e-12));
  }
}

TEST_CASE("gripper pose at zero and quarter-turn door angles") {
  Pose hinge;
  hinge.position = Eigen::Vector3d(0.5, 0.0, 0.0);
  GraspGeometry g;
  g.r = 0.4;
  g.theta = 0.0;
  g.z_dg = 0.0;

  const Pose at0 = gripper_pose_from_door(hinge, g, 0.0);
  CHECK(at0.position.isApprox(Eigen::Vector3d(0.5, 0.4, 0.0), 1e-12));

  const Pose at90 = gripper_pose_from_door(hinge, g, M_PI / 2.0);
  CHECK(at90.position.isApprox(Eigen::Vector3d(0.1, 0.0, 0.0), 1e-12));
}

TEST_CASE("grasp angle clamp stays inside the tan singularity") {
  CHECK(clamp_grasp_angle(0.2) == doctest::Approx(0.2));
  CHECK(clamp_grasp_angle(2.0) < M_PI / 2.0);
  CHECK(clamp_grasp_angle(-2.0) > -M_PI / 2.0);
  CHECK(std::isfinite(std::tan(clamp_grasp_angle(100.0))));
}
