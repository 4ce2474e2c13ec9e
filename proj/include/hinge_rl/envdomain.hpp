#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <string>

#include <Eigen/Dense>
#include <Eigen/Geometry>

#include "hinge_rl/rng.hpp"

namespace hinge_rl {

inline constexpr int kEnvParamCount = 16;

/// One door instance: geometry, joint dynamics, world pose of the hinge,
/// initial grasp angle and target opening speed. Field order below is the
/// canonical order for the 16-vector used by all network I/O and for the
/// envparams text format.
struct EnvParams {
  double length = 0.0;        // m, vertical panel extent
  double width = 0.0;         // m, hinge to free edge
  double height = 0.0;        // m, cabinet body height (pose-only)
  double thickness = 0.0;     // m
  double density = 0.0;       // kg/m^3
  double damping = 0.0;       // N*m*s/rad torsional joint damping
  double friction = 0.0;      // Coulomb joint friction coefficient
  double position_x = 0.0;    // m, hinge base position in world
  double position_y = 0.0;
  double position_z = 0.0;
  double quaternion_w = 0.0;  // raw sampled components; normalized at use
  double quaternion_x = 0.0;
  double quaternion_y = 0.0;
  double quaternion_z = 0.0;
  double theta_init = 0.0;    // rad, initial grasp angle
  double target_speed = 0.0;  // rad/s, signed target door angular speed

  Eigen::Matrix<double, kEnvParamCount, 1> vector() const;
  static EnvParams from_vector(const Eigen::Matrix<double, kEnvParamCount, 1>& v);

  /// Hinge world position.
  Eigen::Vector3d position() const {
    return {position_x, position_y, position_z};
  }
  /// Hinge world orientation; the stored components are normalized to unit
  /// length here, at the point of use.
  Eigen::Quaterniond orientation() const;
};

/// Closed (lo, hi) bounds per field. Values are fixed by the domain
/// definition; lo < hi for every field.
struct ParamRanges {
  std::array<double, kEnvParamCount> lo;
  std::array<double, kEnvParamCount> hi;

  static const ParamRanges& table();
  bool contains(const EnvParams& e, double slack = 0.0) const;
};

/// Canonical field names, in vector order.
const std::array<std::string, kEnvParamCount>& env_param_names();

/// Uniform independent draw of every field from its range.
EnvParams sample_env(Rng& rng);

/// Affine map of each field from (lo, hi) to (-1, 1). Throws
/// std::invalid_argument if a field is outside its range.
Eigen::Matrix<double, kEnvParamCount, 1> normalize(const EnvParams& e);

/// Inverse of normalize.
EnvParams denormalize(const Eigen::Matrix<double, kEnvParamCount, 1>& v);

/// Every field at its range midpoint: the "average of the domain" door.
EnvParams mean_env();

/// Text round-trip: "name=value" per line in canonical order, full precision.
void write_envparams(std::ostream& out, const EnvParams& e);
std::string envparams_to_string(const EnvParams& e);
EnvParams read_envparams(std::istream& in);
void save_envparams(const std::string& path, const EnvParams& e);
EnvParams load_envparams(const std::string& path);

/// FNV-1a hash of the canonical text form; used to tag paired evaluations.
std::uint64_t envparams_hash(const EnvParams& e);

}  // namespace hinge_rl
