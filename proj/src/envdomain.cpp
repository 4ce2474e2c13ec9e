#include "hinge_rl/envdomain.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace hinge_rl {

namespace {

std::array<double, kEnvParamCount> field_view(const EnvParams& e) {
  return {e.length,       e.width,        e.height,       e.thickness,
          e.density,      e.damping,      e.friction,     e.position_x,
          e.position_y,   e.position_z,   e.quaternion_w, e.quaternion_x,
          e.quaternion_y, e.quaternion_z, e.theta_init,   e.target_speed};
}

EnvParams from_fields(const std::array<double, kEnvParamCount>& f) {
  EnvParams e;
  e.length = f[0];
  e.width = f[1];
  e.height = f[2];
  e.thickness = f[3];
  e.density = f[4];
  e.damping = f[5];
  e.friction = f[6];
  e.position_x = f[7];
  e.position_y = f[8];
  e.position_z = f[9];
  e.quaternion_w = f[10];
  e.quaternion_x = f[11];
  e.quaternion_y = f[12];
  e.quaternion_z = f[13];
  e.theta_init = f[14];
  e.target_speed = f[15];
  return e;
}

std::string format_full(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

Eigen::Matrix<double, kEnvParamCount, 1> EnvParams::vector() const {
  const auto f = field_view(*this);
  Eigen::Matrix<double, kEnvParamCount, 1> v;
  for (int i = 0; i < kEnvParamCount; ++i) v[i] = f[i];
  return v;
}

EnvParams EnvParams::from_vector(const Eigen::Matrix<double, kEnvParamCount, 1>& v) {
  std::array<double, kEnvParamCount> f;
  for (int i = 0; i < kEnvParamCount; ++i) f[i] = v[i];
  return from_fields(f);
}

Eigen::Quaterniond EnvParams::orientation() const {
  Eigen::Quaterniond q(quaternion_w, quaternion_x, quaternion_y, quaternion_z);
  const double n = q.norm();
  if (!(n > 0.0) || !std::isfinite(n)) {
    throw std::invalid_argument("quaternion has zero or non-finite norm");
  }
  q.coeffs() /= n;
  return q;
}

const ParamRanges& ParamRanges::table() {
  static const ParamRanges r = {
      //  length        width       height   thickness    density
      {0.28, 0.2, 0.2, 0.01, 300.0,
       //  damping     friction    pos_x    pos_y    pos_z
       0.01, 0.001, 0.45, -0.05, -0.05,
       //  quat w/x/y/z
       -0.1284, -0.0489, -0.0489, 0.989,
       //  theta      target speed
       -0.3, -0.3},
      {0.32, 0.85, 0.4, 0.03, 3000.0,
       0.08, 0.02, 0.55, 0.05, 0.05,
       1.0, 0.0489, 0.0489, 1.0,
       0.3, -0.05}};
  return r;
}

bool ParamRanges::contains(const EnvParams& e, double slack) const {
  const auto f = field_view(e);
  for (int i = 0; i < kEnvParamCount; ++i) {
    if (f[i] < lo[i] - slack || f[i] > hi[i] + slack) return false;
  }
  return true;
}

const std::array<std::string, kEnvParamCount>& env_param_names() {
  static const std::array<std::string, kEnvParamCount> names = {
      "length",       "width",        "height",       "thickness",
      "density",      "damping",      "friction",     "position_x",
      "position_y",   "position_z",   "quaternion_w", "quaternion_x",
      "quaternion_y", "quaternion_z", "theta_init",   "target_speed"};
  return names;
}

EnvParams sample_env(Rng& rng) {
  const auto& ranges = ParamRanges::table();
  std::array<double, kEnvParamCount> f;
  for (int i = 0; i < kEnvParamCount; ++i) {
    f[i] = rng.uniform(ranges.lo[i], ranges.hi[i]);
  }
  return from_fields(f);
}

Eigen::Matrix<double, kEnvParamCount, 1> normalize(const EnvParams& e) {
  const auto& ranges = ParamRanges::table();
  const auto f = field_view(e);
  Eigen::Matrix<double, kEnvParamCount, 1> v;
  for (int i = 0; i < kEnvParamCount; ++i) {
    if (f[i] < ranges.lo[i] || f[i] > ranges.hi[i]) {
      throw std::invalid_argument("env param '" + env_param_names()[i] +
                                  "' outside its range");
    }
    v[i] = -1.0 + 2.0 * (f[i] - ranges.lo[i]) / (ranges.hi[i] - ranges.lo[i]);
  }
  return v;
}

EnvParams denormalize(const Eigen::Matrix<double, kEnvParamCount, 1>& v) {
  const auto& ranges = ParamRanges::table();
  std::array<double, kEnvParamCount> f;
  for (int i = 0; i < kEnvParamCount; ++i) {
    f[i] = ranges.lo[i] + 0.5 * (v[i] + 1.0) * (ranges.hi[i] - ranges.lo[i]);
  }
  return from_fields(f);
}

EnvParams mean_env() {
  const auto& ranges = ParamRanges::table();
  std::array<double, kEnvParamCount> f;
  for (int i = 0; i < kEnvParamCount; ++i) {
    f[i] = 0.5 * (ranges.lo[i] + ranges.hi[i]);
  }
  return from_fields(f);
}

void write_envparams(std::ostream& out, const EnvParams& e) {
  const auto f = field_view(e);
  const auto& names = env_param_names();
  for (int i = 0; i < kEnvParamCount; ++i) {
    out << names[i] << "=" << format_full(f[i]) << "\n";
  }
}

std::string envparams_to_string(const EnvParams& e) {
  std::ostringstream out;
  write_envparams(out, e);
  return out.str();
}

EnvParams read_envparams(std::istream& in) {
  std::map<std::string, double> kv;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw std::invalid_argument("envparams line without '=': " + line);
    }
    kv[line.substr(0, eq)] = std::stod(line.substr(eq + 1));
  }
  const auto& names = env_param_names();
  std::array<double, kEnvParamCount> f;
  for (int i = 0; i < kEnvParamCount; ++i) {
    const auto it = kv.find(names[i]);
    if (it == kv.end()) {
      throw std::invalid_argument("envparams missing field " + names[i]);
    }
    f[i] = it->second;
  }
  return from_fields(f);
}

void save_envparams(const std::string& path, const EnvParams& e) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  write_envparams(out, e);
}

EnvParams load_envparams(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  return read_envparams(in);
}

std::uint64_t envparams_hash(const EnvParams& e) {
  const std::string text = envparams_to_string(e);
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (const char c : text) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001B3ULL;
  }
  return h;
}

}  // namespace hinge_rl
