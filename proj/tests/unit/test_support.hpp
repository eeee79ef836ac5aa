#pragma once

#include <random>
#include <sstream>
#include <string>

#include "cpd/assembly.hpp"
#include "cpd/error.hpp"
#include "cpd/geometry.hpp"

namespace cpd::test {

inline PointCloud cloud_from_csv(const std::string& body, int dim) {
  std::istringstream in("id,X1,X2,X3,V\n" + body);
  return read_point_cloud_csv(in, dim);
}

// Corners of the unit square, volume 0.25 each.
inline PointCloud unit_square_corners() {
  return cloud_from_csv("0,0,0,0,0.25\n1,1,0,0,0.25\n2,0,1,0,0.25\n3,1,1,0,0.25\n", 2);
}

inline Box box2(double lo, double hi) { return Box{Vec3(lo, lo, 0.0), Vec3(hi, hi, 0.0)}; }
inline Box box3(double lo, double hi) { return Box{Vec3(lo, lo, lo), Vec3(hi, hi, hi)}; }

inline NeighborTable table_for(const PointCloud& cloud, double horizon, InteractionFlags enabled = {}) {
  NeighborOptions o;
  o.horizon = horizon;
  o.enabled = enabled;
  return make_neighbor_table(cloud, o);
}

inline Vec3 random_vec(std::mt19937_64& rng, double scale = 1.0) {
  std::uniform_real_distribution<double> u(-scale, scale);
  return Vec3(u(rng), u(rng), u(rng));
}

inline Mat3 random_rotation(std::mt19937_64& rng) {
  std::normal_distribution<double> n;
  Eigen::Quaterniond q(n(rng), n(rng), n(rng), n(rng));
  q.normalize();
  return q.toRotationMatrix();
}

template <class Fn>
ErrorCode code_of(Fn&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  throw std::logic_error("expected a cpd::Error");
}

}  // namespace cpd::test
