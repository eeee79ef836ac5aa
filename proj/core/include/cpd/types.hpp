#pragma once

#include <cstddef>
#include <cstdint>
#include <string_view>

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace cpd {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using PointId = std::uint32_t;

/// Which neighbour-set interactions contribute to the stored energy.
struct InteractionFlags {
  bool one = true;
  bool two = false;
  bool three = false;

  friend bool operator==(const InteractionFlags&, const InteractionFlags&) = default;
};

enum class Interaction : int { one = 1, two = 2, three = 3 };

/// How residual and tangent are formed from the per-set kernels.
///   collocation: R^a is the point-wise force density sum, K^ab = dR^a/dx^b.
///   variational: R = dPi/dx and K = d2Pi/dx2 of the total stored energy.
enum class AssemblyMode { collocation, variational };

/// ordered: loop every stored ordering of a pair/triplet.
/// unordered: visit each set once and fold in its permutations.
enum class Enumeration { ordered, unordered };

std::string_view to_string(AssemblyMode mode);
AssemblyMode parse_assembly_mode(std::string_view text);

inline Mat3 skew(const Vec3& v) {
  Mat3 m;
  m << 0.0, -v.z(), v.y(),
       v.z(), 0.0, -v.x(),
       -v.y(), v.x(), 0.0;
  return m;
}

}  // namespace cpd
