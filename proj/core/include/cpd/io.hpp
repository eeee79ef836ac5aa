#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "cpd/solver.hpp"

namespace cpd {

/// `increment,iteration,residual_norm,normalized_residual`
void write_newton_log_csv(std::ostream& out, const NewtonLog& log);

/// `point_id,X1,X2,X3,x1,x2,x3,u1,u2,u3,tag`
void write_snapshot_csv(std::ostream& out, const PointCloud& cloud, std::span<const Vec3> x);

/// Legacy ASCII VTK polydata with one vertex per point, the displacement as
/// POINT_DATA vectors and the boundary tag as an integer scalar.
void write_vtk(std::ostream& out, const PointCloud& cloud, std::span<const Vec3> x, const std::string& title);

/// Points nearest to `target`; every point within a relative 1e-9 of the
/// smallest distance is returned, in ascending id order.
std::vector<std::size_t> nearest_points(const PointCloud& cloud, const Vec3& target);

/// Mean reference position and displacement over the nearest points.
struct ProbeValue {
  Vec3 X = Vec3::Zero();
  Vec3 u = Vec3::Zero();
  std::size_t count = 0;
};
ProbeValue probe_point(const PointCloud& cloud, std::span<const Vec3> x, const Vec3& target);

/// Points of the grid row parallel to `axis` nearest to `through`. Rows tied
/// for nearest are averaged station by station.
std::vector<ProbeValue> probe_line(const PointCloud& cloud, std::span<const Vec3> x, int axis, const Vec3& through);

}  // namespace cpd
