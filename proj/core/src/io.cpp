#include "cpd/io.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <ostream>

#include "cpd/error.hpp"

namespace cpd {

void write_newton_log_csv(std::ostream& out, const NewtonLog& log) {
  out << "increment,iteration,residual_norm,normalized_residual\n";
  out.precision(17);
  for (const auto& inc : log.increments) {
    for (const auto& it : inc.iterations) {
      out << inc.increment << ',' << it.iteration << ',' << it.residual_norm << ',' << it.normalized << '\n';
    }
  }
}

void write_snapshot_csv(std::ostream& out, const PointCloud& cloud, std::span<const Vec3> x) {
  out << "point_id,X1,X2,X3,x1,x2,x3,u1,u2,u3,tag\n";
  out.precision(17);
  for (std::size_t a = 0; a < cloud.size(); ++a) {
    const Vec3& X = cloud.positions[a];
    const Vec3 u = x[a] - X;
    out << a << ',' << X.x() << ',' << X.y() << ',' << X.z() << ',' << x[a].x() << ',' << x[a].y() << ','
        << x[a].z() << ',' << u.x() << ',' << u.y() << ',' << u.z() << ',' << to_string(cloud.tags[a]) << '\n';
  }
}

void write_vtk(std::ostream& out, const PointCloud& cloud, std::span<const Vec3> x, const std::string& title) {
  const std::size_t n = cloud.size();
  out << "# vtk DataFile Version 3.0\n" << (title.empty() ? "cpd" : title) << "\nASCII\nDATASET POLYDATA\n";
  out.precision(17);
  out << "POINTS " << n << " double\n";
  for (std::size_t a = 0; a < n; ++a) {
    const Vec3& X = cloud.positions[a];
    out << X.x() << ' ' << X.y() << ' ' << X.z() << '\n';
  }
  out << "VERTICES " << n << ' ' << 2 * n << '\n';
  for (std::size_t a = 0; a < n; ++a) out << "1 " << a << '\n';
  out << "POINT_DATA " << n << "\nVECTORS displacement double\n";
  for (std::size_t a = 0; a < n; ++a) {
    const Vec3 u = x[a] - cloud.positions[a];
    out << u.x() << ' ' << u.y() << ' ' << u.z() << '\n';
  }
  out << "SCALARS tag int 1\nLOOKUP_TABLE default\n";
  for (std::size_t a = 0; a < n; ++a) out << static_cast<int>(cloud.tags[a]) << '\n';
}

std::vector<std::size_t> nearest_points(const PointCloud& cloud, const Vec3& target) {
  if (cloud.size() == 0) throw Error(ErrorCode::empty_cloud, "cannot probe an empty cloud");
  double best = std::numeric_limits<double>::infinity();
  for (const Vec3& p : cloud.positions) best = std::min(best, (p - target).norm());
  const double cut = best * (1.0 + 1e-9) + 1e-300;
  std::vector<std::size_t> ids;
  for (std::size_t a = 0; a < cloud.size(); ++a) {
    if ((cloud.positions[a] - target).norm() <= cut) ids.push_back(a);
  }
  return ids;
}

ProbeValue probe_point(const PointCloud& cloud, std::span<const Vec3> x, const Vec3& target) {
  ProbeValue v;
  for (std::size_t a : nearest_points(cloud, target)) {
    v.X += cloud.positions[a];
    v.u += x[a] - cloud.positions[a];
    ++v.count;
  }
  v.X /= static_cast<double>(v.count);
  v.u /= static_cast<double>(v.count);
  return v;
}

std::vector<ProbeValue> probe_line(const PointCloud& cloud, std::span<const Vec3> x, int axis, const Vec3& through) {
  if (axis < 0 || axis > 2) throw Error(ErrorCode::invalid_argument, "probe axis out of range");
  if (cloud.size() == 0) throw Error(ErrorCode::empty_cloud, "cannot probe an empty cloud");
  auto perp = [&](const Vec3& p) {
    Vec3 d = p - through;
    d[axis] = 0.0;
    return d.norm();
  };
  double best = std::numeric_limits<double>::infinity();
  for (const Vec3& p : cloud.positions) best = std::min(best, perp(p));
  const double cut = best * (1.0 + 1e-9) + 1e-12 * std::max(1.0, best);
  std::map<double, ProbeValue> stations;
  for (std::size_t a = 0; a < cloud.size(); ++a) {
    const Vec3& p = cloud.positions[a];
    if (perp(p) > cut) continue;
    ProbeValue& v = stations[p[axis]];
    v.X += p;
    v.u += x[a] - p;
    ++v.count;
  }
  std::vector<ProbeValue> out;
  for (auto& [coord, v] : stations) {
    v.X /= static_cast<double>(v.count);
    v.u /= static_cast<double>(v.count);
    out.push_back(v);
  }
  return out;
}

}  // namespace cpd
