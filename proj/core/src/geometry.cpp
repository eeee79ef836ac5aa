#include "cpd/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>

#include "cpd/error.hpp"
#include "cpd/numeric.hpp"

namespace cpd {

std::string_view to_string(BoundaryTag tag) {
  switch (tag) {
    case BoundaryTag::interior: return "interior";
    case BoundaryTag::layer_left: return "layer_left";
    case BoundaryTag::layer_right: return "layer_right";
    case BoundaryTag::layer_other: return "layer_other";
  }
  return "interior";
}

double Box::measure(int dim) const {
  double m = 1.0;
  for (int k = 0; k < dim; ++k) m *= extent(k);
  return m;
}

bool Box::strictly_contains(const Vec3& p, int dim) const {
  for (int k = 0; k < dim; ++k) {
    if (!(p[k] > lo[k] && p[k] < hi[k])) return false;
  }
  return true;
}

double PointCloud::total_volume() const { return compensated_sum(volumes); }

namespace {

int conforming_cells(double extent, double spacing, int axis) {
  const double ratio = extent / spacing;
  const double n = std::round(ratio);
  if (n < 1.0 || std::abs(ratio - n) > 1e-9 * std::max(1.0, n)) {
    std::ostringstream msg;
    msg << "domain edge " << axis << " of length " << extent << " is not an integer multiple of spacing "
        << spacing;
    throw Error(ErrorCode::non_conforming_domain, msg.str());
  }
  return static_cast<int>(n);
}

}  // namespace

PointCloud generate_uniform_grid(const Box& domain, std::span<const Box> holes, double spacing,
                                 int dim) {
  if (dim != 2 && dim != 3) throw Error(ErrorCode::invalid_argument, "dim must be 2 or 3");
  if (!(spacing > 0.0)) throw Error(ErrorCode::invalid_argument, "spacing must be positive");

  std::array<int, 3> cells{1, 1, 1};
  for (int k = 0; k < dim; ++k) cells[k] = conforming_cells(domain.extent(k), spacing, k);

  for (const Box& hole : holes) {
    for (int k = 0; k < dim; ++k) {
      if (hole.lo[k] < domain.lo[k] || hole.hi[k] > domain.hi[k] || hole.lo[k] >= hole.hi[k]) {
        throw Error(ErrorCode::invalid_argument, "hole does not lie inside the domain");
      }
    }
  }

  PointCloud cloud;
  cloud.dim = dim;
  cloud.spacing = spacing;
  cloud.bounds = domain;
  if (dim == 2) {
    cloud.bounds.lo.z() = 0.0;
    cloud.bounds.hi.z() = 0.0;
  }
  const double volume = std::pow(spacing, dim);

  for (int iz = 0; iz < cells[2]; ++iz) {
    for (int iy = 0; iy < cells[1]; ++iy) {
      for (int ix = 0; ix < cells[0]; ++ix) {
        Vec3 p(domain.lo.x() + (ix + 0.5) * spacing, domain.lo.y() + (iy + 0.5) * spacing,
               dim == 3 ? domain.lo.z() + (iz + 0.5) * spacing : 0.0);
        const bool in_hole = std::any_of(holes.begin(), holes.end(),
                                         [&](const Box& h) { return h.strictly_contains(p, dim); });
        if (in_hole) continue;
        cloud.positions.push_back(p);
        cloud.volumes.push_back(volume);
      }
    }
  }
  if (cloud.positions.empty()) throw Error(ErrorCode::empty_cloud, "every grid point lies inside a hole");
  cloud.tags.assign(cloud.size(), BoundaryTag::interior);
  return cloud;
}

namespace {

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, ',')) {
    const auto b = field.find_first_not_of(" \t\r");
    const auto e = field.find_last_not_of(" \t\r");
    fields.push_back(b == std::string::npos ? std::string() : field.substr(b, e - b + 1));
  }
  return fields;
}

double parse_double(const std::string& s, std::size_t line_no) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw Error(ErrorCode::io, "line " + std::to_string(line_no) + ": cannot parse number '" + s + "'");
  }
}

}  // namespace

PointCloud read_point_cloud_csv(std::istream& in, std::optional<int> dim) {
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorCode::io, "empty point-cloud file");
  const auto header = split_csv(line);
  const std::vector<std::string> expected{"id", "X1", "X2", "X3", "V"};
  if (header != expected) throw Error(ErrorCode::io, "point-cloud header must be id,X1,X2,X3,V");

  struct Row {
    long id;
    Vec3 x;
    double v;
  };
  std::vector<Row> rows;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto f = split_csv(line);
    if (f.size() != 5) throw Error(ErrorCode::io, "line " + std::to_string(line_no) + ": expected 5 fields");
    Row r;
    r.id = static_cast<long>(parse_double(f[0], line_no));
    r.x = Vec3(parse_double(f[1], line_no), parse_double(f[2], line_no), parse_double(f[3], line_no));
    r.v = parse_double(f[4], line_no);
    if (!(r.v > 0.0)) throw Error(ErrorCode::io, "line " + std::to_string(line_no) + ": volume must be positive");
    rows.push_back(r);
  }
  if (rows.empty()) throw Error(ErrorCode::empty_cloud, "point-cloud file has no points");

  const std::size_t n = rows.size();
  PointCloud cloud;
  cloud.positions.resize(n);
  cloud.volumes.resize(n);
  std::vector<bool> seen(n, false);
  for (const Row& r : rows) {
    if (r.id < 0 || static_cast<std::size_t>(r.id) >= n || seen[r.id]) {
      throw Error(ErrorCode::io, "point ids must be a permutation of 0.." + std::to_string(n - 1));
    }
    seen[r.id] = true;
    cloud.positions[r.id] = r.x;
    cloud.volumes[r.id] = r.v;
  }

  const bool flat = std::all_of(rows.begin(), rows.end(), [](const Row& r) { return r.x.z() == 0.0; });
  cloud.dim = dim.value_or(flat ? 2 : 3);
  if (cloud.dim == 2 && !flat) throw Error(ErrorCode::io, "2D clouds must have X3 = 0");

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return std::lexicographical_compare(cloud.positions[a].data(), cloud.positions[a].data() + 3,
                                        cloud.positions[b].data(), cloud.positions[b].data() + 3);
  });
  for (std::size_t k = 1; k < n; ++k) {
    if (cloud.positions[order[k]] == cloud.positions[order[k - 1]]) {
      throw Error(ErrorCode::io, "duplicate point positions", order[k]);
    }
  }

  cloud.bounds.lo = cloud.positions.front();
  cloud.bounds.hi = cloud.positions.front();
  for (const Vec3& p : cloud.positions) {
    cloud.bounds.lo = cloud.bounds.lo.cwiseMin(p);
    cloud.bounds.hi = cloud.bounds.hi.cwiseMax(p);
  }
  cloud.tags.assign(n, BoundaryTag::interior);
  return cloud;
}

PointCloud read_point_cloud_csv(const std::filesystem::path& path, std::optional<int> dim) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::io, "cannot open " + path.string());
  return read_point_cloud_csv(in, dim);
}

void write_point_cloud_csv(std::ostream& out, const PointCloud& cloud) {
  out << "id,X1,X2,X3,V\n";
  out.precision(17);
  for (std::size_t a = 0; a < cloud.size(); ++a) {
    const Vec3& p = cloud.positions[a];
    out << a << ',' << p.x() << ',' << p.y() << ',' << p.z() << ',' << cloud.volumes[a] << '\n';
  }
}

}  // namespace cpd
