#include <algorithm>
#include <cmath>
#include <ostream>
#include <string>

#include "cpd/error.hpp"
#include "cpd/geometry.hpp"
#include "cpd/numeric.hpp"

namespace cpd {

bool within_horizon(const Vec3& p, const Vec3& q, double horizon) {
  return (p - q).squaredNorm() <= horizon * horizon * (1.0 + 2e-10);
}

std::vector<std::vector<PointId>> find_neighbors(std::span<const Vec3> positions, double horizon) {
  const std::size_t n = positions.size();
  std::vector<std::vector<PointId>> result(n);
  if (n == 0) return result;

  Vec3 lo = positions[0];
  Vec3 hi = positions[0];
  for (const Vec3& p : positions) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  // Cells slightly wider than the horizon so the membership slack never
  // reaches past the adjacent cell.
  const double edge = horizon * (1.0 + 1e-9);
  std::array<long, 3> cells{};
  for (int k = 0; k < 3; ++k) cells[k] = static_cast<long>(std::floor((hi[k] - lo[k]) / edge)) + 1;

  auto cell_of = [&](const Vec3& p) {
    std::array<long, 3> c{};
    for (int k = 0; k < 3; ++k) {
      c[k] = std::min(cells[k] - 1, static_cast<long>(std::floor((p[k] - lo[k]) / edge)));
    }
    return c;
  };
  auto flat = [&](const std::array<long, 3>& c) { return (c[2] * cells[1] + c[1]) * cells[0] + c[0]; };

  // Counting sort of points into cells.
  const std::size_t total_cells = static_cast<std::size_t>(cells[0] * cells[1] * cells[2]);
  std::vector<std::size_t> start(total_cells + 1, 0);
  std::vector<std::size_t> cell_index(n);
  for (std::size_t a = 0; a < n; ++a) {
    cell_index[a] = static_cast<std::size_t>(flat(cell_of(positions[a])));
    ++start[cell_index[a] + 1];
  }
  for (std::size_t c = 0; c < total_cells; ++c) start[c + 1] += start[c];
  std::vector<PointId> members(n);
  {
    std::vector<std::size_t> fill(start.begin(), start.end() - 1);
    for (std::size_t a = 0; a < n; ++a) members[fill[cell_index[a]]++] = static_cast<PointId>(a);
  }

  for (std::size_t a = 0; a < n; ++a) {
    const auto c = cell_of(positions[a]);
    auto& out = result[a];
    for (long dz = -1; dz <= 1; ++dz) {
      for (long dy = -1; dy <= 1; ++dy) {
        for (long dx = -1; dx <= 1; ++dx) {
          const std::array<long, 3> nc{c[0] + dx, c[1] + dy, c[2] + dz};
          if (nc[0] < 0 || nc[1] < 0 || nc[2] < 0 || nc[0] >= cells[0] || nc[1] >= cells[1] ||
              nc[2] >= cells[2]) {
            continue;
          }
          const auto f = static_cast<std::size_t>(flat(nc));
          for (std::size_t m = start[f]; m < start[f + 1]; ++m) {
            const PointId b = members[m];
            if (b != a && within_horizon(positions[a], positions[b], horizon)) out.push_back(b);
          }
        }
      }
    }
    std::sort(out.begin(), out.end());
  }
  return result;
}

namespace {

// Degeneracy is judged from the lowest-id vertex so that every point of a
// triangle or tetrahedron reaches the same verdict.
bool non_collinear(const PointCloud& cloud, PointId a, PointId b, PointId c, double tol) {
  std::array<PointId, 3> v{a, b, c};
  std::sort(v.begin(), v.end());
  const Vec3 e1 = cloud.positions[v[1]] - cloud.positions[v[0]];
  const Vec3 e2 = cloud.positions[v[2]] - cloud.positions[v[0]];
  return e1.cross(e2).norm() > tol * e1.norm() * e2.norm();
}

bool non_coplanar(const PointCloud& cloud, PointId a, PointId b, PointId c, PointId d, double tol) {
  std::array<PointId, 4> v{a, b, c, d};
  std::sort(v.begin(), v.end());
  const Vec3 e1 = cloud.positions[v[1]] - cloud.positions[v[0]];
  const Vec3 e2 = cloud.positions[v[2]] - cloud.positions[v[0]];
  const Vec3 e3 = cloud.positions[v[3]] - cloud.positions[v[0]];
  return std::abs(e1.dot(e2.cross(e3))) > tol * e1.norm() * e2.norm() * e3.norm();
}

}  // namespace

NeighborTable build_neighbor_table(const PointCloud& cloud, const NeighborOptions& options) {
  if (!(options.horizon > 0.0)) throw Error(ErrorCode::invalid_argument, "horizon must be positive");
  if (cloud.dim == 2 && options.enabled.three) {
    throw Error(ErrorCode::invalid_argument, "three-neighbour interactions do not exist in 2D");
  }
  if (!options.enabled.one) {
    throw Error(ErrorCode::invalid_argument, "one-neighbour interactions are mandatory");
  }

  const std::size_t n = cloud.size();
  NeighborTable table;
  table.horizon_ = options.horizon;
  table.enabled_ = options.enabled;

  auto lists = find_neighbors(cloud.positions, options.horizon);
  table.bond_offsets_.assign(n + 1, 0);
  for (std::size_t a = 0; a < n; ++a) {
    if (lists[a].empty()) {
      throw Error(ErrorCode::isolated_point, "point " + std::to_string(a) + " has an empty horizon", a);
    }
    table.bond_offsets_[a + 1] = table.bond_offsets_[a] + lists[a].size();
  }
  table.bonds_.reserve(table.bond_offsets_[n]);
  for (const auto& l : lists) table.bonds_.insert(table.bonds_.end(), l.begin(), l.end());

  if (!options.enabled.two && !options.enabled.three) return table;

  const double h = options.horizon;
  if (options.enabled.two) table.pair_offsets_.assign(n + 1, 0);
  if (options.enabled.three) table.triplet_offsets_.assign(n + 1, 0);

  std::vector<char> close;
  std::vector<NeighborTable::Triplet> local_triplets;
  for (std::size_t a = 0; a < n; ++a) {
    const auto nb = table.neighbors(a);
    const std::size_t m = nb.size();
    const auto pa = static_cast<PointId>(a);
    close.assign(m * m, 0);
    for (std::size_t p = 0; p < m; ++p) {
      for (std::size_t q = p + 1; q < m; ++q) {
        const char c = within_horizon(cloud.positions[nb[p]], cloud.positions[nb[q]], h) ? 1 : 0;
        close[p * m + q] = c;
        close[q * m + p] = c;
      }
    }

    if (options.enabled.two) {
      std::vector<char> ok(m * m, 0);
      for (std::size_t p = 0; p < m; ++p) {
        for (std::size_t q = p + 1; q < m; ++q) {
          if (close[p * m + q] && non_collinear(cloud, pa, nb[p], nb[q], options.collinearity_tol)) {
            ok[p * m + q] = ok[q * m + p] = 1;
          }
        }
      }
      for (std::size_t p = 0; p < m; ++p) {
        for (std::size_t q = 0; q < m; ++q) {
          if (ok[p * m + q]) table.pairs_.push_back({nb[p], nb[q]});
        }
      }
      table.pair_offsets_[a + 1] = table.pairs_.size();
      if (table.pair_offsets_[a + 1] == table.pair_offsets_[a]) {
        throw Error(ErrorCode::degenerate_neighborhood,
                    "point " + std::to_string(a) + " has no contributing pair", a);
      }
    }

    if (options.enabled.three) {
      local_triplets.clear();
      for (std::size_t p = 0; p < m; ++p) {
        for (std::size_t q = p + 1; q < m; ++q) {
          if (!close[p * m + q]) continue;
          for (std::size_t r = q + 1; r < m; ++r) {
            if (!close[p * m + r] || !close[q * m + r]) continue;
            if (!non_coplanar(cloud, pa, nb[p], nb[q], nb[r], options.coplanarity_tol)) continue;
            local_triplets.push_back({nb[p], nb[q], nb[r]});
          }
        }
      }
      if (local_triplets.empty()) {
        throw Error(ErrorCode::degenerate_neighborhood,
                    "point " + std::to_string(a) + " has no contributing triplet", a);
      }
      table.triplets_.insert(table.triplets_.end(), local_triplets.begin(), local_triplets.end());
      table.triplet_offsets_[a + 1] = table.triplets_.size();
    }
  }
  return table;
}

NeighborTable compute_effective_volumes(const PointCloud& cloud, NeighborTable table) {
  const std::size_t n = table.size();
  table.neighborhood_volume_.assign(n, 0.0);
  table.v1_.assign(n, 0.0);
  table.v2_.assign(n, 0.0);
  table.v3_.assign(n, 0.0);
  for (std::size_t a = 0; a < n; ++a) {
    CompensatedSum vh;
    for (PointId i : table.neighbors(a)) vh.add(cloud.volumes[i]);
    const double v_h = vh.value();
    table.neighborhood_volume_[a] = v_h;
    table.v1_[a] = v_h / static_cast<double>(table.bond_count(a));
    if (table.enabled_.two) table.v2_[a] = v_h * v_h / static_cast<double>(table.pair_count(a));
    if (table.enabled_.three) {
      table.v3_[a] = v_h * v_h * v_h / static_cast<double>(table.triplet_count(a));
    }
  }
  return table;
}

NeighborTable make_neighbor_table(const PointCloud& cloud, const NeighborOptions& options) {
  return compute_effective_volumes(cloud, build_neighbor_table(cloud, options));
}

void NeighborTable::erase_pair_for_testing(std::size_t a, std::size_t index) {
  const std::size_t pos = pair_offsets_.at(a) + index;
  if (pos >= pair_offsets_.at(a + 1)) throw Error(ErrorCode::invalid_argument, "pair index out of range");
  pairs_.erase(pairs_.begin() + static_cast<std::ptrdiff_t>(pos));
  for (std::size_t b = a + 1; b < pair_offsets_.size(); ++b) --pair_offsets_[b];
}

QuadratureReport quadrature_fidelity_report(const NeighborTable& table) {
  QuadratureReport report;
  if (!table.has_volumes()) {
    throw Error(ErrorCode::invalid_argument, "effective volumes have not been computed");
  }
  auto record = [&](std::size_t a, Interaction kind, std::size_t count, double weight, double target) {
    CompensatedSum s;
    for (std::size_t c = 0; c < count; ++c) s.add(weight);
    QuadratureCheck check{a, kind, s.value(), target, 0.0};
    check.rel_err = std::abs(check.lhs - check.rhs) / std::abs(check.rhs);
    double& worst = report.max_rel_err[static_cast<int>(kind) - 1];
    worst = std::max(worst, check.rel_err);
    report.checks.push_back(check);
  };
  for (std::size_t a = 0; a < table.size(); ++a) {
    const double v_h = table.neighborhood_volume(a);
    record(a, Interaction::one, table.bond_count(a), table.v1(a), v_h);
    if (table.enabled().two) record(a, Interaction::two, table.pair_count(a), table.v2(a), v_h * v_h);
    if (table.enabled().three) {
      record(a, Interaction::three, table.triplet_count(a), table.v3(a), v_h * v_h * v_h);
    }
  }
  return report;
}

void write_quadrature_report_csv(std::ostream& out, const QuadratureReport& report) {
  out << "point_id,check,lhs,rhs,rel_err\n";
  out.precision(17);
  for (const auto& c : report.checks) {
    const char* name = c.kind == Interaction::one ? "one" : c.kind == Interaction::two ? "two" : "three";
    out << c.point << ',' << name << ',' << c.lhs << ',' << c.rhs << ',' << c.rel_err << '\n';
  }
}

}  // namespace cpd
