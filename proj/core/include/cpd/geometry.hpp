#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "cpd/types.hpp"

namespace cpd {

enum class BoundaryTag : std::uint8_t { interior, layer_left, layer_right, layer_other };

std::string_view to_string(BoundaryTag tag);

/// Axis-aligned box. In 2D the third coordinate of both corners is zero.
struct Box {
  Vec3 lo = Vec3::Zero();
  Vec3 hi = Vec3::Zero();

  double extent(int axis) const { return hi[axis] - lo[axis]; }
  double measure(int dim) const;
  /// Strict interior test on the first `dim` axes.
  bool strictly_contains(const Vec3& p, int dim) const;
};

/// Material points that are collocation and quadrature points at once.
struct PointCloud {
  int dim = 3;
  std::vector<Vec3> positions;
  std::vector<double> volumes;
  std::vector<BoundaryTag> tags;
  /// Grid spacing, present for generated grids only.
  std::optional<double> spacing;
  /// Domain box for generated grids; ingested clouds use their bounding box.
  Box bounds;

  std::size_t size() const { return positions.size(); }
  double total_volume() const;
};

/// Cell-centred uniform grid on `domain` with the cells whose centre lies
/// strictly inside any hole removed. Every point carries volume spacing^dim.
PointCloud generate_uniform_grid(const Box& domain, std::span<const Box> holes, double spacing,
                                 int dim);

/// Reads `id,X1,X2,X3,V`. A cloud whose X3 column is identically zero is 2D
/// unless `dim` forces otherwise.
PointCloud read_point_cloud_csv(std::istream& in, std::optional<int> dim = std::nullopt);
PointCloud read_point_cloud_csv(const std::filesystem::path& path,
                                std::optional<int> dim = std::nullopt);
void write_point_cloud_csv(std::ostream& out, const PointCloud& cloud);

struct NeighborOptions {
  double horizon = 0.0;
  double collinearity_tol = 1e-8;
  double coplanarity_tol = 1e-8;
  InteractionFlags enabled;
};

/// Horizon membership and the contributing pairs/triplets of every point,
/// stored in compressed rows. Pairs are kept in both orderings (lexicographic).
/// Triplets are kept once as ascending ids; each stands for its six orderings,
/// which is what the counts report.
class NeighborTable {
 public:
  using Pair = std::array<PointId, 2>;
  using Triplet = std::array<PointId, 3>;

  std::size_t size() const { return bond_offsets_.empty() ? 0 : bond_offsets_.size() - 1; }
  double horizon() const { return horizon_; }
  const InteractionFlags& enabled() const { return enabled_; }

  std::span<const PointId> neighbors(std::size_t a) const {
    return {bonds_.data() + bond_offsets_[a], bonds_.data() + bond_offsets_[a + 1]};
  }
  std::span<const Pair> pairs(std::size_t a) const {
    if (pair_offsets_.empty()) return {};
    return {pairs_.data() + pair_offsets_[a], pairs_.data() + pair_offsets_[a + 1]};
  }
  /// Ascending-id triplets; every entry represents six ordered triplets.
  std::span<const Triplet> triplets(std::size_t a) const {
    if (triplet_offsets_.empty()) return {};
    return {triplets_.data() + triplet_offsets_[a], triplets_.data() + triplet_offsets_[a + 1]};
  }

  std::size_t bond_count(std::size_t a) const { return neighbors(a).size(); }
  std::size_t pair_count(std::size_t a) const { return pairs(a).size(); }
  std::size_t triplet_count(std::size_t a) const { return 6 * triplets(a).size(); }

  std::size_t total_bonds() const { return bonds_.size(); }
  std::size_t total_pairs() const { return pairs_.size(); }
  std::size_t total_triplets() const { return 6 * triplets_.size(); }

  bool has_volumes() const { return !neighborhood_volume_.empty(); }
  double neighborhood_volume(std::size_t a) const { return neighborhood_volume_[a]; }
  double v1(std::size_t a) const { return v1_[a]; }
  double v2(std::size_t a) const { return v2_[a]; }
  double v3(std::size_t a) const { return v3_[a]; }

  /// Removes one stored ordered pair of point `a` without touching counts
  /// used for the effective volumes. Only meant for corrupting fixtures.
  void erase_pair_for_testing(std::size_t a, std::size_t index);

 private:
  friend NeighborTable build_neighbor_table(const PointCloud&, const NeighborOptions&);
  friend NeighborTable compute_effective_volumes(const PointCloud&, NeighborTable);

  double horizon_ = 0.0;
  InteractionFlags enabled_;
  std::vector<std::size_t> bond_offsets_;
  std::vector<PointId> bonds_;
  std::vector<std::size_t> pair_offsets_;
  std::vector<Pair> pairs_;
  std::vector<std::size_t> triplet_offsets_;
  std::vector<Triplet> triplets_;
  std::vector<double> neighborhood_volume_;
  std::vector<double> v1_;
  std::vector<double> v2_;
  std::vector<double> v3_;
};

/// Fixed-radius search over a uniform cell list with cells of edge `horizon`.
/// Returns ascending neighbour ids per point (self excluded).
std::vector<std::vector<PointId>> find_neighbors(std::span<const Vec3> positions, double horizon);

/// True when |p - q| <= horizon, with a relative slack of 1e-10 so lattice
/// points sitting exactly on the horizon are consistently included.
bool within_horizon(const Vec3& p, const Vec3& q, double horizon);

NeighborTable build_neighbor_table(const PointCloud& cloud, const NeighborOptions& options);

/// V_H as the sum of neighbour volumes; V1 = V_H/#N1, V2 = V_H^2/#N2,
/// V3 = V_H^3/#N3. Quantities of disabled interactions stay zero.
NeighborTable compute_effective_volumes(const PointCloud& cloud, NeighborTable table);

/// build_neighbor_table followed by compute_effective_volumes.
NeighborTable make_neighbor_table(const PointCloud& cloud, const NeighborOptions& options);

struct QuadratureCheck {
  std::size_t point = 0;
  Interaction kind = Interaction::one;
  double lhs = 0.0;
  double rhs = 0.0;
  double rel_err = 0.0;
};

struct QuadratureReport {
  std::vector<QuadratureCheck> checks;
  double max_rel_err[3] = {0.0, 0.0, 0.0};

  double max_rel_err_of(Interaction kind) const { return max_rel_err[static_cast<int>(kind) - 1]; }
};

/// Sums the effective volumes over the stored sets of every point and
/// compares them with V_H, V_H^2 and V_H^3.
QuadratureReport quadrature_fidelity_report(const NeighborTable& table);
void write_quadrature_report_csv(std::ostream& out, const QuadratureReport& report);

}  // namespace cpd
