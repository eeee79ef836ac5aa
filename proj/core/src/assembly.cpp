#include "cpd/assembly.hpp"

#include <sstream>

#include "cpd/error.hpp"

namespace cpd {

State State::reference(const PointCloud& cloud) {
  State s;
  s.x = cloud.positions;
  s.prescribed.assign(3 * cloud.size(), 0);
  s.prescribed_value.assign(3 * cloud.size(), 0.0);
  return s;
}

void State::prescribe(std::size_t d, double value) {
  prescribed.at(d) = 1;
  prescribed_value[d] = value;
}

void State::release(std::size_t d) {
  prescribed.at(d) = 0;
  prescribed_value[d] = 0.0;
}

void State::apply_prescribed() {
  for (std::size_t d = 0; d < dofs(); ++d) {
    if (prescribed[d]) dof(d) = prescribed_value[d];
  }
}

std::vector<long> State::free_index(std::size_t* n_free) const {
  std::vector<long> idx(dofs(), -1);
  long next = 0;
  for (std::size_t d = 0; d < dofs(); ++d) {
    if (!prescribed[d]) idx[d] = next++;
  }
  if (n_free) *n_free = static_cast<std::size_t>(next);
  return idx;
}

namespace {

struct Selection {
  bool one = true;
  bool two = true;
  bool three = true;
};

constexpr std::array<std::array<int, 3>, 6> kPermutations{
    {{0, 1, 2}, {0, 2, 1}, {1, 0, 2}, {1, 2, 0}, {2, 0, 1}, {2, 1, 0}}};

/// Per-centre accumulation of bond-space gradients and Hessians, scattered
/// to the global system once the centre is finished.
class Local {
 public:
  Local(std::size_t n, AssemblyMode mode, bool with_tangent)
      : mode_(mode), with_tangent_(with_tangent), local_of_(n, -1) {}

  void begin(std::span<const PointId> nb) {
    nb_ = nb;
    const std::size_t m = nb.size();
    for (std::size_t p = 0; p < m; ++p) local_of_[nb[p]] = static_cast<int>(p);
    g_.assign(m, Vec3::Zero());
    if (!with_tangent_) return;
    if (mode_ == AssemblyMode::collocation) {
      col_.assign(m, Mat3::Zero());
    } else {
      H_.assign(m * m, Mat3::Zero());
      hot_.assign(m * m, 0);
    }
  }

  int local(PointId global) const { return local_of_[global]; }

  void add_g(int r, const Vec3& v) { g_[r] += v; }

  void add_h(int r, int s, const Mat3& h) {
    if (mode_ == AssemblyMode::collocation) {
      col_[s] += h;
    } else {
      const std::size_t k = static_cast<std::size_t>(r) * nb_.size() + static_cast<std::size_t>(s);
      H_[k] += h;
      hot_[k] = 1;
    }
  }

  void finish(std::size_t a, Eigen::VectorXd* R, BlockCsr* K) {
    const std::size_t m = nb_.size();
    if (R) {
      Vec3 sum = Vec3::Zero();
      for (std::size_t r = 0; r < m; ++r) sum += g_[r];
      if (mode_ == AssemblyMode::collocation) {
        R->segment<3>(3 * static_cast<Eigen::Index>(a)) += sum;
      } else {
        for (std::size_t r = 0; r < m; ++r) R->segment<3>(3 * static_cast<Eigen::Index>(nb_[r])) += g_[r];
        R->segment<3>(3 * static_cast<Eigen::Index>(a)) -= sum;
      }
    }
    if (K && with_tangent_) {
      if (mode_ == AssemblyMode::collocation) {
        Mat3 diag = Mat3::Zero();
        for (std::size_t s = 0; s < m; ++s) {
          diag -= col_[s];
          K->block(K->find(a, nb_[s])) += col_[s];
        }
        K->block(K->diagonal(a)) += diag;
      } else {
        Mat3 total = Mat3::Zero();
        row_sum_.assign(m, Mat3::Zero());
        col_sum_.assign(m, Mat3::Zero());
        for (std::size_t r = 0; r < m; ++r) {
          for (std::size_t s = 0; s < m; ++s) {
            const std::size_t k = r * m + s;
            if (!hot_[k]) continue;
            const Mat3& h = H_[k];
            row_sum_[r] += h;
            col_sum_[s] += h;
            K->block(K->find(nb_[r], nb_[s])) += h;
          }
        }
        for (std::size_t r = 0; r < m; ++r) {
          total += row_sum_[r];
          K->block(K->find(a, nb_[r])) -= col_sum_[r];
          K->block(K->find(nb_[r], a)) -= row_sum_[r];
        }
        K->block(K->diagonal(a)) += total;
      }
    }
    for (PointId i : nb_) local_of_[i] = -1;
  }

 private:
  AssemblyMode mode_;
  bool with_tangent_;
  std::vector<int> local_of_;
  std::span<const PointId> nb_;
  std::vector<Vec3> g_;
  std::vector<Mat3> col_;
  std::vector<Mat3> H_;
  std::vector<char> hot_;
  std::vector<Mat3> row_sum_;
  std::vector<Mat3> col_sum_;
};

void check_table(const NeighborTable& table, const Material& mat, std::size_t n) {
  if (table.size() != n) throw Error(ErrorCode::invalid_argument, "neighbour table does not match the cloud");
  if (!table.has_volumes()) throw Error(ErrorCode::invalid_argument, "effective volumes have not been computed");
  if (mat.enabled.two && !table.enabled().two) {
    throw Error(ErrorCode::invalid_argument, "two-neighbour interactions enabled without stored pairs");
  }
  if (mat.enabled.three && !table.enabled().three) {
    throw Error(ErrorCode::invalid_argument, "three-neighbour interactions enabled without stored triplets");
  }
}

std::string describe(std::size_t a, const std::array<PointId, 3>& ids, int count) {
  std::ostringstream s;
  s << " at point " << a << " with neighbours (";
  for (int k = 0; k < count; ++k) s << (k ? "," : "") << ids[k];
  s << ')';
  return s.str();
}

void assemble_impl(const PointCloud& cloud, const NeighborTable& table, std::span<const Vec3> x,
                   const Material& mat, const AssemblyOptions& opt, Selection sel, Eigen::VectorXd* R,
                   BlockCsr* K, double* energy) {
  const std::size_t n = cloud.size();
  if (x.size() != n) throw Error(ErrorCode::invalid_argument, "state size does not match the cloud");
  check_table(table, mat, n);

  const bool with_tangent = K != nullptr;
  const bool collocation = opt.mode == AssemblyMode::collocation;
  const bool ordered = opt.enumeration == Enumeration::ordered;
  const bool do_one = sel.one && mat.enabled.one && mat.c1 != 0.0;
  const bool do_two = sel.two && mat.enabled.two && mat.c2 != 0.0;
  const bool do_three = sel.three && mat.enabled.three && mat.c3 != 0.0;

  if (R) R->setZero(3 * static_cast<Eigen::Index>(n));
  if (K) {
    if (K->block_rows() != n) *K = BlockCsr::from_table(table);
    K->set_zero();
  }
  double total = 0.0;

  const auto& X = cloud.positions;
  Local loc(n, opt.mode, with_tangent);
  std::array<PointId, 3> cur{0, 0, 0};
  int cur_count = 0;

  for (std::size_t a = 0; a < n; ++a) {
    const double va = cloud.volumes[a];
    const Vec3& xa = x[a];
    const Vec3& Xa = X[a];
    loc.begin(table.neighbors(a));
    double e_one = 0.0, e_two = 0.0, e_three = 0.0;

    try {
      if (do_one) {
        const double w = collocation ? table.v1(a) : 0.5 * va * table.v1(a);
        cur_count = 1;
        for (PointId i : table.neighbors(a)) {
          cur[0] = i;
          const BondKernel k = bond_kernel(x[i] - xa, (X[i] - Xa).norm(), mat.c1, with_tangent);
          e_one += k.psi;
          const int li = loc.local(i);
          loc.add_g(li, w * k.gradient);
          if (with_tangent) loc.add_h(li, li, w * k.hessian);
        }
      }

      if (do_two) {
        const double v2 = table.v2(a);
        cur_count = 2;
        for (const auto& pr : table.pairs(a)) {
          if (!ordered && pr[0] > pr[1]) continue;
          cur[0] = pr[0];
          cur[1] = pr[1];
          const Vec3 xi1 = x[pr[0]] - xa;
          const Vec3 xi2 = x[pr[1]] - xa;
          const double A = (X[pr[0]] - Xa).cross(X[pr[1]] - Xa).norm();
          const int l1 = loc.local(pr[0]);
          const int l2 = loc.local(pr[1]);
          const bool full = !(collocation && ordered);
          const PairKernel k = pair_kernel(xi1, xi2, A, mat.c2, with_tangent && full);
          e_two += ordered ? k.psi : 2.0 * k.psi;
          if (!full) {
            const double w = 2.0 * v2;
            loc.add_g(l1, w * k.gradient[0]);
            if (with_tangent) {
              const PairTangentTerms t = pair_tangent_terms(xi1, xi2, A);
              loc.add_h(l1, l1, (w * mat.c2) * t.ib);
              loc.add_h(l1, l2, (w * mat.c2) * t.jb);
            }
            continue;
          }
          const double w = collocation ? 2.0 * v2 : (ordered ? 1.0 / 3.0 : 2.0 / 3.0) * va * v2;
          const std::array<int, 2> l{l1, l2};
          for (int r = 0; r < 2; ++r) {
            loc.add_g(l[r], w * k.gradient[r]);
            if (with_tangent) {
              for (int s = 0; s < 2; ++s) loc.add_h(l[r], l[s], w * k.hessian[r][s]);
            }
          }
        }
      }

      if (do_three) {
        const double v3 = table.v3(a);
        cur_count = 3;
        for (const auto& tr : table.triplets(a)) {
          cur = tr;
          const std::array<Vec3, 3> xi{x[tr[0]] - xa, x[tr[1]] - xa, x[tr[2]] - xa};
          const double V = std::abs((X[tr[0]] - Xa).cross(X[tr[1]] - Xa).dot(X[tr[2]] - Xa));
          const std::array<int, 3> l{loc.local(tr[0]), loc.local(tr[1]), loc.local(tr[2])};
          if (!ordered) {
            const TripletKernel k = triplet_kernel(xi[0], xi[1], xi[2], V, mat.c3, with_tangent);
            e_three += 6.0 * k.psi;
            const double w = collocation ? 6.0 * v3 : 1.5 * va * v3;
            for (int r = 0; r < 3; ++r) {
              loc.add_g(l[r], w * k.gradient[r]);
              if (with_tangent) {
                for (int s = 0; s < 3; ++s) loc.add_h(l[r], l[s], w * k.hessian[r][s]);
              }
            }
            continue;
          }
          for (const auto& p : kPermutations) {
            const Vec3& q1 = xi[p[0]];
            const Vec3& q2 = xi[p[1]];
            const Vec3& q3 = xi[p[2]];
            const std::array<int, 3> lp{l[p[0]], l[p[1]], l[p[2]]};
            if (collocation) {
              const TripletKernel k = triplet_kernel(q1, q2, q3, V, mat.c3, false);
              e_three += k.psi;
              const double w = 3.0 * v3;
              loc.add_g(lp[0], w * k.gradient[0]);
              if (with_tangent) {
                const TripletTangentTerms t = triplet_tangent_terms(q1, q2, q3, V);
                loc.add_h(lp[0], lp[0], (w * mat.c3) * t.ib);
                loc.add_h(lp[0], lp[1], (w * mat.c3) * t.jb);
                loc.add_h(lp[0], lp[2], (w * mat.c3) * t.kb);
              }
            } else {
              const TripletKernel k = triplet_kernel(q1, q2, q3, V, mat.c3, with_tangent);
              e_three += k.psi;
              const double w = 0.25 * va * v3;
              for (int r = 0; r < 3; ++r) {
                loc.add_g(lp[r], w * k.gradient[r]);
                if (with_tangent) {
                  for (int s = 0; s < 3; ++s) loc.add_h(lp[r], lp[s], w * k.hessian[r][s]);
                }
              }
            }
          }
        }
      }
    } catch (const Error& e) {
      throw Error(e.code(), e.detail() + describe(a, cur, cur_count), a);
    }

    loc.finish(a, R, K);
    total += va * (0.5 * table.v1(a) * e_one + table.v2(a) * e_two / 3.0 + 0.25 * table.v3(a) * e_three);
  }
  if (energy) *energy = total;
}

}  // namespace

double total_energy(const PointCloud& cloud, const NeighborTable& table, std::span<const Vec3> x,
                    const Material& mat, Enumeration enumeration) {
  double e = 0.0;
  AssemblyOptions opt;
  opt.enumeration = enumeration;
  assemble_impl(cloud, table, x, mat, opt, {}, nullptr, nullptr, &e);
  return e;
}

Eigen::VectorXd assemble_residual(const PointCloud& cloud, const NeighborTable& table, std::span<const Vec3> x,
                                  const Material& mat, const AssemblyOptions& options) {
  Eigen::VectorXd R;
  assemble_impl(cloud, table, x, mat, options, {}, &R, nullptr, nullptr);
  return R;
}

Eigen::VectorXd assemble_residual_of(Interaction kind, const PointCloud& cloud, const NeighborTable& table,
                                     std::span<const Vec3> x, const Material& mat,
                                     const AssemblyOptions& options) {
  Selection sel{kind == Interaction::one, kind == Interaction::two, kind == Interaction::three};
  Eigen::VectorXd R;
  assemble_impl(cloud, table, x, mat, options, sel, &R, nullptr, nullptr);
  return R;
}

BlockCsr assemble_tangent(const PointCloud& cloud, const NeighborTable& table, std::span<const Vec3> x,
                          const Material& mat, const AssemblyOptions& options) {
  BlockCsr K;
  assemble_impl(cloud, table, x, mat, options, {}, nullptr, &K, nullptr);
  return K;
}

void assemble(const PointCloud& cloud, const NeighborTable& table, std::span<const Vec3> x, const Material& mat,
              const AssemblyOptions& options, bool with_tangent, AssembledSystem& system) {
  assemble_impl(cloud, table, x, mat, options, {}, &system.R, with_tangent ? &system.K : nullptr,
                &system.energy);
  system.has_tangent = with_tangent;
}

AssembledSystem assemble(const PointCloud& cloud, const NeighborTable& table, std::span<const Vec3> x,
                         const Material& mat, const AssemblyOptions& options, bool with_tangent) {
  AssembledSystem s;
  assemble(cloud, table, x, mat, options, with_tangent, s);
  return s;
}

}  // namespace cpd
