#pragma once
// Axisymmetric P1 finite elements for the azimuthal eddy-current equation.
// The unknown is the azimuthal field component u; the weak form on the
// meridian half-plane reads
//
//   a(u,v) = Int (1/(mu r)) grad(r u) . grad(r conj v) - i w Int sigma u conj(v) r,
//
// with u = 0 on the symmetry axis and on the truncation boundary. The matrix
// is complex symmetric (not Hermitian), so the solver is sparse LU.
//
// Incident fields come in two flavours: an extended coil carried by the load
// functional i w J Int_coil conj(v) r, and an idealized point source handled
// by splitting off the free-space kernel, u0 = c Phi + w with c the local
// permeability, which leaves a regular remainder w the mesh can represent.

#include <Eigen/Sparse>

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "eclsm/green.hpp"
#include "eclsm/materials.hpp"
#include "eclsm/mesh.hpp"
#include "eclsm/quadrature.hpp"

namespace eclsm {

using Complex = std::complex<double>;
using SparseMatrixXcd = Eigen::SparseMatrix<Complex>;

struct ComplexField {
  const Mesh* mesh = nullptr;
  Eigen::VectorXcd values;  // one entry per vertex

  Complex evaluate(Point2 p) const {
    const MeshLocation loc = mesh->locate(p);
    const auto& tri = mesh->triangles[loc.triangle];
    return loc.bary[0] * values[tri[0]] + loc.bary[1] * values[tri[1]] +
           loc.bary[2] * values[tri[2]];
  }
};

struct PointSource {
  Point2 x0;
};

struct CoilSource {
  Point2 center;
  double width = 0.0;   // radial extent [m]
  double height = 0.0;  // axial extent [m]
  double current_density = 1.0;  // [A/m^2]
};

using SourceSpec = std::variant<PointSource, CoilSource>;

namespace detail {

struct TriGeometry {
  Point2 p[3];
  double area;
  double grad_r[3], grad_z[3];  // constant P1 basis gradients
};

inline TriGeometry tri_geometry(const Mesh& mesh, int t) {
  TriGeometry g;
  const auto& tri = mesh.triangles[t];
  for (int i = 0; i < 3; ++i) g.p[i] = mesh.vertices[tri[i]];
  const double det = (g.p[1].r - g.p[0].r) * (g.p[2].z - g.p[0].z) -
                     (g.p[2].r - g.p[0].r) * (g.p[1].z - g.p[0].z);
  g.area = 0.5 * det;
  for (int i = 0; i < 3; ++i) {
    const Point2 a = g.p[(i + 1) % 3], b = g.p[(i + 2) % 3];
    g.grad_r[i] = (a.z - b.z) / det;
    g.grad_z[i] = (b.r - a.r) / det;
  }
  return g;
}

inline bool touches_axis(const TriGeometry& g) {
  return g.p[0].r == 0.0 || g.p[1].r == 0.0 || g.p[2].r == 0.0;
}

// Runs fn(l1,l2,l3,weight) over the degree-4 rule, optionally after `levels`
// uniform refinements of the element. Refinement is used next to the axis,
// where the 1/r factor in the integrand is bounded but not polynomial.
template <class F>
inline void for_each_quad_point(int levels, F&& fn) {
  using Bary = std::array<double, 3>;
  struct Frame {
    Bary c[3];
    int level;
  };
  std::vector<Frame> stack;
  stack.push_back({{Bary{1, 0, 0}, Bary{0, 1, 0}, Bary{0, 0, 1}}, 0});
  const double leaf_scale = std::pow(0.25, levels);
  while (!stack.empty()) {
    Frame f = stack.back();
    stack.pop_back();
    if (f.level < levels) {
      auto mid = [](const Bary& a, const Bary& b) {
        return Bary{0.5 * (a[0] + b[0]), 0.5 * (a[1] + b[1]), 0.5 * (a[2] + b[2])};
      };
      const Bary m01 = mid(f.c[0], f.c[1]), m12 = mid(f.c[1], f.c[2]), m20 = mid(f.c[2], f.c[0]);
      stack.push_back({{f.c[0], m01, m20}, f.level + 1});
      stack.push_back({{m01, f.c[1], m12}, f.level + 1});
      stack.push_back({{m20, m12, f.c[2]}, f.level + 1});
      stack.push_back({{m01, m12, m20}, f.level + 1});
      continue;
    }
    for (const TriQuadPoint& q : tri_rule_deg4()) {
      const double l1 = q.l1 * f.c[0][0] + q.l2 * f.c[1][0] + q.l3 * f.c[2][0];
      const double l2 = q.l1 * f.c[0][1] + q.l2 * f.c[1][1] + q.l3 * f.c[2][1];
      const double l3 = 1.0 - l1 - l2;
      fn(l1, l2, l3, q.w * leaf_scale);
    }
  }
}

inline int axis_refine_levels(const TriGeometry& g) { return touches_axis(g) ? 3 : 0; }

}  // namespace detail

// Assembled stiffness-plus-mass operator for one mesh, one material
// configuration and one angular frequency. Dirichlet rows (axis and outer
// truncation boundary) are eliminated; the free-free block and the coupling
// to constrained vertices are kept so lifted boundary data can be applied.
class FemSystem {
 public:
  FemSystem(const Mesh& mesh, MaterialField materials, double omega)
      : mesh_(&mesh), materials_(std::move(materials)), omega_(omega) {
    if (materials_.mesh != mesh_)
      throw std::invalid_argument("FemSystem: material field belongs to a different mesh");
    if (!(omega > 0.0)) throw std::invalid_argument("FemSystem: omega must be positive");
    build_index_maps();
    assemble();
  }

  const Mesh& mesh() const { return *mesh_; }
  const MaterialField& materials() const { return materials_; }
  double omega() const { return omega_; }
  int n_free() const { return n_free_; }
  const SparseMatrixXcd& matrix() const { return a_ff_; }

  // Free-dof restriction of a full-length nodal vector.
  Eigen::VectorXcd restrict_free(const Eigen::VectorXcd& full) const {
    Eigen::VectorXcd out(n_free_);
    for (int v = 0; v < mesh_->n_vertices(); ++v)
      if (free_of_vertex_[v] >= 0) out[free_of_vertex_[v]] = full[v];
    return out;
  }

  // Solves a(u, phi_i) = load[i] for all free vertices. `dirichlet`, when
  // present, prescribes values at constrained vertices (axis and outer);
  // otherwise they are zero. The direct solve is verified a posteriori.
  ComplexField solve(const Eigen::VectorXcd& load,
                     const Eigen::VectorXcd* dirichlet = nullptr) const {
    const int nv = mesh_->n_vertices();
    if (load.size() != nv)
      throw std::invalid_argument("FemSystem::solve: load vector has wrong length");
    Eigen::VectorXcd b = restrict_free(load);
    Eigen::VectorXcd g_c;
    if (dirichlet) {
      if (dirichlet->size() != nv)
        throw std::invalid_argument("FemSystem::solve: dirichlet vector has wrong length");
      g_c.resize(n_constrained_);
      for (int v = 0; v < nv; ++v)
        if (free_of_vertex_[v] < 0) g_c[constrained_of_vertex_[v]] = (*dirichlet)[v];
      b -= a_fc_ * g_c;
    }

    ComplexField field;
    field.mesh = mesh_;
    field.values = Eigen::VectorXcd::Zero(nv);
    if (dirichlet)
      for (int v = 0; v < nv; ++v)
        if (free_of_vertex_[v] < 0) field.values[v] = (*dirichlet)[v];

    const double bnorm = b.norm();
    if (bnorm == 0.0) return field;  // zero data, zero solution

    factorize();
    const Eigen::VectorXcd x = lu_->solve(b);
    if (lu_->info() != Eigen::Success)
      throw std::runtime_error("FemSystem::solve: sparse LU backsolve failed");
    const double residual = (a_ff_ * x - b).norm() / bnorm;
    if (!(residual < 1e-10))
      throw std::runtime_error(
          "FemSystem::solve: relative residual " + std::to_string(residual) +
          " exceeds 1e-10; system is near-singular (|x|/|b| = " +
          std::to_string(x.norm() / bnorm) + ")");

    for (int v = 0; v < nv; ++v)
      if (free_of_vertex_[v] >= 0) field.values[v] = x[free_of_vertex_[v]];
    return field;
  }

  bool is_free(int vertex) const { return free_of_vertex_[vertex] >= 0; }

 private:
  void build_index_maps() {
    const int nv = mesh_->n_vertices();
    free_of_vertex_.assign(nv, -1);
    constrained_of_vertex_.assign(nv, -1);
    n_free_ = 0;
    n_constrained_ = 0;
    for (int v = 0; v < nv; ++v) {
      if (mesh_->boundary_flags[v] == BoundaryFlag::Interior)
        free_of_vertex_[v] = n_free_++;
      else
        constrained_of_vertex_[v] = n_constrained_++;
    }
    if (n_free_ == 0) throw std::invalid_argument("FemSystem: mesh has no interior vertices");
  }

  void assemble() {
    // Element matrices are symmetric; entries are kept as unordered pairs and
    // accumulated in deterministic order, then mirrored. This makes the
    // assembled matrix symmetric exactly, not just up to summation roundoff.
    struct Entry {
      int i, j;
      Complex v;
    };
    std::vector<Entry> ff;
    std::vector<Eigen::Triplet<Complex>> fc;
    ff.reserve(static_cast<std::size_t>(mesh_->n_triangles()) * 6);
    const Complex iw(0.0, omega_);
    for (int t = 0; t < mesh_->n_triangles(); ++t) {
      const auto geom = detail::tri_geometry(*mesh_, t);
      const double inv_mu = 1.0 / materials_.mu[t];
      const double sigma = materials_.sigma[t];
      Complex ke[3][3] = {};
      detail::for_each_quad_point(detail::axis_refine_levels(geom), [&](double l1, double l2,
                                                                        double l3, double w) {
        const double l[3] = {l1, l2, l3};
        const double rq = l1 * geom.p[0].r + l2 * geom.p[1].r + l3 * geom.p[2].r;
        const double wa = w * geom.area;
        double gr[3], gz[3];
        for (int i = 0; i < 3; ++i) {
          // grad(r phi_i) = (phi_i + r d_r phi_i, r d_z phi_i)
          gr[i] = l[i] + rq * geom.grad_r[i];
          gz[i] = rq * geom.grad_z[i];
        }
        for (int i = 0; i < 3; ++i)
          for (int j = i; j < 3; ++j) {
            const double stiff = inv_mu * (gr[i] * gr[j] + gz[i] * gz[j]) / rq;
            ke[i][j] += wa * (stiff - iw * (sigma * l[i] * l[j] * rq));
          }
      });
      const auto& tri = mesh_->triangles[t];
      for (int i = 0; i < 3; ++i)
        for (int j = i; j < 3; ++j) {
          const int vi = tri[i], vj = tri[j];
          const int fi = free_of_vertex_[vi], fj = free_of_vertex_[vj];
          if (fi >= 0 && fj >= 0) {
            ff.push_back({std::min(fi, fj), std::max(fi, fj), ke[i][j]});
          } else if (fi >= 0) {
            fc.emplace_back(fi, constrained_of_vertex_[vj], ke[i][j]);
          } else if (fj >= 0) {
            fc.emplace_back(fj, constrained_of_vertex_[vi], ke[i][j]);
          }
        }
    }
    std::stable_sort(ff.begin(), ff.end(),
                     [](const Entry& a, const Entry& b) {
                       return a.i != b.i ? a.i < b.i : a.j < b.j;
                     });
    std::vector<Eigen::Triplet<Complex>> unique;
    unique.reserve(ff.size() * 2);
    for (std::size_t k = 0; k < ff.size();) {
      Complex sum = 0.0;
      const int i = ff[k].i, j = ff[k].j;
      for (; k < ff.size() && ff[k].i == i && ff[k].j == j; ++k) sum += ff[k].v;
      unique.emplace_back(i, j, sum);
      if (i != j) unique.emplace_back(j, i, sum);
    }
    a_ff_.resize(n_free_, n_free_);
    a_ff_.setFromTriplets(unique.begin(), unique.end());
    a_fc_.resize(n_free_, n_constrained_);
    a_fc_.setFromTriplets(fc.begin(), fc.end());
  }

  void factorize() const {
    if (lu_) return;
    lu_.emplace();
    lu_->compute(a_ff_);
    if (lu_->info() != Eigen::Success)
      throw std::runtime_error("FemSystem: sparse LU factorization failed (singular operator)");
  }

  const Mesh* mesh_;
  MaterialField materials_;
  double omega_;
  int n_free_ = 0, n_constrained_ = 0;
  std::vector<int> free_of_vertex_, constrained_of_vertex_;
  SparseMatrixXcd a_ff_, a_fc_;
  mutable std::optional<Eigen::SparseLU<SparseMatrixXcd>> lu_;
};

// Load functional of an extended coil: i w J Int_coil phi_i r. Each triangle
// is clipped against the coil rectangle (Sutherland-Hodgman) and the clipped
// polygon integrated exactly; phi_i r is quadratic, so a degree-2 rule on the
// fan triangulation suffices. This keeps the load consistent on meshes whose
// lines do not align with the coil.
inline Eigen::VectorXcd assemble_coil_load(const Mesh& mesh, double omega,
                                           const CoilSource& coil) {
  if (!(coil.width > 0.0) || !(coil.height > 0.0))
    throw std::invalid_argument("coil load: width and height must be positive");
  const double r_lo = coil.center.r - 0.5 * coil.width;
  const double r_hi = coil.center.r + 0.5 * coil.width;
  const double z_lo = coil.center.z - 0.5 * coil.height;
  const double z_hi = coil.center.z + 0.5 * coil.height;
  if (r_lo <= 0.0) throw std::invalid_argument("coil load: coil crosses the symmetry axis");

  Eigen::VectorXcd b = Eigen::VectorXcd::Zero(mesh.n_vertices());
  const Complex iwj(0.0, omega * coil.current_density);

  using Poly = std::vector<Point2>;
  // keep(p) >= 0 inside; clips the polygon against one rectangle side
  auto clip_side = [](const Poly& in, auto&& keep) {
    Poly out;
    const std::size_t n = in.size();
    for (std::size_t i = 0; i < n; ++i) {
      const Point2 a = in[i], c = in[(i + 1) % n];
      const double da = keep(a), dc = keep(c);
      if (da >= 0.0) out.push_back(a);
      if ((da >= 0.0) != (dc >= 0.0)) {
        const double s = da / (da - dc);
        out.push_back({a.r + s * (c.r - a.r), a.z + s * (c.z - a.z)});
      }
    }
    return out;
  };

  for (int t = 0; t < mesh.n_triangles(); ++t) {
    const auto geom = detail::tri_geometry(mesh, t);
    // cheap bounding-box rejection
    const double tr_lo = std::min({geom.p[0].r, geom.p[1].r, geom.p[2].r});
    const double tr_hi = std::max({geom.p[0].r, geom.p[1].r, geom.p[2].r});
    const double tz_lo = std::min({geom.p[0].z, geom.p[1].z, geom.p[2].z});
    const double tz_hi = std::max({geom.p[0].z, geom.p[1].z, geom.p[2].z});
    if (tr_hi <= r_lo || tr_lo >= r_hi || tz_hi <= z_lo || tz_lo >= z_hi) continue;

    Poly poly = {geom.p[0], geom.p[1], geom.p[2]};
    poly = clip_side(poly, [&](Point2 p) { return p.r - r_lo; });
    if (poly.size() >= 3) poly = clip_side(poly, [&](Point2 p) { return r_hi - p.r; });
    if (poly.size() >= 3) poly = clip_side(poly, [&](Point2 p) { return p.z - z_lo; });
    if (poly.size() >= 3) poly = clip_side(poly, [&](Point2 p) { return z_hi - p.z; });
    if (poly.size() < 3) continue;

    const auto& tri = mesh.triangles[t];
    for (std::size_t k = 1; k + 1 < poly.size(); ++k) {
      const Point2 q0 = poly[0], q1 = poly[k], q2 = poly[k + 1];
      const double sub_area =
          0.5 * ((q1.r - q0.r) * (q2.z - q0.z) - (q2.r - q0.r) * (q1.z - q0.z));
      if (sub_area <= 0.0) continue;
      for (const TriQuadPoint& qp : tri_rule_deg2()) {
        const Point2 xq = map_barycentric(q0, q1, q2, qp);
        // barycentric coordinates of xq in the parent triangle
        double l[3];
        for (int i = 0; i < 3; ++i)
          l[i] = 1.0 / 3.0 + geom.grad_r[i] * (xq.r - (geom.p[0].r + geom.p[1].r + geom.p[2].r) / 3.0) +
                 geom.grad_z[i] * (xq.z - (geom.p[0].z + geom.p[1].z + geom.p[2].z) / 3.0);
        for (int i = 0; i < 3; ++i) b[tri[i]] += iwj * (qp.w * sub_area * l[i] * xq.r);
      }
    }
  }
  return b;
}

// Load functional of the regular remainder w in the point-source split
// u0 = c Phi + w, c = mu at the source:
//
//   l(v) = Int (1/r) (1 - c/mu) grad(r Phi) . grad(r conj v)
//        + i w c Int sigma Phi conj(v) r.
//
// Both integrands vanish wherever the medium matches the source location
// (vacuum), so only tube and deposit triangles contribute.
inline Eigen::VectorXcd assemble_point_remainder_load(const Mesh& mesh,
                                                      const MaterialField& mat, double omega,
                                                      Point2 x0, double c) {
  Eigen::VectorXcd b = Eigen::VectorXcd::Zero(mesh.n_vertices());
  const Complex iwc(0.0, omega * c);
  for (int t = 0; t < mesh.n_triangles(); ++t) {
    const double contrast = 1.0 - c / mat.mu[t];
    const double sigma = mat.sigma[t];
    if (std::abs(contrast) < 1e-14 && sigma == 0.0) continue;
    const auto geom = detail::tri_geometry(mesh, t);
    const auto& tri = mesh.triangles[t];
    detail::for_each_quad_point(detail::axis_refine_levels(geom), [&](double l1, double l2,
                                                                      double l3, double w) {
      const double l[3] = {l1, l2, l3};
      Point2 xq{l1 * geom.p[0].r + l2 * geom.p[1].r + l3 * geom.p[2].r,
                l1 * geom.p[0].z + l2 * geom.p[1].z + l3 * geom.p[2].z};
      const GreenEval ge = green_gradient(xq, x0);
      const double Gr = ge.value + xq.r * ge.grad_r;  // grad(r Phi)
      const double Gz = xq.r * ge.grad_z;
      const double wa = w * geom.area;
      for (int i = 0; i < 3; ++i) {
        const double gr = l[i] + xq.r * geom.grad_r[i];
        const double gz = xq.r * geom.grad_z[i];
        b[tri[i]] += wa * (contrast * (Gr * gr + Gz * gz) / xq.r) +
                     iwc * (wa * sigma * ge.value * l[i] * xq.r);
      }
    });
  }
  return b;
}

// Incident field of one source in the reference (deposit-free) medium. For a
// point source the struct keeps the split so off-node evaluation can use the
// analytic kernel plus the P1 remainder.
struct IncidentField {
  ComplexField total;
  bool is_point = false;
  Point2 x0{};
  double strength_c = 0.0;  // permeability at the source location
  ComplexField regular;     // remainder w, only for point sources

  Complex eval(Point2 p) const {
    if (!is_point) return total.evaluate(p);
    return strength_c * green_value(p, x0) + regular.evaluate(p);
  }
};

inline IncidentField incident_field(const FemSystem& sys, const SourceSpec& source) {
  const Mesh& mesh = sys.mesh();
  IncidentField out;
  if (const PointSource* ps = std::get_if<PointSource>(&source)) {
    const Point2 x0 = ps->x0;
    const double pad = 1e-12 * std::max(mesh.r_max() - mesh.r_min(), mesh.z_max() - mesh.z_min());
    if (x0.r <= mesh.r_min() + pad || x0.r >= mesh.r_max() - pad || x0.z <= mesh.z_min() + pad ||
        x0.z >= mesh.z_max() - pad)
      throw std::invalid_argument("incident_field: point source on the mesh boundary");
    const MeshLocation loc = mesh.locate(x0);
    if (mesh.region_tags[loc.triangle] == RegionTag::Deposit)
      throw std::invalid_argument("incident_field: point source inside a deposit region");
    const double c = sys.materials().mu[loc.triangle];

    Eigen::VectorXcd phi(mesh.n_vertices());
    for (int v = 0; v < mesh.n_vertices(); ++v) {
      const Point2 p = mesh.vertices[v];
      phi[v] = (p.r == 0.0) ? 0.0 : green_value(p, x0);
    }
    // The remainder w is truncated to zero on the outer boundary like any
    // other solve, so the total keeps the kernel's exact decay out there.
    // Forcing the total itself to zero at the wall would plant an error
    // field of size Phi(r_max) that grows toward the probes.
    const Eigen::VectorXcd load =
        assemble_point_remainder_load(mesh, sys.materials(), sys.omega(), x0, c);
    out.regular = sys.solve(load);
    out.total.mesh = &mesh;
    out.total.values = c * phi + out.regular.values;
    out.is_point = true;
    out.x0 = x0;
    out.strength_c = c;
    return out;
  }

  const CoilSource& coil = std::get<CoilSource>(source);
  // the coil must sit in vacuum, clear of tube and deposits
  const double hw = 0.5 * coil.width, hh = 0.5 * coil.height;
  for (const Point2 corner : {Point2{coil.center.r - hw, coil.center.z - hh},
                              Point2{coil.center.r + hw, coil.center.z - hh},
                              Point2{coil.center.r - hw, coil.center.z + hh},
                              Point2{coil.center.r + hw, coil.center.z + hh}, coil.center}) {
    const MeshLocation loc = mesh.locate(corner);
    if (mesh.region_tags[loc.triangle] != RegionTag::Vacuum)
      throw std::invalid_argument("incident_field: coil overlaps a conductive region");
  }
  const Eigen::VectorXcd load = assemble_coil_load(mesh, sys.omega(), coil);
  out.total = sys.solve(load);
  return out;
}

// Scattered field: the perturbed operator applied to u0 + us must reproduce
// the reference operator applied to u0, which gives the load
//
//   l(v) = Int (1/r) (1/mu_ref - 1/mu_pert) grad(r u0) . grad(r conj v)
//        - i w Int (sigma_ref - sigma_pert) u0 conj(v) r
//
// supported on triangles whose coefficients differ. Using the same quadrature
// as the assembly makes l = (A_ref - A_pert) u0 hold to machine precision.
inline ComplexField scattered_field(const FemSystem& pert_sys, const MaterialField& ref_mat,
                                    const ComplexField& u0) {
  const Mesh& mesh = pert_sys.mesh();
  if (ref_mat.mesh != &mesh || u0.mesh != &mesh)
    throw std::invalid_argument("scattered_field: mesh mismatch between arguments");
  const MaterialField& pert = pert_sys.materials();

  Eigen::VectorXcd b = Eigen::VectorXcd::Zero(mesh.n_vertices());
  const Complex iw(0.0, pert_sys.omega());
  bool any = false;
  for (int t = 0; t < mesh.n_triangles(); ++t) {
    const double dinv_mu = 1.0 / ref_mat.mu[t] - 1.0 / pert.mu[t];
    const double dsigma = ref_mat.sigma[t] - pert.sigma[t];
    if (dinv_mu == 0.0 && dsigma == 0.0) continue;
    any = true;
    const auto geom = detail::tri_geometry(mesh, t);
    const auto& tri = mesh.triangles[t];
    const Complex u[3] = {u0.values[tri[0]], u0.values[tri[1]], u0.values[tri[2]]};
    const Complex du_dr = u[0] * geom.grad_r[0] + u[1] * geom.grad_r[1] + u[2] * geom.grad_r[2];
    const Complex du_dz = u[0] * geom.grad_z[0] + u[1] * geom.grad_z[1] + u[2] * geom.grad_z[2];
    detail::for_each_quad_point(detail::axis_refine_levels(geom), [&](double l1, double l2,
                                                                      double l3, double w) {
      const double l[3] = {l1, l2, l3};
      const double rq = l1 * geom.p[0].r + l2 * geom.p[1].r + l3 * geom.p[2].r;
      const Complex uq = l1 * u[0] + l2 * u[1] + l3 * u[2];
      const Complex Gr = uq + rq * du_dr;  // grad(r u0)
      const Complex Gz = rq * du_dz;
      const double wa = w * geom.area;
      for (int i = 0; i < 3; ++i) {
        const double gr = l[i] + rq * geom.grad_r[i];
        const double gz = rq * geom.grad_z[i];
        b[tri[i]] += wa * (dinv_mu * (Gr * gr + Gz * gz) / rq) -
                     iw * (wa * dsigma * uq * l[i] * rq);
      }
    });
  }
  if (!any) {
    ComplexField zero;
    zero.mesh = &mesh;
    zero.values = Eigen::VectorXcd::Zero(mesh.n_vertices());
    return zero;
  }
  return pert_sys.solve(b);
}

}  // namespace eclsm
