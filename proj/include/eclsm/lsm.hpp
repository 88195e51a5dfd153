#pragma once
// Linear sampling inversion. For every sampling point xi, the probe-space
// system Z g = phi_xi is regularized by Tikhonov filtering in the SVD basis
// with the parameter chosen by Morozov's discrepancy principle,
// |Z g - phi| = delta sigma_1 |g|, where delta is the relative noise level
// and sigma_1 the largest singular value; the indicator 1 / |g| is large
// where xi lies inside the deposit. One SVD serves the whole grid.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <functional>
#include <memory>
#include <stdexcept>
#include <vector>

#include "eclsm/forward.hpp"
#include "eclsm/mesh.hpp"
#include "eclsm/parallel.hpp"
#include "eclsm/synth.hpp"

namespace eclsm {

struct SamplingGrid {
  double r_lo = 0.0, r_hi = 0.0;
  double z_lo = 0.0, z_hi = 0.0;
  int n_r = 0, n_z = 0;

  void validate() const {
    if (!(r_hi > r_lo) || !(z_hi > z_lo))
      throw std::invalid_argument("sampling grid: empty extent");
    if (n_r < 1 || n_z < 1)
      throw std::invalid_argument("sampling grid: need at least one cell per direction");
    if (!(r_lo >= 0.0)) throw std::invalid_argument("sampling grid: r_lo must be nonnegative");
  }

  int size() const { return n_r * n_z; }
  int index(int ir, int iz) const { return iz * n_r + ir; }

  // cell centres
  Point2 point(int ir, int iz) const {
    return {r_lo + (ir + 0.5) * (r_hi - r_lo) / n_r, z_lo + (iz + 0.5) * (z_hi - z_lo) / n_z};
  }
  Point2 point(int idx) const { return point(idx % n_r, idx / n_r); }
};

// Singular value decomposition with relative floor truncation. N stays small
// (at most the probe count), so the one-sided Jacobi algorithm is fine and
// the most accurate option.
struct SvdData {
  Eigen::MatrixXcd u, v;
  Eigen::VectorXd s;  // kept singular values, descending

  static SvdData decompose(const Eigen::MatrixXcd& z, double rel_floor = 1e-14) {
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(z, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Eigen::VectorXd& sv = svd.singularValues();
    if (sv.size() == 0 || !(sv[0] > 0.0))
      throw std::runtime_error("svd: matrix is exactly zero, no scattering data");
    int rank = 0;
    while (rank < sv.size() && sv[rank] >= rel_floor * sv[0]) ++rank;
    SvdData out;
    out.u = svd.matrixU().leftCols(rank);
    out.v = svd.matrixV().leftCols(rank);
    out.s = sv.head(rank);
    return out;
  }

  int rank() const { return static_cast<int>(s.size()); }
};

// g = sum_k s_k / (s_k^2 + eps) <u_k, phi> v_k
inline Eigen::VectorXcd tikhonov_solve(const SvdData& svd, const Eigen::VectorXcd& phi,
                                       double eps) {
  if (!(eps > 0.0)) throw std::invalid_argument("tikhonov_solve: eps must be positive");
  const Eigen::VectorXcd c = svd.u.adjoint() * phi;
  Eigen::VectorXcd filtered(svd.rank());
  for (int k = 0; k < svd.rank(); ++k)
    filtered[k] = svd.s[k] / (svd.s[k] * svd.s[k] + eps) * c[k];
  return svd.v * filtered;
}

struct MorozovResult {
  double epsilon = 0.0;
  int bracket_flag = 0;  // -1 pinned at lower bracket, +1 at upper, 0 interior root
};

// Root of f(eps) = |Z g_eps - phi|^2 - delta^2 |g_eps|^2, which is strictly
// increasing in eps. Expressed through the SVD the two norms are filter-factor
// sums, so each evaluation is O(rank). The bracket is fixed in units of the
// largest singular value squared, making the search scale invariant; hitting
// a bracket end is reported, not fatal.
inline MorozovResult morozov_epsilon(const SvdData& svd, const Eigen::VectorXcd& phi,
                                     double delta) {
  if (!(delta > 0.0)) throw std::invalid_argument("morozov_epsilon: delta must be positive");
  const Eigen::VectorXcd c = svd.u.adjoint() * phi;
  Eigen::VectorXd c2(svd.rank());
  for (int k = 0; k < svd.rank(); ++k) c2[k] = std::norm(c[k]);
  const double phi_perp2 = std::max(0.0, phi.squaredNorm() - c2.sum());
  const double d2 = delta * delta;

  auto f = [&](double eps) {
    double mismatch = 0.0, gnorm2 = 0.0;
    for (int k = 0; k < svd.rank(); ++k) {
      const double den = svd.s[k] * svd.s[k] + eps;
      mismatch += c2[k] * (eps / den) * (eps / den);
      gnorm2 += c2[k] * (svd.s[k] / den) * (svd.s[k] / den);
    }
    return mismatch + phi_perp2 - d2 * gnorm2;
  };

  const double s1sq = svd.s[0] * svd.s[0];
  double lo = 1e-16 * s1sq, hi = 1e4 * s1sq;
  if (f(lo) >= 0.0) return {lo, -1};
  if (f(hi) <= 0.0) return {hi, +1};
  while (hi / lo > 1.0 + 1e-8) {
    const double mid = std::sqrt(lo * hi);
    (f(mid) < 0.0 ? lo : hi) = mid;
  }
  return {std::sqrt(lo * hi), 0};
}

struct IndicatorField {
  SamplingGrid grid;
  std::vector<double> raw;         // 1 / |g|
  std::vector<double> normalized;  // raw mapped affinely onto [0, 1]
  std::vector<double> epsilon;     // Morozov parameter per point
  std::vector<int> flag;           // bracket flags per point

  int argmax_index() const {
    int best = 0;
    for (std::size_t i = 1; i < raw.size(); ++i)
      if (raw[i] > raw[best]) best = static_cast<int>(i);
    return best;
  }
  Point2 argmax_point() const { return grid.point(argmax_index()); }
};

// Maps a sampling point to the probe-space right-hand side phi_xi.
using RhsProvider = std::function<Eigen::VectorXcd(Point2)>;

// Point probes: by reciprocity the field a source at xi would produce at
// probe i equals (r_xi / r_probe) u0_i(xi), so the incident fields of the
// array double as the test functions. Sampling inside the tube wall is
// rejected; the data cannot distinguish anything there.
inline RhsProvider make_point_rhs(std::shared_ptr<const std::vector<IncidentField>> fields,
                                  double probe_radius, double wall_r_lo, double wall_r_hi) {
  if (!fields || fields->empty())
    throw std::invalid_argument("make_point_rhs: no incident fields");
  return [fields, probe_radius, wall_r_lo, wall_r_hi](Point2 xi) {
    if (xi.r > wall_r_lo && xi.r < wall_r_hi)
      throw std::invalid_argument("rhs: sampling point inside the tube wall");
    Eigen::VectorXcd phi(fields->size());
    for (std::size_t i = 0; i < fields->size(); ++i)
      phi[static_cast<Eigen::Index>(i)] = (xi.r / probe_radius) * (*fields)[i].eval(xi);
    return phi;
  };
}

// Coil probes: the physically measured functional pairs with the incident
// field of the receiving coil evaluated at the sampling point.
inline RhsProvider make_coil_rhs(std::shared_ptr<const std::vector<IncidentField>> fields,
                                 double wall_r_lo, double wall_r_hi) {
  if (!fields || fields->empty())
    throw std::invalid_argument("make_coil_rhs: no incident fields");
  return [fields, wall_r_lo, wall_r_hi](Point2 xi) {
    if (xi.r > wall_r_lo && xi.r < wall_r_hi)
      throw std::invalid_argument("rhs: sampling point inside the tube wall");
    Eigen::VectorXcd phi(fields->size());
    for (std::size_t i = 0; i < fields->size(); ++i)
      phi[static_cast<Eigen::Index>(i)] = (*fields)[i].eval(xi);
    return phi;
  };
}

// Runs the sampling loop. `delta` is the relative noise level; the
// discrepancy equation scales it by the largest singular value, which makes
// the indicator exactly invariant under joint rescaling of Z and phi. The
// SVD is computed once; grid points are independent and may be processed by
// several workers, with identical output for any worker count.
inline IndicatorField run_lsm(const MultistaticMatrix& data, const SamplingGrid& grid,
                              const RhsProvider& rhs, double delta, int workers = 1) {
  grid.validate();
  if (data.z.rows() != data.z.cols())
    throw std::invalid_argument("run_lsm: multistatic matrix must be square");
  const SvdData svd = SvdData::decompose(data.z);  // throws on zero data
  const double delta_abs = delta * svd.s[0];

  IndicatorField out;
  out.grid = grid;
  const int n = grid.size();
  out.raw.assign(n, 0.0);
  out.normalized.assign(n, 0.0);
  out.epsilon.assign(n, 0.0);
  out.flag.assign(n, 0);

  parallel_for(n, workers, [&](int idx) {
    const Eigen::VectorXcd phi = rhs(grid.point(idx));
    if (phi.size() != data.z.rows())
      throw std::invalid_argument("run_lsm: rhs length does not match the matrix");
    const MorozovResult mr = morozov_epsilon(svd, phi, delta_abs);
    const Eigen::VectorXcd g = tikhonov_solve(svd, phi, mr.epsilon);
    const double gn = g.norm();
    if (!(gn > 0.0) || !std::isfinite(gn))
      throw std::runtime_error("run_lsm: regularized solution has invalid norm");
    out.raw[idx] = 1.0 / gn;
    out.epsilon[idx] = mr.epsilon;
    out.flag[idx] = mr.bracket_flag;
  });

  const auto [mn, mx] = std::minmax_element(out.raw.begin(), out.raw.end());
  const double lo = *mn, hi = *mx;
  for (int i = 0; i < n; ++i)
    out.normalized[i] = hi > lo ? (out.raw[i] - lo) / (hi - lo) : 0.0;
  return out;
}

}  // namespace eclsm
