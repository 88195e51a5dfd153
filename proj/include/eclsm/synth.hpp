#pragma once
// Multistatic data synthesis: a vertical array of probes inside the tube,
// excited one at a time. Point probes record the scattered field at every
// receiver position; coil probes record mutual impedance variations through a
// conductivity-contrast integral over the deposit. Includes the multiplicative
// noise model and band truncation applied to measured matrices.

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <vector>

#include "eclsm/forward.hpp"
#include "eclsm/materials.hpp"
#include "eclsm/mesh.hpp"

namespace eclsm {

struct ProbeArray {
  enum class Kind { Point, Coil };

  Kind kind = Kind::Point;
  int count = 32;
  double radius = 8.165e-3;   // probe centre radius [m]
  double z_center = 0.0;      // array midpoint [m]
  double spacing = 2.5e-3;    // axial pitch [m]
  double coil_width = 0.67e-3;   // [m], coil probes
  double coil_height = 2.0e-3;   // [m], coil probes
  double current_density = 1.0;  // [A/m^2], coil probes

  void validate() const {
    if (count < 1) throw std::invalid_argument("probe array: count must be at least 1");
    if (!(radius > 0.0)) throw std::invalid_argument("probe array: radius must be positive");
    if (count > 1 && !(spacing > 0.0))
      throw std::invalid_argument("probe array: spacing must be positive");
    if (kind == Kind::Coil) {
      if (!(coil_width > 0.0) || !(coil_height > 0.0))
        throw std::invalid_argument("probe array: coil dimensions must be positive");
      if (current_density == 0.0)
        throw std::invalid_argument("probe array: coil current density must be nonzero");
      if (!(radius - 0.5 * coil_width > 0.0))
        throw std::invalid_argument("probe array: coil crosses the symmetry axis");
    }
  }

  Point2 position(int i) const {
    return {radius, z_center + (i - 0.5 * (count - 1)) * spacing};
  }
  double z_first() const { return position(0).z; }
  double z_last() const { return position(count - 1).z; }

  SourceSpec source(int i) const {
    if (kind == Kind::Point) return PointSource{position(i)};
    return CoilSource{position(i), coil_width, coil_height, current_density};
  }
};

enum class BandConvention {
  Inclusive,  // keep |i - j| <= M
  Exclusive,  // keep |i - j| <= M - 1; M = 1 is pure backscattering
};

struct MultistaticMatrix {
  Eigen::MatrixXcd z;
  ProbeArray::Kind kind = ProbeArray::Kind::Point;
  double delta = 0.0;      // noise level already applied to z
  int band = 0;            // band parameter already applied; 0 = full
  std::uint64_t seed = 0;  // noise seed, meaningful when delta > 0

  int size() const { return static_cast<int>(z.rows()); }
};

// Computes all incident fields of an array in the medium described by `sys`.
// Factorization cost is shared across the sources.
inline std::vector<IncidentField> array_incident_fields(const FemSystem& sys,
                                                        const ProbeArray& probes) {
  probes.validate();
  std::vector<IncidentField> fields;
  fields.reserve(probes.count);
  for (int i = 0; i < probes.count; ++i) fields.push_back(incident_field(sys, probes.source(i)));
  return fields;
}

// Full multistatic matrix on one mesh: column j holds the response to source
// j. Point probes: Z_ij is the scattered field at receiver i. Coil probes:
// Z_ij = (i w / r0) Int_D (sigma - sigma_ref) u_i u0_j r with u_i the total
// field of coil i in the perturbed medium and r0 the array radius.
inline MultistaticMatrix synthesize_multistatic(const Mesh& mesh, const MaterialTable& table,
                                                double omega, const ProbeArray& probes) {
  probes.validate();
  const MaterialField ref = coefficient_field(mesh, table, false);
  const MaterialField pert = coefficient_field(mesh, table, true);
  const FemSystem sys_ref(mesh, ref, omega);
  const FemSystem sys_pert(mesh, pert, omega);

  // probes must sit in vacuum, outside tube and deposits
  for (int i = 0; i < probes.count; ++i) {
    const MeshLocation loc = mesh.locate(probes.position(i));
    if (mesh.region_tags[loc.triangle] != RegionTag::Vacuum)
      throw std::invalid_argument("synthesize: probe " + std::to_string(i) +
                                  " lies inside a conductive region");
  }

  const int n = probes.count;
  MultistaticMatrix out;
  out.kind = probes.kind;
  out.z.resize(n, n);

  if (probes.kind == ProbeArray::Kind::Point) {
    for (int j = 0; j < n; ++j) {
      const IncidentField u0 = incident_field(sys_ref, probes.source(j));
      const ComplexField us = scattered_field(sys_pert, ref, u0.total);
      for (int i = 0; i < n; ++i) out.z(i, j) = us.evaluate(probes.position(i));
    }
    return out;
  }

  std::vector<IncidentField> u0s = array_incident_fields(sys_ref, probes);
  std::vector<Eigen::VectorXcd> utot(n);
  for (int j = 0; j < n; ++j) {
    const ComplexField us = scattered_field(sys_pert, ref, u0s[j].total);
    utot[j] = u0s[j].total.values + us.values;
  }

  out.z.setZero();
  const Complex iw_r0(0.0, omega / probes.radius);
  Eigen::VectorXcd a(n), b(n);
  for (int t = 0; t < mesh.n_triangles(); ++t) {
    const double dsigma = pert.sigma[t] - ref.sigma[t];
    if (dsigma == 0.0) continue;
    const auto geom = detail::tri_geometry(mesh, t);
    const auto& tri = mesh.triangles[t];
    for (const TriQuadPoint& q : tri_rule_deg4()) {
      const double rq = q.l1 * geom.p[0].r + q.l2 * geom.p[1].r + q.l3 * geom.p[2].r;
      for (int f = 0; f < n; ++f) {
        a[f] = q.l1 * utot[f][tri[0]] + q.l2 * utot[f][tri[1]] + q.l3 * utot[f][tri[2]];
        b[f] = q.l1 * u0s[f].total.values[tri[0]] + q.l2 * u0s[f].total.values[tri[1]] +
               q.l3 * u0s[f].total.values[tri[2]];
      }
      out.z.noalias() += (iw_r0 * (dsigma * q.w * geom.area * rq)) * (a * b.transpose());
    }
  }
  return out;
}

// Multiplicative noise: every entry becomes Z_ij (1 + eta_ij) with the real
// and imaginary parts of eta drawn independently from U[-delta, delta]. The
// generator mapping is spelled out so matrices are bit-reproducible across
// platforms for a fixed seed; entries are visited row major, real part first.
inline MultistaticMatrix add_noise(const MultistaticMatrix& in, double delta,
                                   std::uint64_t seed) {
  if (!(delta >= 0.0) || !(delta <= 0.5))
    throw std::invalid_argument("add_noise: delta must lie in [0, 0.5]");
  MultistaticMatrix out = in;
  out.delta = delta;
  out.seed = seed;
  if (delta == 0.0) return out;
  std::mt19937_64 rng(seed);
  auto uniform_pm = [&]() {
    const double u01 = (rng() >> 11) * 0x1.0p-53;  // 53-bit mantissa in [0,1)
    return delta * (2.0 * u01 - 1.0);
  };
  for (Eigen::Index i = 0; i < out.z.rows(); ++i)
    for (Eigen::Index j = 0; j < out.z.cols(); ++j) {
      const double re = uniform_pm();
      const double im = uniform_pm();
      out.z(i, j) *= Complex(1.0 + re, im);
    }
  return out;
}

// Keeps the band around the diagonal and zeroes the rest. M = N reproduces
// the full matrix under either convention.
inline MultistaticMatrix band_truncate(const MultistaticMatrix& in, int m,
                                       BandConvention convention = BandConvention::Exclusive) {
  const int n = in.size();
  if (m < 1 || m > n)
    throw std::invalid_argument("band_truncate: band parameter must lie in [1, N]");
  const int width = convention == BandConvention::Exclusive ? m - 1 : m;
  MultistaticMatrix out = in;
  out.band = m;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (std::abs(i - j) > width) out.z(i, j) = 0.0;
  return out;
}

}  // namespace eclsm
