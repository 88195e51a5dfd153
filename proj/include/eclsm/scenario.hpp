#pragma once
// End-to-end pipelines built from the config: mesh construction with graded
// refinement around the instrumented region, data synthesis, inversion, and
// reconstruction quality metrics. The canned study configurations live here
// too, so the command line tool and the test suites drive the same code.

#include <algorithm>
#include <cmath>
#include <memory>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "eclsm/config.hpp"
#include "eclsm/forward.hpp"
#include "eclsm/lsm.hpp"
#include "eclsm/materials.hpp"
#include "eclsm/mesh.hpp"
#include "eclsm/synth.hpp"

namespace eclsm {

inline int resolve_workers(int requested) {
  if (requested > 0) return requested;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? static_cast<int>(hw) : 1;
}

namespace detail {

struct Window {
  double lo, hi;
};

// Deposit bounding box union, clamped to sane values when there are none.
inline void deposit_extent(const RunConfig& cfg, double& r_hi, double& z_lo, double& z_hi) {
  r_hi = cfg.tube_outer_radius();
  z_lo = cfg.probes.z_first();
  z_hi = cfg.probes.z_last();
  for (const auto& d : cfg.deposits) {
    double a, b, c, e;
    d.bounding_box(a, b, c, e);
    r_hi = std::max(r_hi, b);
    z_lo = std::min(z_lo, c);
    z_hi = std::max(z_hi, e);
  }
}

}  // namespace detail

// Sampling grid used when the config keeps `auto`: the band outside the tube
// wall, 8 mm deep, spanning the probe array plus half a pitch on both ends.
inline SamplingGrid resolve_grid(const RunConfig& cfg) {
  if (!cfg.grid_auto) return cfg.grid;
  SamplingGrid g;
  const double outer = cfg.tube_outer_radius();
  g.r_lo = outer;
  g.r_hi = outer + 8.0e-3;
  const double pad = 0.5 * cfg.probes.spacing;
  g.z_lo = cfg.probes.z_first() - pad;
  g.z_hi = cfg.probes.z_last() + pad;
  if (!(g.z_hi > g.z_lo)) {  // single probe
    g.z_lo = cfg.probes.z_center - 5.0e-3;
    g.z_hi = cfg.probes.z_center + 5.0e-3;
  }
  g.n_r = 40;
  g.n_z = std::max(24, static_cast<int>(std::ceil((g.z_hi - g.z_lo) / (2.0e-3 / 3.0))));
  return g;
}

// Builds the graded simulation mesh. `refine` divides the fine spacing (data
// synthesis uses cfg.mesh.data_refine to stay off the inversion mesh).
// `with_deposits` controls both the refinement window and the region tags;
// inversion meshes are built without any deposit knowledge.
inline Mesh build_simulation_mesh(const RunConfig& cfg, int refine, bool with_deposits) {
  cfg.validate();
  if (refine < 1) throw std::invalid_argument("build_simulation_mesh: refine must be >= 1");
  const double h = cfg.mesh.h / refine;
  const double outer = cfg.tube_outer_radius();

  // Six outer radii keep the Dirichlet wall's imprint on the scattered data
  // below 0.5% (doubling the extent moves matrix entries by ~3e-3; at three
  // radii it is ~3e-2, which visibly distorts point-probe reconstructions).
  const double r_max = cfg.mesh.r_max != 0.0 ? cfg.mesh.r_max : 6.0 * outer;

  double dep_r_hi, dep_z_lo, dep_z_hi;
  detail::deposit_extent(cfg, dep_r_hi, dep_z_lo, dep_z_hi);
  if (!with_deposits) {
    // refine around the probes, the wall and the sampling band instead
    const SamplingGrid g = resolve_grid(cfg);
    dep_r_hi = std::max(outer, g.r_hi);
    dep_z_lo = std::min({cfg.probes.z_first(), g.z_lo});
    dep_z_hi = std::max({cfg.probes.z_last(), g.z_hi});
  }

  double z_min = cfg.mesh.z_min, z_max = cfg.mesh.z_max;
  if (z_min == 0.0 && z_max == 0.0) {
    z_min = std::min(cfg.probes.z_first(), dep_z_lo) - 6.0 * outer;
    z_max = std::max(cfg.probes.z_last(), dep_z_hi) + 6.0 * outer;
  }

  // Radial lines: the fine window is anchored half a step off the probe
  // radius, so point sources never coincide with mesh vertices. Window bounds
  // are whole steps from that anchor; the graded extension handles the rest.
  const double margin = 2.0e-3;
  const double pr = cfg.probes.radius;
  const int n_lo = std::max(1, static_cast<int>(std::round((margin + 0.5 * h) / h)));
  const int n_hi = std::max(
      1, static_cast<int>(std::round((dep_r_hi + margin - pr + 0.5 * h) / h)));
  double win_r_lo = pr - (n_lo + 0.5) * h;
  double win_r_hi = pr + (n_hi + 0.5) * h;
  while (win_r_lo <= 0.75 * h) win_r_lo += h;  // stay clear of the axis
  if (!(win_r_hi < r_max)) throw std::invalid_argument("mesh: r_max too small for the geometry");

  std::vector<double> r_lines =
      graded_lines(0.0, r_max, win_r_lo, win_r_hi, h, cfg.mesh.h_coarse, cfg.mesh.growth);

  // material interfaces must sit on mesh lines
  const double merge_tol = 0.35 * h;
  snap_line(r_lines, cfg.tube_inner_radius, merge_tol);
  snap_line(r_lines, outer, merge_tol);
  for (const auto& d : cfg.deposits) {
    if (!with_deposits) break;
    if (d.shape == RegionSpec::Shape::SemiDisc &&
        std::abs(d.attachment_radius - outer) > merge_tol)
      snap_line(r_lines, d.attachment_radius, merge_tol);
  }

  if (cfg.probes.kind == ProbeArray::Kind::Point) {
    double dmin = r_max;
    for (double rl : r_lines) dmin = std::min(dmin, std::abs(rl - pr));
    if (dmin < 0.05 * h)
      throw std::invalid_argument(
          "mesh: a point probe nearly coincides with a mesh line; adjust mesh.h or the layout");
  }

  // Axial lines: anchored on the array centre.
  const double zc = cfg.probes.z_center;
  const int m_lo = std::max(1, static_cast<int>(std::round((zc - (dep_z_lo - margin)) / h)));
  const int m_hi = std::max(1, static_cast<int>(std::round(((dep_z_hi + margin) - zc) / h)));
  const double win_z_lo = zc - m_lo * h;
  const double win_z_hi = zc + m_hi * h;
  if (!(win_z_lo > z_min) || !(win_z_hi < z_max))
    throw std::invalid_argument("mesh: axial extent too small for the geometry");

  std::vector<double> z_lines =
      graded_lines(z_min, z_max, win_z_lo, win_z_hi, h, cfg.mesh.h_coarse, cfg.mesh.growth);

  Mesh mesh = build_tensor_mesh(std::move(r_lines), std::move(z_lines));
  std::vector<RegionSpec> regions{cfg.tube_region()};
  if (with_deposits)
    regions.insert(regions.end(), cfg.deposits.begin(), cfg.deposits.end());
  tag_regions(mesh, regions);
  return mesh;
}

// ---------------------------------------------------------------------------
// Synthesis pipeline

struct SynthesisResult {
  Mesh mesh;  // refined data mesh, deposits tagged
  MultistaticMatrix clean;
  MultistaticMatrix measured;  // noise and band applied per config
};

inline SynthesisResult synthesize_scenario(const RunConfig& cfg) {
  SynthesisResult res;
  res.mesh = build_simulation_mesh(cfg, cfg.mesh.data_refine, true);
  res.clean = synthesize_multistatic(res.mesh, cfg.materials, cfg.omega, cfg.probes);
  res.measured = add_noise(res.clean, cfg.delta, cfg.seed);
  if (cfg.band > 0)
    res.measured = band_truncate(res.measured, cfg.band, cfg.band_convention);
  return res;
}

// ---------------------------------------------------------------------------
// Inversion pipeline

struct InversionResult {
  Mesh mesh;  // inversion mesh, no deposit knowledge
  std::shared_ptr<std::vector<IncidentField>> fields;
  SamplingGrid grid;
  IndicatorField indicator;
  double delta_used = 0.0;
};

inline InversionResult invert_scenario(const RunConfig& cfg, const MultistaticMatrix& data) {
  if (data.size() != cfg.probes.count)
    throw std::invalid_argument("invert: matrix size does not match the probe count");
  if (data.kind != cfg.probes.kind)
    throw std::invalid_argument("invert: matrix probe kind does not match the config");
  const double delta_used = cfg.delta_override > 0.0 ? cfg.delta_override : data.delta;
  if (!(delta_used > 0.0))
    throw std::invalid_argument(
        "invert: matrix carries no noise level; set lsm.delta_override");

  InversionResult res;
  res.delta_used = delta_used;
  res.grid = resolve_grid(cfg);
  if (res.grid.z_lo > cfg.probes.z_first() || res.grid.z_hi < cfg.probes.z_last())
    throw std::invalid_argument("invert: sampling grid must cover the probe array span");

  res.mesh = build_simulation_mesh(cfg, 1, false);
  const MaterialField ref = coefficient_field(res.mesh, cfg.materials, false);
  const FemSystem sys(res.mesh, ref, cfg.omega);
  res.fields =
      std::make_shared<std::vector<IncidentField>>(array_incident_fields(sys, cfg.probes));

  const RhsProvider rhs =
      cfg.probes.kind == ProbeArray::Kind::Point
          ? make_point_rhs(res.fields, cfg.probes.radius, cfg.tube_inner_radius,
                           cfg.tube_outer_radius())
          : make_coil_rhs(res.fields, cfg.tube_inner_radius, cfg.tube_outer_radius());
  res.indicator = run_lsm(data, res.grid, rhs, delta_used, resolve_workers(cfg.workers));
  return res;
}

// ---------------------------------------------------------------------------
// Reconstruction quality

struct Metrics {
  Point2 argmax{};
  double raw_max = 0.0;
  bool argmax_inside = false;   // argmax falls inside some deposit
  double contrast = 0.0;        // mean raw inside deposits / mean raw elsewhere
  double z_offset = 0.0;        // |argmax z - nearest deposit centroid z|
  int local_maxima = 0;         // strict 8-neighbour maxima after 3x3 smoothing
  bool maxima_cover_deposits = false;  // every deposit holds such a maximum
};

inline std::vector<double> smooth_3x3(const IndicatorField& ind) {
  const SamplingGrid& g = ind.grid;
  std::vector<double> out(ind.raw.size());
  for (int iz = 0; iz < g.n_z; ++iz)
    for (int ir = 0; ir < g.n_r; ++ir) {
      double sum = 0.0;
      int cnt = 0;
      for (int dz = -1; dz <= 1; ++dz)
        for (int dr = -1; dr <= 1; ++dr) {
          const int jr = ir + dr, jz = iz + dz;
          if (jr < 0 || jr >= g.n_r || jz < 0 || jz >= g.n_z) continue;
          sum += ind.raw[g.index(jr, jz)];
          ++cnt;
        }
      out[g.index(ir, iz)] = sum / cnt;
    }
  return out;
}

inline Metrics compute_metrics(const IndicatorField& ind,
                               const std::vector<RegionSpec>& deposits) {
  const SamplingGrid& g = ind.grid;
  Metrics m;
  const int best = ind.argmax_index();
  m.argmax = g.point(best);
  m.raw_max = ind.raw[best];

  double sum_in = 0.0, sum_out = 0.0;
  int n_in = 0, n_out = 0;
  for (int i = 0; i < g.size(); ++i) {
    const Point2 p = g.point(i);
    bool inside = false;
    for (const auto& d : deposits) inside = inside || d.contains(p);
    if (inside) {
      sum_in += ind.raw[i];
      ++n_in;
    } else {
      sum_out += ind.raw[i];
      ++n_out;
    }
  }
  for (const auto& d : deposits) m.argmax_inside = m.argmax_inside || d.contains(m.argmax);
  m.contrast = (n_in > 0 && n_out > 0 && sum_out > 0.0)
                   ? (sum_in / n_in) / (sum_out / n_out)
                   : 0.0;

  m.z_offset = std::numeric_limits<double>::infinity();
  for (const auto& d : deposits)
    m.z_offset = std::min(m.z_offset, std::abs(m.argmax.z - d.centroid().z));
  if (deposits.empty()) m.z_offset = 0.0;

  const std::vector<double> s = smooth_3x3(ind);
  std::vector<bool> covered(deposits.size(), false);
  for (int iz = 0; iz < g.n_z; ++iz)
    for (int ir = 0; ir < g.n_r; ++ir) {
      const double v = s[g.index(ir, iz)];
      bool peak = true;
      for (int dz = -1; dz <= 1 && peak; ++dz)
        for (int dr = -1; dr <= 1 && peak; ++dr) {
          if (dr == 0 && dz == 0) continue;
          const int jr = ir + dr, jz = iz + dz;
          if (jr < 0 || jr >= g.n_r || jz < 0 || jz >= g.n_z) continue;
          peak = v > s[g.index(jr, jz)];
        }
      if (!peak) continue;
      ++m.local_maxima;
      const Point2 p = g.point(ir, iz);
      for (std::size_t d = 0; d < deposits.size(); ++d)
        if (deposits[d].contains(p)) covered[d] = true;
    }
  m.maxima_cover_deposits = !deposits.empty();
  for (bool c : covered) m.maxima_cover_deposits = m.maxima_cover_deposits && c;
  return m;
}

// ---------------------------------------------------------------------------
// Canned study configurations

inline std::vector<std::string> reproduce_ids() {
  return {"fig5_N4",       "fig5_N8",       "fig5_N16",      "fig6_M1",  "fig6_M2",
          "fig6_M8",       "fig7_coils_N4", "fig7_coils_N8", "fig7_coils_N16",
          "fig8_coils_M1", "fig8_coils_M2", "fig8_coils_M8", "fig9_two_deposits",
          "fig10_drop"};
}

// Teardrop outline clinging to the outer wall: `length` along z, up to `depth`
// proud of the wall, blunt end down, tapering upward.
inline RegionSpec drop_deposit(double wall_r, double length, double depth, double z_center) {
  const int n = 23;
  std::vector<Point2> pts;
  pts.push_back({wall_r, z_center - 0.5 * length});
  const double a = 0.9, b = 2.2;
  const double s_peak = a / (a + b);
  const double w_peak = std::pow(s_peak, a) * std::pow(1.0 - s_peak, b);
  for (int k = 1; k < n; ++k) {
    const double s = static_cast<double>(k) / n;
    const double w = depth * std::pow(s, a) * std::pow(1.0 - s, b) / w_peak;
    pts.push_back({wall_r + w, z_center - 0.5 * length + s * length});
  }
  pts.push_back({wall_r, z_center + 0.5 * length});
  return RegionSpec::polygon_region(std::move(pts));
}

inline RunConfig reproduce_config(const std::string& id) {
  RunConfig cfg = default_config();
  auto coil = [&] { cfg.probes.kind = ProbeArray::Kind::Coil; };
  auto count = [&](int n) { cfg.probes.count = n; };
  auto band = [&](int m) {
    count(32);
    cfg.band = m;
  };

  if (id == "fig5_N4")
    count(4);
  else if (id == "fig5_N8")
    count(8);
  else if (id == "fig5_N16")
    count(16);
  else if (id == "fig6_M1")
    band(1);
  else if (id == "fig6_M2")
    band(2);
  else if (id == "fig6_M8")
    band(8);
  else if (id == "fig7_coils_N4") {
    coil();
    count(4);
  } else if (id == "fig7_coils_N8") {
    coil();
    count(8);
  } else if (id == "fig7_coils_N16") {
    coil();
    count(16);
  } else if (id == "fig8_coils_M1") {
    coil();
    band(1);
  } else if (id == "fig8_coils_M2") {
    coil();
    band(2);
  } else if (id == "fig8_coils_M8") {
    coil();
    band(8);
  } else if (id == "fig9_two_deposits") {
    coil();
    band(8);
    const double wall = cfg.tube_outer_radius();
    cfg.deposits = {RegionSpec::semi_disc(wall, 3.0e-3, 5.0e-3, -12.25e-3),
                    RegionSpec::semi_disc(wall, 2.5e-3, 4.0e-3, 12.25e-3)};
  } else if (id == "fig10_drop") {
    coil();
    count(32);
    cfg.deposits = {drop_deposit(cfg.tube_outer_radius(), 50.0e-3, 8.0e-3, 0.0)};
  } else {
    std::string msg = "unknown experiment id '" + id + "'; available:";
    for (const auto& k : reproduce_ids()) msg += " " + k;
    throw std::invalid_argument(msg);
  }
  cfg.validate();
  return cfg;
}

}  // namespace eclsm
