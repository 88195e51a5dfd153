#pragma once
// Run configuration: flat INI-style text files with typed sections, strict
// unknown-key handling, defaults matching the reference tube geometry, and a
// canonical serialization that feeds the identifying hash stored in output
// file headers.

#include <charconv>
#include <cmath>
#include <cstdint>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "eclsm/lsm.hpp"
#include "eclsm/materials.hpp"
#include "eclsm/mesh.hpp"
#include "eclsm/synth.hpp"

namespace eclsm {

struct MeshParams {
  double h = 5.0e-4;         // target fine spacing for inversion meshes [m]
  double h_coarse = 2.0e-3;  // cap for graded coarsening [m]
  double growth = 1.4;       // geometric coarsening factor
  int data_refine = 2;       // extra refinement for data synthesis meshes
  double r_max = 0.0;        // 0 = auto (six tube outer radii)
  double z_min = 0.0, z_max = 0.0;  // both 0 = auto from probes and deposits
};

struct RunConfig {
  // [geometry]
  double tube_inner_radius = 9.84e-3;  // [m]
  double tube_thickness = 1.27e-3;     // [m]
  std::vector<RegionSpec> deposits;    // filled with the default shape if unset

  // [materials]
  // The reconstruction experiments assume the deposit differs from the
  // background only by conductivity, so the sampling operator stays compact;
  // force_mu_match = false turns the deposit's magnetic contrast back on.
  MaterialTable materials{.force_mu_match = true};

  // [drive]
  double omega = 200.0 * kPi;  // [rad/s]

  // [probes]
  ProbeArray probes;

  // [mesh]
  MeshParams mesh;

  // [noise]
  double delta = 0.01;
  std::uint64_t seed = 1;

  // [band]
  int band = 0;  // 0 = keep the full matrix
  BandConvention band_convention = BandConvention::Exclusive;

  // [grid]
  bool grid_auto = true;
  SamplingGrid grid;

  // [lsm]
  double delta_override = 0.0;  // 0 = take delta from the matrix metadata
  int workers = 1;

  // [forward]
  int source_index = 0;

  // [output]
  std::string out_dir = "out";

  double tube_outer_radius() const { return tube_inner_radius + tube_thickness; }

  RegionSpec tube_region() const {
    return RegionSpec::tube_annulus(tube_inner_radius, tube_thickness);
  }

  // All shape specs that tag the mesh: tube first, then deposits.
  std::vector<RegionSpec> regions() const {
    std::vector<RegionSpec> out{tube_region()};
    out.insert(out.end(), deposits.begin(), deposits.end());
    return out;
  }

  void validate() const;
};

namespace detail {

inline std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

inline bool parse_double(const std::string& s, double& out) {
  const char* b = s.data();
  const char* e = s.data() + s.size();
  auto res = std::from_chars(b, e, out);
  return res.ec == std::errc() && res.ptr == e;
}

inline bool parse_int(const std::string& s, long long& out) {
  const char* b = s.data();
  const char* e = s.data() + s.size();
  auto res = std::from_chars(b, e, out);
  return res.ec == std::errc() && res.ptr == e;
}

inline bool parse_uint64(const std::string& s, std::uint64_t& out) {
  const char* b = s.data();
  const char* e = s.data() + s.size();
  auto res = std::from_chars(b, e, out);
  return res.ec == std::errc() && res.ptr == e;
}

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

}  // namespace detail

inline void RunConfig::validate() const {
  std::vector<std::string> bad;
  auto req = [&](bool ok, const std::string& msg) {
    if (!ok) bad.push_back(msg);
  };

  req(tube_inner_radius > 0.0, "geometry: tube_inner_radius must be positive");
  req(tube_thickness > 0.0, "geometry: tube_thickness must be positive");
  try {
    materials.validate();
  } catch (const std::exception& e) {
    bad.push_back(e.what());
  }
  req(omega > 0.0, "drive: omega must be positive");
  try {
    probes.validate();
  } catch (const std::exception& e) {
    bad.push_back(e.what());
  }
  const double probe_outer_r =
      probes.radius + (probes.kind == ProbeArray::Kind::Coil ? 0.5 * probes.coil_width : 0.0);
  req(probe_outer_r < tube_inner_radius,
      "probes: the array must sit strictly inside the tube bore");

  const double wall_outer = tube_outer_radius();
  for (std::size_t i = 0; i < deposits.size(); ++i) {
    double r_lo, r_hi, z_lo, z_hi;
    deposits[i].bounding_box(r_lo, r_hi, z_lo, z_hi);
    req(deposits[i].shape != RegionSpec::Shape::TubeAnnulus,
        "deposit " + std::to_string(i) + ": annulus shapes are reserved for the tube");
    req(r_lo >= wall_outer - 1e-12,
        "deposit " + std::to_string(i) + ": must attach at or beyond the outer tube wall");
  }

  req(mesh.h > 0.0, "mesh: h must be positive");
  req(mesh.h_coarse >= mesh.h, "mesh: h_coarse must be at least h");
  req(mesh.growth > 1.0, "mesh: growth must exceed 1");
  req(mesh.data_refine >= 1, "mesh: data_refine must be at least 1");
  if (mesh.r_max != 0.0) {
    double dep_r = wall_outer;
    for (const auto& d : deposits) {
      double r_lo, r_hi, z_lo, z_hi;
      d.bounding_box(r_lo, r_hi, z_lo, z_hi);
      dep_r = std::max(dep_r, r_hi);
    }
    req(mesh.r_max > dep_r, "mesh: r_max must clear the tube and deposits");
  }
  if (mesh.z_min != 0.0 || mesh.z_max != 0.0)
    req(mesh.z_max > mesh.z_min, "mesh: z_max must exceed z_min");

  req(delta >= 0.0 && delta <= 0.5, "noise: delta must lie in [0, 0.5]");
  req(band >= 0 && band <= probes.count, "band: m must lie in [0, probe count]");

  if (!grid_auto) {
    try {
      grid.validate();
    } catch (const std::exception& e) {
      bad.push_back(std::string("grid: ") + e.what());
    }
    req(grid.r_lo >= wall_outer - 1e-12, "grid: must start at or beyond the outer tube wall");
  }
  req(delta_override >= 0.0 && delta_override <= 0.5,
      "lsm: delta_override must lie in [0, 0.5]");
  req(workers >= 0, "lsm: workers must be nonnegative (0 = hardware)");
  req(source_index >= 0 && source_index < probes.count,
      "forward: source_index must address a probe");
  req(!out_dir.empty(), "output: dir must not be empty");

  if (!bad.empty()) {
    std::string msg = "invalid configuration (" + std::to_string(bad.size()) + " problems):";
    for (const auto& b : bad) msg += "\n  - " + b;
    throw std::invalid_argument(msg);
  }
}

// The default deposit of the reference setup: a half-elliptic bump on the
// outer wall, 3 mm deep and 10 mm long, centred on the array.
inline RegionSpec default_deposit(const RunConfig& cfg) {
  return RegionSpec::semi_disc(cfg.tube_outer_radius(), 3.0e-3, 5.0e-3, 0.0);
}

inline RunConfig default_config() {
  RunConfig cfg;
  cfg.deposits = {default_deposit(cfg)};
  return cfg;
}

// ---------------------------------------------------------------------------
// Parsing

inline RunConfig parse_config_text(const std::string& text) {
  RunConfig cfg;
  bool saw_deposit_section = false;
  bool deposits_disabled = false;
  std::vector<std::string> errors;

  struct DepositDraft {
    std::string kind = "semi_disc";
    double attachment_radius = 0.0;  // 0 = outer tube wall
    double radius_r = 0.0, radius_z = 0.0;
    double center_r = 0.0, center_z = 0.0;
    std::vector<Point2> points;
    int line = 0;
  };
  std::vector<DepositDraft> drafts;

  std::string section;
  std::istringstream in(text);
  std::string raw;
  int lineno = 0;

  auto err = [&](int line, const std::string& msg) {
    errors.push_back("line " + std::to_string(line) + ": " + msg);
  };

  while (std::getline(in, raw)) {
    ++lineno;
    std::string line = raw;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = detail::trim(line);
    if (line.empty()) continue;

    if (line.front() == '[') {
      if (line.back() != ']') {
        err(lineno, "malformed section header '" + line + "'");
        continue;
      }
      section = detail::trim(line.substr(1, line.size() - 2));
      static const char* known[] = {"geometry", "deposit", "materials", "drive", "probes",
                                    "mesh",     "noise",   "band",      "grid",  "lsm",
                                    "forward",  "output"};
      bool ok = false;
      for (const char* k : known) ok = ok || section == k;
      if (!ok) {
        err(lineno, "unknown section [" + section + "]");
        section.clear();
        continue;
      }
      if (section == "deposit") {
        saw_deposit_section = true;
        drafts.push_back({});
        drafts.back().line = lineno;
      }
      continue;
    }

    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      err(lineno, "expected 'key = value', got '" + line + "'");
      continue;
    }
    const std::string key = detail::trim(line.substr(0, eq));
    const std::string value = detail::trim(line.substr(eq + 1));
    if (section.empty()) {
      err(lineno, "key '" + key + "' outside any section");
      continue;
    }

    auto want_double = [&](double& slot) {
      if (!detail::parse_double(value, slot)) err(lineno, "key '" + key + "': bad number");
    };
    auto want_int = [&](int& slot) {
      long long v;
      if (!detail::parse_int(value, v))
        err(lineno, "key '" + key + "': bad integer");
      else
        slot = static_cast<int>(v);
    };
    auto want_bool = [&](bool& slot) {
      if (value == "true" || value == "1" || value == "yes")
        slot = true;
      else if (value == "false" || value == "0" || value == "no")
        slot = false;
      else
        err(lineno, "key '" + key + "': expected a boolean");
    };
    auto unknown = [&] { err(lineno, "unknown key '" + key + "' in section [" + section + "]"); };

    if (section == "geometry") {
      if (key == "tube_inner_radius")
        want_double(cfg.tube_inner_radius);
      else if (key == "tube_thickness")
        want_double(cfg.tube_thickness);
      else
        unknown();
    } else if (section == "deposit") {
      DepositDraft& d = drafts.back();
      if (key == "kind") {
        if (value != "semi_disc" && value != "ellipse" && value != "polygon" && value != "none")
          err(lineno, "deposit kind must be semi_disc, ellipse, polygon or none");
        else
          d.kind = value;
        if (value == "none") deposits_disabled = true;
      } else if (key == "attachment_radius")
        want_double(d.attachment_radius);
      else if (key == "radius_r")
        want_double(d.radius_r);
      else if (key == "radius_z")
        want_double(d.radius_z);
      else if (key == "center_r")
        want_double(d.center_r);
      else if (key == "center_z")
        want_double(d.center_z);
      else if (key == "points") {
        // "r1,z1; r2,z2; ..."
        std::istringstream ps(value);
        std::string pair;
        bool ok = true;
        while (std::getline(ps, pair, ';')) {
          pair = detail::trim(pair);
          if (pair.empty()) continue;
          const auto comma = pair.find(',');
          double r, z;
          if (comma == std::string::npos ||
              !detail::parse_double(detail::trim(pair.substr(0, comma)), r) ||
              !detail::parse_double(detail::trim(pair.substr(comma + 1)), z)) {
            ok = false;
            break;
          }
          d.points.push_back({r, z});
        }
        if (!ok) err(lineno, "key 'points': expected 'r,z; r,z; ...'");
      } else
        unknown();
    } else if (section == "materials") {
      if (key == "vacuum_mu")
        want_double(cfg.materials.vacuum.mu);
      else if (key == "tube_sigma")
        want_double(cfg.materials.tube.sigma);
      else if (key == "tube_mu")
        want_double(cfg.materials.tube.mu);
      else if (key == "deposit_sigma")
        want_double(cfg.materials.deposit.sigma);
      else if (key == "deposit_mu")
        want_double(cfg.materials.deposit.mu);
      else if (key == "force_mu_match")
        want_bool(cfg.materials.force_mu_match);
      else
        unknown();
    } else if (section == "drive") {
      if (key == "omega")
        want_double(cfg.omega);
      else
        unknown();
    } else if (section == "probes") {
      if (key == "kind") {
        if (value == "point")
          cfg.probes.kind = ProbeArray::Kind::Point;
        else if (value == "coil")
          cfg.probes.kind = ProbeArray::Kind::Coil;
        else
          err(lineno, "probe kind must be point or coil");
      } else if (key == "count")
        want_int(cfg.probes.count);
      else if (key == "radius")
        want_double(cfg.probes.radius);
      else if (key == "spacing")
        want_double(cfg.probes.spacing);
      else if (key == "z_center")
        want_double(cfg.probes.z_center);
      else if (key == "coil_width")
        want_double(cfg.probes.coil_width);
      else if (key == "coil_height")
        want_double(cfg.probes.coil_height);
      else if (key == "current_density")
        want_double(cfg.probes.current_density);
      else
        unknown();
    } else if (section == "mesh") {
      if (key == "h")
        want_double(cfg.mesh.h);
      else if (key == "h_coarse")
        want_double(cfg.mesh.h_coarse);
      else if (key == "growth")
        want_double(cfg.mesh.growth);
      else if (key == "data_refine")
        want_int(cfg.mesh.data_refine);
      else if (key == "r_max")
        want_double(cfg.mesh.r_max);
      else if (key == "z_min")
        want_double(cfg.mesh.z_min);
      else if (key == "z_max")
        want_double(cfg.mesh.z_max);
      else
        unknown();
    } else if (section == "noise") {
      if (key == "delta")
        want_double(cfg.delta);
      else if (key == "seed") {
        if (!detail::parse_uint64(value, cfg.seed)) err(lineno, "key 'seed': bad integer");
      } else
        unknown();
    } else if (section == "band") {
      if (key == "m")
        want_int(cfg.band);
      else if (key == "convention") {
        if (value == "inclusive")
          cfg.band_convention = BandConvention::Inclusive;
        else if (value == "exclusive")
          cfg.band_convention = BandConvention::Exclusive;
        else
          err(lineno, "band convention must be inclusive or exclusive");
      } else
        unknown();
    } else if (section == "grid") {
      if (key == "auto")
        want_bool(cfg.grid_auto);
      else if (key == "r_lo")
        want_double(cfg.grid.r_lo);
      else if (key == "r_hi")
        want_double(cfg.grid.r_hi);
      else if (key == "z_lo")
        want_double(cfg.grid.z_lo);
      else if (key == "z_hi")
        want_double(cfg.grid.z_hi);
      else if (key == "n_r")
        want_int(cfg.grid.n_r);
      else if (key == "n_z")
        want_int(cfg.grid.n_z);
      else
        unknown();
    } else if (section == "lsm") {
      if (key == "delta_override")
        want_double(cfg.delta_override);
      else if (key == "workers")
        want_int(cfg.workers);
      else
        unknown();
    } else if (section == "forward") {
      if (key == "source_index")
        want_int(cfg.source_index);
      else
        unknown();
    } else if (section == "output") {
      if (key == "dir")
        cfg.out_dir = value;
      else
        unknown();
    }
  }

  // materialize deposits
  if (deposits_disabled && drafts.size() > 1)
    errors.push_back("deposit: 'kind = none' cannot be combined with other deposit sections");
  if (!deposits_disabled) {
    for (const auto& d : drafts) {
      const double attach =
          d.attachment_radius != 0.0 ? d.attachment_radius : cfg.tube_outer_radius();
      try {
        if (d.kind == "semi_disc")
          cfg.deposits.push_back(RegionSpec::semi_disc(attach, d.radius_r, d.radius_z, d.center_z));
        else if (d.kind == "ellipse")
          cfg.deposits.push_back(RegionSpec::ellipse(d.center_r, d.center_z, d.radius_r, d.radius_z));
        else if (d.kind == "polygon")
          cfg.deposits.push_back(RegionSpec::polygon_region(d.points));
      } catch (const std::exception& e) {
        errors.push_back("deposit section at line " + std::to_string(d.line) + ": " + e.what());
      }
    }
    if (!saw_deposit_section) cfg.deposits = {default_deposit(cfg)};
  }

  if (!errors.empty()) {
    std::string msg = "config parse failed (" + std::to_string(errors.size()) + " problems):";
    for (const auto& e : errors) msg += "\n  - " + e;
    throw std::invalid_argument(msg);
  }
  cfg.validate();
  return cfg;
}

// ---------------------------------------------------------------------------
// Canonical serialization and config hash

inline std::string canonical_config_text(const RunConfig& cfg) {
  std::ostringstream out;
  auto d = detail::format_double;
  out << "[geometry]\n";
  out << "tube_inner_radius = " << d(cfg.tube_inner_radius) << "\n";
  out << "tube_thickness = " << d(cfg.tube_thickness) << "\n";
  if (cfg.deposits.empty()) {
    out << "[deposit]\nkind = none\n";
  }
  for (const auto& dep : cfg.deposits) {
    out << "[deposit]\n";
    switch (dep.shape) {
      case RegionSpec::Shape::SemiDisc:
        out << "kind = semi_disc\n";
        out << "attachment_radius = " << d(dep.attachment_radius) << "\n";
        out << "radius_r = " << d(dep.radius_r) << "\n";
        out << "radius_z = " << d(dep.radius_z) << "\n";
        out << "center_z = " << d(dep.center_z) << "\n";
        break;
      case RegionSpec::Shape::Ellipse:
        out << "kind = ellipse\n";
        out << "center_r = " << d(dep.center_r) << "\n";
        out << "center_z = " << d(dep.center_z) << "\n";
        out << "radius_r = " << d(dep.radius_r) << "\n";
        out << "radius_z = " << d(dep.radius_z) << "\n";
        break;
      case RegionSpec::Shape::Polygon: {
        out << "kind = polygon\n";
        out << "points = ";
        for (std::size_t i = 0; i < dep.polygon.size(); ++i) {
          if (i) out << "; ";
          out << d(dep.polygon[i].r) << "," << d(dep.polygon[i].z);
        }
        out << "\n";
        break;
      }
      case RegionSpec::Shape::TubeAnnulus:
        break;  // never stored as a deposit
    }
  }
  out << "[materials]\n";
  out << "vacuum_mu = " << d(cfg.materials.vacuum.mu) << "\n";
  out << "tube_sigma = " << d(cfg.materials.tube.sigma) << "\n";
  out << "tube_mu = " << d(cfg.materials.tube.mu) << "\n";
  out << "deposit_sigma = " << d(cfg.materials.deposit.sigma) << "\n";
  out << "deposit_mu = " << d(cfg.materials.deposit.mu) << "\n";
  out << "force_mu_match = " << (cfg.materials.force_mu_match ? "true" : "false") << "\n";
  out << "[drive]\n";
  out << "omega = " << d(cfg.omega) << "\n";
  out << "[probes]\n";
  out << "kind = " << (cfg.probes.kind == ProbeArray::Kind::Point ? "point" : "coil") << "\n";
  out << "count = " << cfg.probes.count << "\n";
  out << "radius = " << d(cfg.probes.radius) << "\n";
  out << "spacing = " << d(cfg.probes.spacing) << "\n";
  out << "z_center = " << d(cfg.probes.z_center) << "\n";
  out << "coil_width = " << d(cfg.probes.coil_width) << "\n";
  out << "coil_height = " << d(cfg.probes.coil_height) << "\n";
  out << "current_density = " << d(cfg.probes.current_density) << "\n";
  out << "[mesh]\n";
  out << "h = " << d(cfg.mesh.h) << "\n";
  out << "h_coarse = " << d(cfg.mesh.h_coarse) << "\n";
  out << "growth = " << d(cfg.mesh.growth) << "\n";
  out << "data_refine = " << cfg.mesh.data_refine << "\n";
  out << "r_max = " << d(cfg.mesh.r_max) << "\n";
  out << "z_min = " << d(cfg.mesh.z_min) << "\n";
  out << "z_max = " << d(cfg.mesh.z_max) << "\n";
  out << "[noise]\n";
  out << "delta = " << d(cfg.delta) << "\n";
  out << "seed = " << cfg.seed << "\n";
  out << "[band]\n";
  out << "m = " << cfg.band << "\n";
  out << "convention = "
      << (cfg.band_convention == BandConvention::Exclusive ? "exclusive" : "inclusive") << "\n";
  out << "[grid]\n";
  out << "auto = " << (cfg.grid_auto ? "true" : "false") << "\n";
  out << "r_lo = " << d(cfg.grid.r_lo) << "\n";
  out << "r_hi = " << d(cfg.grid.r_hi) << "\n";
  out << "z_lo = " << d(cfg.grid.z_lo) << "\n";
  out << "z_hi = " << d(cfg.grid.z_hi) << "\n";
  out << "n_r = " << cfg.grid.n_r << "\n";
  out << "n_z = " << cfg.grid.n_z << "\n";
  out << "[lsm]\n";
  out << "delta_override = " << d(cfg.delta_override) << "\n";
  out << "workers = " << cfg.workers << "\n";
  out << "[forward]\n";
  out << "source_index = " << cfg.source_index << "\n";
  out << "[output]\n";
  out << "dir = " << cfg.out_dir << "\n";
  return out.str();
}

inline std::uint64_t fnv1a64(const std::string& data) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : data) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

inline std::uint64_t config_hash(const RunConfig& cfg) {
  return fnv1a64(canonical_config_text(cfg));
}

}  // namespace eclsm
