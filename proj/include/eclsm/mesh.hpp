#pragma once
// Meshing of the axisymmetric (r,z) half-plane: tensor-product triangulations,
// boundary classification, material region shapes and triangle tagging.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace eclsm {

struct Point2 {
  double r = 0.0;
  double z = 0.0;
};

inline double distance(Point2 a, Point2 b) { return std::hypot(a.r - b.r, a.z - b.z); }

enum class BoundaryFlag : unsigned char { Interior = 0, Axis = 1, Outer = 2 };

enum class RegionTag : unsigned char { Vacuum = 0, Tube = 1, Deposit = 2 };

// One material region in the meridian plane. The tube is an annulus (a vertical
// strip in (r,z)); deposits are half-ellipses attached to a vertical line,
// full ellipses, or simple polygons.
struct RegionSpec {
  enum class Shape { TubeAnnulus, SemiDisc, Ellipse, Polygon };

  Shape shape = Shape::TubeAnnulus;
  RegionTag tag = RegionTag::Vacuum;

  double inner_radius = 0.0;       // TubeAnnulus [m]
  double thickness = 0.0;          // TubeAnnulus [m]
  double attachment_radius = 0.0;  // SemiDisc: flat edge sits on r = attachment_radius
  double radius_r = 0.0;           // SemiDisc/Ellipse semi-axis in r [m]
  double radius_z = 0.0;           // SemiDisc/Ellipse semi-axis in z [m]
  double center_r = 0.0;           // Ellipse [m]
  double center_z = 0.0;           // SemiDisc/Ellipse [m]
  std::vector<Point2> polygon;     // Polygon: closed, last edge implicit

  static RegionSpec tube_annulus(double inner_radius, double thickness) {
    if (!(inner_radius > 0.0) || !(thickness > 0.0))
      throw std::invalid_argument("tube annulus needs inner_radius > 0 and thickness > 0");
    RegionSpec s;
    s.shape = Shape::TubeAnnulus;
    s.tag = RegionTag::Tube;
    s.inner_radius = inner_radius;
    s.thickness = thickness;
    return s;
  }

  static RegionSpec semi_disc(double attachment_radius, double radius_r, double radius_z,
                              double center_z) {
    if (!(attachment_radius > 0.0) || !(radius_r > 0.0) || !(radius_z > 0.0))
      throw std::invalid_argument("semi-disc needs positive attachment radius and semi-axes");
    RegionSpec s;
    s.shape = Shape::SemiDisc;
    s.tag = RegionTag::Deposit;
    s.attachment_radius = attachment_radius;
    s.radius_r = radius_r;
    s.radius_z = radius_z;
    s.center_z = center_z;
    return s;
  }

  static RegionSpec ellipse(double center_r, double center_z, double radius_r, double radius_z) {
    if (!(radius_r > 0.0) || !(radius_z > 0.0) || !(center_r - radius_r >= 0.0))
      throw std::invalid_argument("ellipse needs positive semi-axes and must stay in r >= 0");
    RegionSpec s;
    s.shape = Shape::Ellipse;
    s.tag = RegionTag::Deposit;
    s.center_r = center_r;
    s.center_z = center_z;
    s.radius_r = radius_r;
    s.radius_z = radius_z;
    return s;
  }

  static RegionSpec polygon_region(std::vector<Point2> pts) {
    if (pts.size() < 3) throw std::invalid_argument("polygon region needs at least 3 vertices");
    for (const auto& p : pts)
      if (!(p.r >= 0.0) || !std::isfinite(p.r) || !std::isfinite(p.z))
        throw std::invalid_argument("polygon region has a vertex outside r >= 0");
    RegionSpec s;
    s.shape = Shape::Polygon;
    s.tag = RegionTag::Deposit;
    s.polygon = std::move(pts);
    if (std::abs(s.signed_polygon_area()) <= 0.0)
      throw std::invalid_argument("polygon region has zero area");
    return s;
  }

  double signed_polygon_area() const {
    double a2 = 0.0;
    for (std::size_t i = 0, n = polygon.size(); i < n; ++i) {
      const Point2& p = polygon[i];
      const Point2& q = polygon[(i + 1) % n];
      a2 += p.r * q.z - q.r * p.z;
    }
    return 0.5 * a2;
  }

  bool contains(Point2 p) const {
    switch (shape) {
      case Shape::TubeAnnulus:
        return p.r >= inner_radius && p.r <= inner_radius + thickness;
      case Shape::SemiDisc: {
        if (p.r < attachment_radius) return false;
        const double xr = (p.r - attachment_radius) / radius_r;
        const double xz = (p.z - center_z) / radius_z;
        return xr * xr + xz * xz <= 1.0;
      }
      case Shape::Ellipse: {
        const double xr = (p.r - center_r) / radius_r;
        const double xz = (p.z - center_z) / radius_z;
        return xr * xr + xz * xz <= 1.0;
      }
      case Shape::Polygon: {
        // even-odd crossing rule
        bool inside = false;
        for (std::size_t i = 0, n = polygon.size(); i < n; ++i) {
          const Point2& a = polygon[i];
          const Point2& b = polygon[(i + 1) % n];
          if ((a.z > p.z) != (b.z > p.z)) {
            const double r_cross = a.r + (p.z - a.z) / (b.z - a.z) * (b.r - a.r);
            if (p.r < r_cross) inside = !inside;
          }
        }
        return inside;
      }
    }
    return false;
  }

  // Exact area of the region (meridian cross-section), used by quality metrics.
  double analytic_area() const {
    constexpr double pi = 3.14159265358979323846;
    switch (shape) {
      case Shape::TubeAnnulus:
        throw std::logic_error("tube annulus has unbounded meridian area");
      case Shape::SemiDisc:
        return 0.5 * pi * radius_r * radius_z;
      case Shape::Ellipse:
        return pi * radius_r * radius_z;
      case Shape::Polygon:
        return std::abs(signed_polygon_area());
    }
    return 0.0;
  }

  Point2 centroid() const {
    constexpr double pi = 3.14159265358979323846;
    switch (shape) {
      case Shape::TubeAnnulus:
        throw std::logic_error("tube annulus has no meridian centroid");
      case Shape::SemiDisc:
        return {attachment_radius + 4.0 * radius_r / (3.0 * pi), center_z};
      case Shape::Ellipse:
        return {center_r, center_z};
      case Shape::Polygon: {
        double a2 = 0.0, cr = 0.0, cz = 0.0;
        for (std::size_t i = 0, n = polygon.size(); i < n; ++i) {
          const Point2& p = polygon[i];
          const Point2& q = polygon[(i + 1) % n];
          const double w = p.r * q.z - q.r * p.z;
          a2 += w;
          cr += (p.r + q.r) * w;
          cz += (p.z + q.z) * w;
        }
        return {cr / (3.0 * a2), cz / (3.0 * a2)};
      }
    }
    return {};
  }

  // Bounding box in (r,z); the annulus is unbounded in z.
  void bounding_box(double& r_lo, double& r_hi, double& z_lo, double& z_hi) const {
    constexpr double inf = std::numeric_limits<double>::infinity();
    switch (shape) {
      case Shape::TubeAnnulus:
        r_lo = inner_radius; r_hi = inner_radius + thickness; z_lo = -inf; z_hi = inf;
        return;
      case Shape::SemiDisc:
        r_lo = attachment_radius; r_hi = attachment_radius + radius_r;
        z_lo = center_z - radius_z; z_hi = center_z + radius_z;
        return;
      case Shape::Ellipse:
        r_lo = center_r - radius_r; r_hi = center_r + radius_r;
        z_lo = center_z - radius_z; z_hi = center_z + radius_z;
        return;
      case Shape::Polygon:
        r_lo = z_lo = inf; r_hi = z_hi = -inf;
        for (const auto& p : polygon) {
          r_lo = std::min(r_lo, p.r); r_hi = std::max(r_hi, p.r);
          z_lo = std::min(z_lo, p.z); z_hi = std::max(z_hi, p.z);
        }
        return;
    }
  }
};

struct MeshLocation {
  int triangle = -1;
  std::array<double, 3> bary{};  // barycentric weights, sum to 1
};

// Conforming P1 triangulation of a rectangle [r0,r_max] x [z_min,z_max] built
// from two coordinate line arrays. Vertices are stored row major (z-row by
// z-row); each grid cell is split into two CCW triangles along the ll-ur
// diagonal.
struct Mesh {
  std::vector<Point2> vertices;
  std::vector<std::array<int, 3>> triangles;
  std::vector<BoundaryFlag> boundary_flags;  // per vertex
  std::vector<RegionTag> region_tags;        // per triangle
  std::vector<double> r_lines, z_lines;      // tensor structure, empty if unknown

  int n_vertices() const { return static_cast<int>(vertices.size()); }
  int n_triangles() const { return static_cast<int>(triangles.size()); }

  double area(int t) const {
    const auto& tri = triangles[t];
    const Point2 a = vertices[tri[0]], b = vertices[tri[1]], c = vertices[tri[2]];
    return 0.5 * ((b.r - a.r) * (c.z - a.z) - (c.r - a.r) * (b.z - a.z));
  }

  Point2 centroid(int t) const {
    const auto& tri = triangles[t];
    const Point2 a = vertices[tri[0]], b = vertices[tri[1]], c = vertices[tri[2]];
    return {(a.r + b.r + c.r) / 3.0, (a.z + b.z + c.z) / 3.0};
  }

  double r_min() const { return r_lines.empty() ? bbox_fallback(0) : r_lines.front(); }
  double r_max() const { return r_lines.empty() ? bbox_fallback(1) : r_lines.back(); }
  double z_min() const { return z_lines.empty() ? bbox_fallback(2) : z_lines.front(); }
  double z_max() const { return z_lines.empty() ? bbox_fallback(3) : z_lines.back(); }

  double bbox_fallback(int which) const {
    double v = (which == 0 || which == 2) ? std::numeric_limits<double>::infinity()
                                          : -std::numeric_limits<double>::infinity();
    for (const auto& p : vertices) {
      const double x = (which <= 1) ? p.r : p.z;
      v = (which == 0 || which == 2) ? std::min(v, x) : std::max(v, x);
    }
    return v;
  }

  // Cell lookup by binary search on the coordinate lines, then a diagonal test.
  // Points within a small tolerance of the rectangle border are clamped inside.
  MeshLocation locate(Point2 p) const {
    if (r_lines.size() < 2 || z_lines.size() < 2) return locate_by_scan(p);
    const double rl = r_lines.front(), rh = r_lines.back();
    const double zl = z_lines.front(), zh = z_lines.back();
    const double tol = 1e-12 * std::max({rh - rl, zh - zl, 1.0});
    if (p.r < rl - tol || p.r > rh + tol || p.z < zl - tol || p.z > zh + tol)
      throw std::invalid_argument("locate: point (" + std::to_string(p.r) + ", " +
                                  std::to_string(p.z) + ") is outside the mesh rectangle");
    const double pr = std::clamp(p.r, rl, rh);
    const double pz = std::clamp(p.z, zl, zh);
    const int ncol = static_cast<int>(r_lines.size());
    int ir = static_cast<int>(std::upper_bound(r_lines.begin(), r_lines.end(), pr) -
                              r_lines.begin()) - 1;
    int iz = static_cast<int>(std::upper_bound(z_lines.begin(), z_lines.end(), pz) -
                              z_lines.begin()) - 1;
    ir = std::clamp(ir, 0, ncol - 2);
    iz = std::clamp(iz, 0, static_cast<int>(z_lines.size()) - 2);
    const double s = (pr - r_lines[ir]) / (r_lines[ir + 1] - r_lines[ir]);
    const double t = (pz - z_lines[iz]) / (z_lines[iz + 1] - z_lines[iz]);
    const int cell = iz * (ncol - 1) + ir;
    const int tri = 2 * cell + (s >= t ? 0 : 1);
    return {tri, barycentric(tri, {pr, pz})};
  }

  MeshLocation locate_by_scan(Point2 p) const {
    for (int t = 0; t < n_triangles(); ++t) {
      auto b = barycentric(t, p);
      if (b[0] >= 0.0 && b[1] >= 0.0 && b[2] >= 0.0) return {t, b};
    }
    throw std::invalid_argument("locate: point is outside the mesh");
  }

  std::array<double, 3> barycentric(int t, Point2 p) const {
    const auto& tri = triangles[t];
    const Point2 a = vertices[tri[0]], b = vertices[tri[1]], c = vertices[tri[2]];
    const double den = (b.r - a.r) * (c.z - a.z) - (c.r - a.r) * (b.z - a.z);
    double l1 = ((b.r - p.r) * (c.z - p.z) - (c.r - p.r) * (b.z - p.z)) / den;
    double l2 = ((c.r - p.r) * (a.z - p.z) - (a.r - p.r) * (c.z - p.z)) / den;
    // Clean up roundoff so that border points report nonnegative weights.
    if (l1 > -1e-9 && l1 < 0.0) l1 = 0.0;
    if (l2 > -1e-9 && l2 < 0.0) l2 = 0.0;
    return {l1, l2, 1.0 - l1 - l2};
  }

  // Consistency checks: positive CCW areas and an exact area partition of the
  // bounding rectangle. Throws on violation.
  void validate() const {
    if (vertices.empty() || triangles.empty())
      throw std::runtime_error("mesh validate: empty mesh");
    if (boundary_flags.size() != vertices.size() || region_tags.size() != triangles.size())
      throw std::runtime_error("mesh validate: attribute arrays out of sync");
    double total = 0.0;
    for (int t = 0; t < n_triangles(); ++t) {
      const double a = area(t);
      if (!(a > 0.0))
        throw std::runtime_error("mesh validate: triangle " + std::to_string(t) +
                                 " is degenerate or clockwise");
      total += a;
    }
    const double rect = (r_max() - r_min()) * (z_max() - z_min());
    if (std::abs(total - rect) > 1e-10 * rect)
      throw std::runtime_error("mesh validate: triangle areas do not tile the rectangle");
  }
};

// Builds the triangulation for given coordinate lines. The first r line may sit
// at r = 0 (symmetry axis); every other border is a truncation boundary.
inline Mesh build_tensor_mesh(std::vector<double> r_lines, std::vector<double> z_lines) {
  auto check_lines = [](const std::vector<double>& v, const char* name) {
    if (v.size() < 2)
      throw std::invalid_argument(std::string(name) + " needs at least two coordinate lines");
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (!std::isfinite(v[i]))
        throw std::invalid_argument(std::string(name) + " has a non-finite entry");
      if (i > 0 && !(v[i] > v[i - 1]))
        throw std::invalid_argument(std::string(name) + " must be strictly increasing");
    }
  };
  check_lines(r_lines, "r_lines");
  check_lines(z_lines, "z_lines");
  if (r_lines.front() < 0.0)
    throw std::invalid_argument("r_lines must start at r >= 0");

  Mesh m;
  const int ncol = static_cast<int>(r_lines.size());
  const int nrow = static_cast<int>(z_lines.size());
  m.vertices.reserve(static_cast<std::size_t>(ncol) * nrow);
  m.boundary_flags.reserve(m.vertices.capacity());
  const bool has_axis = r_lines.front() == 0.0;
  for (int iz = 0; iz < nrow; ++iz) {
    for (int ir = 0; ir < ncol; ++ir) {
      m.vertices.push_back({r_lines[ir], z_lines[iz]});
      BoundaryFlag f = BoundaryFlag::Interior;
      if (iz == 0 || iz == nrow - 1 || ir == ncol - 1 || (ir == 0 && !has_axis))
        f = BoundaryFlag::Outer;
      if (ir == 0 && has_axis) f = BoundaryFlag::Axis;  // axis wins at the corners
      m.boundary_flags.push_back(f);
    }
  }
  m.triangles.reserve(2u * (ncol - 1) * (nrow - 1));
  for (int iz = 0; iz + 1 < nrow; ++iz) {
    for (int ir = 0; ir + 1 < ncol; ++ir) {
      const int ll = iz * ncol + ir;
      const int lr = ll + 1;
      const int ul = ll + ncol;
      const int ur = ul + 1;
      m.triangles.push_back({ll, lr, ur});
      m.triangles.push_back({ll, ur, ul});
    }
  }
  m.region_tags.assign(m.triangles.size(), RegionTag::Vacuum);
  m.r_lines = std::move(r_lines);
  m.z_lines = std::move(z_lines);
  return m;
}

inline std::vector<double> uniform_lines(double lo, double hi, double h) {
  if (!(hi > lo)) throw std::invalid_argument("uniform_lines: empty interval");
  if (!(h > 0.0)) throw std::invalid_argument("uniform_lines: step must be positive");
  const int n = std::max(1, static_cast<int>(std::ceil((hi - lo) / h - 1e-9)));
  std::vector<double> v(n + 1);
  for (int i = 0; i <= n; ++i) v[i] = lo + (hi - lo) * i / n;
  v.front() = lo;
  v.back() = hi;
  return v;
}

inline Mesh build_structured_mesh(double r_max, double z_min, double z_max, double h) {
  return build_tensor_mesh(uniform_lines(0.0, r_max, h), uniform_lines(z_min, z_max, h));
}

// Coordinate lines with uniform spacing h_fine inside [win_lo, win_hi] and
// geometric coarsening (factor `growth`, capped at h_coarse) towards lo and hi.
inline std::vector<double> graded_lines(double lo, double hi, double win_lo, double win_hi,
                                        double h_fine, double h_coarse, double growth = 1.4) {
  if (!(hi > lo)) throw std::invalid_argument("graded_lines: empty interval");
  if (!(h_fine > 0.0) || !(h_coarse >= h_fine) || !(growth > 1.0))
    throw std::invalid_argument("graded_lines: need 0 < h_fine <= h_coarse and growth > 1");
  win_lo = std::max(win_lo, lo);
  win_hi = std::min(win_hi, hi);
  if (!(win_hi > win_lo))
    throw std::invalid_argument("graded_lines: fine window does not meet the interval");

  std::vector<double> fine;
  const int n = std::max(1, static_cast<int>(std::round((win_hi - win_lo) / h_fine)));
  for (int i = 0; i <= n; ++i) fine.push_back(win_lo + (win_hi - win_lo) * i / n);

  auto extend = [&](double from, double limit, int dir) {
    std::vector<double> out;
    double pos = from;
    double step = h_fine;
    while (dir * (limit - pos) > 1e-12 * (hi - lo)) {
      step = std::min(step * growth, h_coarse);
      double next = pos + dir * step;
      // absorb a short final step into the endpoint instead of leaving a sliver
      if (dir * (limit - next) < 0.45 * step) next = limit;
      out.push_back(next);
      pos = next;
    }
    return out;
  };

  std::vector<double> lines;
  auto below = extend(win_lo, lo, -1);
  lines.assign(below.rbegin(), below.rend());
  lines.insert(lines.end(), fine.begin(), fine.end());
  auto above = extend(win_hi, hi, +1);
  lines.insert(lines.end(), above.begin(), above.end());
  return lines;
}

// Moves the nearest interior line onto `value` (or inserts one) so material
// interfaces coincide with mesh lines. Lines closer than merge_tol are fused.
inline void snap_line(std::vector<double>& lines, double value, double merge_tol) {
  if (lines.size() < 2 || value <= lines.front() || value >= lines.back())
    throw std::invalid_argument("snap_line: value must be strictly inside the line range");
  std::vector<double> kept;
  kept.reserve(lines.size() + 1);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const bool endpoint = (i == 0 || i + 1 == lines.size());
    if (!endpoint && std::abs(lines[i] - value) <= merge_tol) continue;
    kept.push_back(lines[i]);
  }
  kept.insert(std::upper_bound(kept.begin(), kept.end(), value), value);
  lines = std::move(kept);
}

// Tags triangles by centroid membership. Overlapping specs are an error, not a
// precedence rule; untouched triangles stay Vacuum. Retagging is idempotent.
inline void tag_regions(Mesh& mesh, const std::vector<RegionSpec>& specs) {
  for (int t = 0; t < mesh.n_triangles(); ++t) {
    const Point2 c = mesh.centroid(t);
    int hit = -1;
    for (std::size_t s = 0; s < specs.size(); ++s) {
      if (!specs[s].contains(c)) continue;
      if (hit >= 0)
        throw std::invalid_argument(
            "tag_regions: triangle " + std::to_string(t) + " centroid (" + std::to_string(c.r) +
            ", " + std::to_string(c.z) + ") lies in overlapping regions " + std::to_string(hit) +
            " and " + std::to_string(s));
      hit = static_cast<int>(s);
    }
    mesh.region_tags[t] = hit < 0 ? RegionTag::Vacuum : specs[hit].tag;
  }
}

}  // namespace eclsm
