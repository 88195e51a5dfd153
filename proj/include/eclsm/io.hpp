#pragma once
// On-disk formats. All numeric text uses shortest round-trip formatting, so
// save/load/save cycles are byte identical. Every file starts with a version
// comment that also carries the identifying hash of the generating
// configuration (zero when not applicable).

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "eclsm/config.hpp"
#include "eclsm/lsm.hpp"
#include "eclsm/mesh.hpp"
#include "eclsm/synth.hpp"

namespace eclsm {

namespace detail {

inline std::string hash_hex(std::uint64_t h) {
  static const char* digits = "0123456789abcdef";
  std::string s(16, '0');
  for (int i = 15; i >= 0; --i) {
    s[i] = digits[h & 0xf];
    h >>= 4;
  }
  return s;
}

inline std::uint64_t parse_hash_hex(const std::string& s) {
  std::uint64_t h = 0;
  for (char c : s) {
    h <<= 4;
    if (c >= '0' && c <= '9')
      h |= static_cast<std::uint64_t>(c - '0');
    else if (c >= 'a' && c <= 'f')
      h |= static_cast<std::uint64_t>(c - 'a' + 10);
    else
      throw std::invalid_argument("malformed hash in file header");
  }
  return h;
}

inline void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  out << content;
  out.flush();
  if (!out) throw std::runtime_error("write to '" + path + "' failed");
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  // a path the caller handed us that does not resolve is their error, not an
  // environment failure, hence invalid_argument and CLI exit code 1
  if (!in) throw std::invalid_argument("cannot open '" + path + "' for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Header check: "# eclsm-<what> v1 cfg=<hex16>". Returns the hash.
inline std::uint64_t parse_header(const std::string& line, const std::string& what,
                                  const std::string& path) {
  const std::string prefix = "# eclsm-" + what + " v";
  if (line.rfind(prefix, 0) != 0)
    throw std::invalid_argument("'" + path + "': not an eclsm " + what + " file");
  const auto sp = line.find(' ', prefix.size() - 1);
  const std::string version = line.substr(prefix.size(), sp - prefix.size());
  if (version != "1")
    throw std::invalid_argument("'" + path + "': unsupported " + what + " version " + version);
  const auto cfg = line.find("cfg=");
  if (cfg == std::string::npos)
    throw std::invalid_argument("'" + path + "': header misses the cfg hash");
  return parse_hash_hex(detail::trim(line.substr(cfg + 4)));
}

// Whitespace tokenizer with exact double parsing and line tracking for error
// messages.
class TokenReader {
 public:
  TokenReader(const std::string& text, std::string path, int first_line)
      : in_(text), path_(std::move(path)), line_(first_line) {}

  std::string next(const char* what) {
    std::string tok;
    while (true) {
      if (pos_ >= in_.size()) fail(std::string("unexpected end of file, expected ") + what);
      const char c = in_[pos_];
      if (c == '\n') {
        ++line_;
        ++pos_;
      } else if (c == ' ' || c == '\t' || c == '\r' || c == ',') {
        ++pos_;
      } else {
        break;
      }
    }
    while (pos_ < in_.size() && !std::isspace(static_cast<unsigned char>(in_[pos_])) &&
           in_[pos_] != ',')
      tok += in_[pos_++];
    return tok;
  }

  double next_double(const char* what) {
    const std::string tok = next(what);
    double v;
    if (!detail::parse_double(tok, v))
      fail("bad number '" + tok + "' for " + what);
    return v;
  }

  long long next_int(const char* what) {
    const std::string tok = next(what);
    long long v;
    if (!detail::parse_int(tok, v)) fail("bad integer '" + tok + "' for " + what);
    return v;
  }

  std::uint64_t next_uint64(const char* what) {
    const std::string tok = next(what);
    std::uint64_t v;
    if (!detail::parse_uint64(tok, v)) fail("bad integer '" + tok + "' for " + what);
    return v;
  }

  [[noreturn]] void fail(const std::string& msg) {
    throw std::invalid_argument("'" + path_ + "' line " + std::to_string(line_) + ": " + msg);
  }

 private:
  const std::string& in_;
  std::string path_;
  std::size_t pos_ = 0;
  int line_;
};

}  // namespace detail

// ---------------------------------------------------------------------------
// Multistatic matrix

inline void save_matrix(const std::string& path, const MultistaticMatrix& m,
                        std::uint64_t cfg_hash = 0) {
  std::ostringstream out;
  out << "# eclsm-matrix v1 cfg=" << detail::hash_hex(cfg_hash) << "\n";
  out << m.size() << " " << detail::format_double(m.delta) << " " << m.band << " "
      << (m.kind == ProbeArray::Kind::Point ? "point" : "coil") << " " << m.seed << "\n";
  for (int i = 0; i < m.size(); ++i) {
    for (int j = 0; j < m.size(); ++j) {
      if (j) out << " ";
      out << detail::format_double(m.z(i, j).real()) << " "
          << detail::format_double(m.z(i, j).imag());
    }
    out << "\n";
  }
  detail::write_file(path, out.str());
}

struct LoadedMatrix {
  MultistaticMatrix matrix;
  std::uint64_t cfg_hash = 0;
};

inline LoadedMatrix load_matrix(const std::string& path) {
  const std::string text = detail::read_file(path);
  const auto nl = text.find('\n');
  if (nl == std::string::npos) throw std::invalid_argument("'" + path + "': empty file");
  LoadedMatrix out;
  out.cfg_hash = detail::parse_header(text.substr(0, nl), "matrix", path);

  const std::string body = text.substr(nl + 1);
  detail::TokenReader tok(body, path, 2);
  const long long n = tok.next_int("matrix size");
  if (n < 1 || n > 100000) tok.fail("implausible matrix size " + std::to_string(n));
  out.matrix.delta = tok.next_double("delta");
  out.matrix.band = static_cast<int>(tok.next_int("band parameter"));
  const std::string kind = tok.next("probe kind");
  if (kind == "point")
    out.matrix.kind = ProbeArray::Kind::Point;
  else if (kind == "coil")
    out.matrix.kind = ProbeArray::Kind::Coil;
  else
    tok.fail("unknown probe kind '" + kind + "'");
  out.matrix.seed = tok.next_uint64("seed");

  out.matrix.z.resize(n, n);
  for (long long i = 0; i < n; ++i)
    for (long long j = 0; j < n; ++j) {
      const double re = tok.next_double("matrix entry (re)");
      const double im = tok.next_double("matrix entry (im)");
      out.matrix.z(i, j) = Complex(re, im);
    }
  return out;
}

// ---------------------------------------------------------------------------
// Mesh

inline void save_mesh(const std::string& path, const Mesh& mesh, std::uint64_t cfg_hash = 0) {
  std::ostringstream out;
  out << "# eclsm-mesh v1 cfg=" << detail::hash_hex(cfg_hash) << "\n";
  out << "vertices " << mesh.n_vertices() << " triangles " << mesh.n_triangles() << "\n";
  for (int v = 0; v < mesh.n_vertices(); ++v)
    out << detail::format_double(mesh.vertices[v].r) << " "
        << detail::format_double(mesh.vertices[v].z) << " "
        << static_cast<int>(mesh.boundary_flags[v]) << "\n";
  for (int t = 0; t < mesh.n_triangles(); ++t)
    out << mesh.triangles[t][0] << " " << mesh.triangles[t][1] << " " << mesh.triangles[t][2]
        << " " << static_cast<int>(mesh.region_tags[t]) << "\n";
  detail::write_file(path, out.str());
}

inline Mesh load_mesh(const std::string& path) {
  const std::string text = detail::read_file(path);
  const auto nl = text.find('\n');
  if (nl == std::string::npos) throw std::invalid_argument("'" + path + "': empty file");
  detail::parse_header(text.substr(0, nl), "mesh", path);

  const std::string body = text.substr(nl + 1);
  detail::TokenReader tok(body, path, 2);
  if (tok.next("'vertices'") != "vertices") tok.fail("expected 'vertices'");
  const long long nv = tok.next_int("vertex count");
  if (tok.next("'triangles'") != "triangles") tok.fail("expected 'triangles'");
  const long long nt = tok.next_int("triangle count");
  if (nv < 3 || nt < 1) tok.fail("implausible mesh sizes");

  Mesh mesh;
  mesh.vertices.resize(nv);
  mesh.boundary_flags.resize(nv);
  for (long long v = 0; v < nv; ++v) {
    mesh.vertices[v].r = tok.next_double("vertex r");
    mesh.vertices[v].z = tok.next_double("vertex z");
    const long long f = tok.next_int("boundary flag");
    if (f < 0 || f > 2) tok.fail("boundary flag out of range");
    mesh.boundary_flags[v] = static_cast<BoundaryFlag>(f);
  }
  mesh.triangles.resize(nt);
  mesh.region_tags.resize(nt);
  for (long long t = 0; t < nt; ++t) {
    for (int k = 0; k < 3; ++k) {
      const long long idx = tok.next_int("triangle vertex");
      if (idx < 0 || idx >= nv) tok.fail("triangle vertex index out of range");
      mesh.triangles[t][k] = static_cast<int>(idx);
    }
    const long long tag = tok.next_int("region tag");
    if (tag < 0 || tag > 2) tok.fail("region tag out of range");
    mesh.region_tags[t] = static_cast<RegionTag>(tag);
  }

  // Recover tensor structure for fast lookup: vertices are row major when the
  // mesh came from the builders. If the pattern does not hold, lookups fall
  // back to a linear scan.
  int ncol = 0;
  while (ncol < mesh.n_vertices() && mesh.vertices[ncol].z == mesh.vertices[0].z) ++ncol;
  if (ncol >= 2 && mesh.n_vertices() % ncol == 0) {
    const int nrow = mesh.n_vertices() / ncol;
    bool grid = true;
    for (int iz = 0; iz < nrow && grid; ++iz)
      for (int ir = 0; ir < ncol && grid; ++ir) {
        const Point2 p = mesh.vertices[iz * ncol + ir];
        grid = p.r == mesh.vertices[ir].r && p.z == mesh.vertices[iz * ncol].z;
      }
    if (grid) {
      for (int ir = 0; ir < ncol; ++ir) mesh.r_lines.push_back(mesh.vertices[ir].r);
      for (int iz = 0; iz < nrow; ++iz) mesh.z_lines.push_back(mesh.vertices[iz * ncol].z);
    }
  }
  mesh.validate();
  return mesh;
}

// ---------------------------------------------------------------------------
// Indicator maps

inline void save_indicator(const std::string& path, const IndicatorField& ind,
                           std::uint64_t cfg_hash = 0) {
  std::ostringstream out;
  out << "# eclsm-indicator v1 cfg=" << detail::hash_hex(cfg_hash) << "\n";
  const SamplingGrid& g = ind.grid;
  out << "# grid " << detail::format_double(g.r_lo) << " " << detail::format_double(g.r_hi)
      << " " << detail::format_double(g.z_lo) << " " << detail::format_double(g.z_hi) << " "
      << g.n_r << " " << g.n_z << "\n";
  out << "r,z,raw,normalized,epsilon,flag\n";
  for (int iz = 0; iz < g.n_z; ++iz)
    for (int ir = 0; ir < g.n_r; ++ir) {
      const int i = g.index(ir, iz);
      const Point2 p = g.point(ir, iz);
      out << detail::format_double(p.r) << "," << detail::format_double(p.z) << ","
          << detail::format_double(ind.raw[i]) << "," << detail::format_double(ind.normalized[i])
          << "," << detail::format_double(ind.epsilon[i]) << "," << ind.flag[i] << "\n";
    }
  detail::write_file(path, out.str());
}

inline IndicatorField load_indicator(const std::string& path) {
  const std::string text = detail::read_file(path);
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw std::invalid_argument("'" + path + "': empty file");
  detail::parse_header(line, "indicator", path);
  if (!std::getline(in, line) || line.rfind("# grid ", 0) != 0)
    throw std::invalid_argument("'" + path + "': missing grid line");
  IndicatorField ind;
  {
    const std::string rest = line.substr(7);
    detail::TokenReader tok(rest, path, 2);
    ind.grid.r_lo = tok.next_double("grid r_lo");
    ind.grid.r_hi = tok.next_double("grid r_hi");
    ind.grid.z_lo = tok.next_double("grid z_lo");
    ind.grid.z_hi = tok.next_double("grid z_hi");
    ind.grid.n_r = static_cast<int>(tok.next_int("grid n_r"));
    ind.grid.n_z = static_cast<int>(tok.next_int("grid n_z"));
  }
  ind.grid.validate();
  if (!std::getline(in, line) || line != "r,z,raw,normalized,epsilon,flag")
    throw std::invalid_argument("'" + path + "': missing column header");
  const int n = ind.grid.size();
  ind.raw.resize(n);
  ind.normalized.resize(n);
  ind.epsilon.resize(n);
  ind.flag.resize(n);
  std::string rows(text.substr(static_cast<std::size_t>(in.tellg())));
  detail::TokenReader tok(rows, path, 4);
  for (int iz = 0; iz < ind.grid.n_z; ++iz)
    for (int ir = 0; ir < ind.grid.n_r; ++ir) {
      const int i = ind.grid.index(ir, iz);
      tok.next_double("r");
      tok.next_double("z");
      ind.raw[i] = tok.next_double("raw");
      ind.normalized[i] = tok.next_double("normalized");
      ind.epsilon[i] = tok.next_double("epsilon");
      ind.flag[i] = static_cast<int>(tok.next_int("flag"));
    }
  return ind;
}

// Greymap preview of the normalized indicator, one pixel per grid cell,
// z increasing upward (top scanline is the largest z).
inline void save_indicator_pgm(const std::string& path, const IndicatorField& ind,
                               std::uint64_t cfg_hash = 0) {
  std::ostringstream out;
  out << "P2\n";
  out << "# eclsm-indicator-pgm v1 cfg=" << detail::hash_hex(cfg_hash) << "\n";
  out << ind.grid.n_r << " " << ind.grid.n_z << "\n255\n";
  for (int iz = ind.grid.n_z - 1; iz >= 0; --iz) {
    for (int ir = 0; ir < ind.grid.n_r; ++ir) {
      if (ir) out << " ";
      const double v = ind.normalized[ind.grid.index(ir, iz)];
      out << static_cast<int>(std::lround(255.0 * std::clamp(v, 0.0, 1.0)));
    }
    out << "\n";
  }
  detail::write_file(path, out.str());
}

// ---------------------------------------------------------------------------
// Nodal fields

inline void save_field_csv(const std::string& path, const ComplexField& field,
                           std::uint64_t cfg_hash = 0) {
  std::ostringstream out;
  out << "# eclsm-field v1 cfg=" << detail::hash_hex(cfg_hash) << "\n";
  out << "r,z,re,im\n";
  for (int v = 0; v < field.mesh->n_vertices(); ++v) {
    const Point2 p = field.mesh->vertices[v];
    out << detail::format_double(p.r) << "," << detail::format_double(p.z) << ","
        << detail::format_double(field.values[v].real()) << ","
        << detail::format_double(field.values[v].imag()) << "\n";
  }
  detail::write_file(path, out.str());
}

}  // namespace eclsm
