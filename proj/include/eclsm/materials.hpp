#pragma once
// Electromagnetic material data: conductivity and permeability per region,
// expanded to per-triangle coefficient arrays for assembly. The reference
// configuration ignores deposits (deposit triangles get vacuum values); the
// perturbed configuration applies them.

#include <cmath>
#include <stdexcept>
#include <vector>

#include "eclsm/mesh.hpp"

namespace eclsm {

constexpr double kPi = 3.14159265358979323846;
constexpr double kMuVacuum = 4.0e-7 * kPi;  // [H/m]

struct MaterialProps {
  double sigma = 0.0;  // conductivity [S/m]
  double mu = kMuVacuum;  // permeability [H/m]
};

struct MaterialTable {
  MaterialProps vacuum{0.0, kMuVacuum};
  MaterialProps tube{0.97e3, 4.04e-7 * kPi};
  MaterialProps deposit{1.75e3, 4.04e-7 * kPi};
  // When set, the deposit permeability is replaced by the vacuum value so the
  // scattering contrast is purely conductive.
  bool force_mu_match = false;

  void validate() const {
    auto check = [](const MaterialProps& p, const char* name) {
      if (!(p.mu > 0.0) || !std::isfinite(p.mu))
        throw std::invalid_argument(std::string("material ") + name + ": mu must be positive");
      if (!(p.sigma >= 0.0) || !std::isfinite(p.sigma))
        throw std::invalid_argument(std::string("material ") + name +
                                    ": sigma must be nonnegative");
    };
    check(vacuum, "vacuum");
    check(tube, "tube");
    check(deposit, "deposit");
    if (vacuum.sigma != 0.0)
      throw std::invalid_argument("material vacuum: sigma must be exactly zero");
  }

  MaterialProps props_for(RegionTag tag, bool perturbed) const {
    switch (tag) {
      case RegionTag::Vacuum:
        return vacuum;
      case RegionTag::Tube:
        return tube;
      case RegionTag::Deposit: {
        if (!perturbed) return vacuum;  // reference medium has no deposit
        MaterialProps p = deposit;
        if (force_mu_match) p.mu = vacuum.mu;
        return p;
      }
    }
    return vacuum;
  }
};

inline MaterialTable default_materials() { return {}; }

// Per-triangle coefficients for one configuration of one mesh.
struct MaterialField {
  const Mesh* mesh = nullptr;
  bool perturbed = false;
  std::vector<double> sigma;  // [S/m], per triangle
  std::vector<double> mu;     // [H/m], per triangle
};

inline MaterialField coefficient_field(const Mesh& mesh, const MaterialTable& table,
                                       bool perturbed) {
  table.validate();
  MaterialField f;
  f.mesh = &mesh;
  f.perturbed = perturbed;
  f.sigma.resize(mesh.n_triangles());
  f.mu.resize(mesh.n_triangles());
  for (int t = 0; t < mesh.n_triangles(); ++t) {
    const MaterialProps p = table.props_for(mesh.region_tags[t], perturbed);
    f.sigma[t] = p.sigma;
    f.mu[t] = p.mu;
  }
  return f;
}

}  // namespace eclsm
