#pragma once
// Umbrella header.

#include "eclsm/config.hpp"
#include "eclsm/forward.hpp"
#include "eclsm/green.hpp"
#include "eclsm/io.hpp"
#include "eclsm/lsm.hpp"
#include "eclsm/materials.hpp"
#include "eclsm/mesh.hpp"
#include "eclsm/parallel.hpp"
#include "eclsm/quadrature.hpp"
#include "eclsm/scenario.hpp"
#include "eclsm/synth.hpp"

namespace eclsm {
inline constexpr const char* kVersion = "1.0.0";
}
