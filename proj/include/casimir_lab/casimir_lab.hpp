#pragma once

#include "casimir_lab/constants.hpp"
#include "casimir_lab/csv.hpp"
#include "casimir_lab/electrostatics.hpp"
#include "casimir_lab/error.hpp"
#include "casimir_lab/fitstats.hpp"
#include "casimir_lab/geometry_pfa.hpp"
#include "casimir_lab/lifshitz.hpp"
#include "casimir_lab/permittivity.hpp"
#include "casimir_lab/quadrature.hpp"
