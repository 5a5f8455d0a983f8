#pragma once

#include "nlsbif/soliton_potential.hpp"
#include "nlsbif/grid_quadrature.hpp"
#include "nlsbif/operator_assembly.hpp"
#include "nlsbif/expansion_solver.hpp"
#include "nlsbif/direct_spectrum.hpp"
#include "nlsbif/reporting.hpp"
