#pragma once

#include "pfdtd/core.hpp"
#include "pfdtd/grid.hpp"
#include "pfdtd/materials.hpp"
#include "pfdtd/scalar_solver.hpp"
#include "pfdtd/vector_solver.hpp"
#include "pfdtd/dissipation.hpp"
#include "pfdtd/system_matrices.hpp"
#include "pfdtd/cavity.hpp"
#include "pfdtd/config.hpp"
#include "pfdtd/io.hpp"
#include "pfdtd/experiment.hpp"
