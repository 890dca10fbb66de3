#pragma once

#include "diracwalk/coin.hpp"
#include "diracwalk/dispersion.hpp"
#include "diracwalk/error.hpp"
#include "diracwalk/evolve.hpp"
#include "diracwalk/experiment.hpp"
#include "diracwalk/geometry.hpp"
#include "diracwalk/io.hpp"
#include "diracwalk/lattice.hpp"
#include "diracwalk/measure.hpp"
