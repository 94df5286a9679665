#pragma once

// Umbrella header for the uncertain-DEA classification library.

#include "equiclass/assembly.hpp"
#include "equiclass/cli.hpp"
#include "equiclass/conic.hpp"
#include "equiclass/csv.hpp"
#include "equiclass/dea.hpp"
#include "equiclass/errors.hpp"
#include "equiclass/model.hpp"
#include "equiclass/parallel.hpp"
#include "equiclass/proximity.hpp"
#include "equiclass/search.hpp"
#include "equiclass/seeding.hpp"
#include "equiclass/solver.hpp"
#include "equiclass/svg.hpp"
