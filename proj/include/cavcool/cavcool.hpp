#ifndef CAVCOOL_CAVCOOL_HPP
#define CAVCOOL_CAVCOOL_HPP

// Simulation and analysis library. io.hpp and presets.hpp are separate
// because they need nlohmann/json.

#include "cavcool/bessel.hpp"
#include "cavcool/core.hpp"
#include "cavcool/dynamics.hpp"
#include "cavcool/ensemble.hpp"
#include "cavcool/meanfield.hpp"
#include "cavcool/observables.hpp"
#include "cavcool/random.hpp"

#endif // CAVCOOL_CAVCOOL_HPP
