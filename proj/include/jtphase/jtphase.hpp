#pragma once

// Umbrella header.

#include "jtphase/core/error.hpp"
#include "jtphase/core/grid.hpp"
#include "jtphase/core/mat2.hpp"
#include "jtphase/core/quadrature.hpp"
#include "jtphase/core/special.hpp"
#include "jtphase/core/summation.hpp"
#include "jtphase/ed/eigensolver.hpp"
#include "jtphase/ed/jahn_teller.hpp"
#include "jtphase/io/format.hpp"
#include "jtphase/jt/model.hpp"
#include "jtphase/phase/field.hpp"
#include "jtphase/phase/functionals.hpp"
#include "jtphase/phase/polar.hpp"
#include "jtphase/tdse/propagator.hpp"
#include "jtphase/tdse/scenario.hpp"
#include "jtphase/tdse/validate.hpp"
