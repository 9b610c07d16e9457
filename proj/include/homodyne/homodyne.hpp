#pragma once

#include "homodyne/compensation.hpp"
#include "homodyne/detector_sim.hpp"
#include "homodyne/fock.hpp"
#include "homodyne/phase.hpp"
#include "homodyne/quadrature.hpp"
#include "homodyne/smearing.hpp"
