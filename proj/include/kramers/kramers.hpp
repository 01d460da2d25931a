#pragma once

#include "kramers/bath.hpp"
#include "kramers/constants.hpp"
#include "kramers/error.hpp"
#include "kramers/fit.hpp"
#include "kramers/fokker_planck.hpp"
#include "kramers/io.hpp"
#include "kramers/langevin.hpp"
#include "kramers/parallel.hpp"
#include "kramers/potential.hpp"
#include "kramers/rate.hpp"
#include "kramers/rng.hpp"
#include "kramers/units.hpp"
