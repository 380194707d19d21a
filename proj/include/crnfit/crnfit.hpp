#pragma once

#include "crnfit/abm.hpp"
#include "crnfit/eql.hpp"
#include "crnfit/errors.hpp"
#include "crnfit/io.hpp"
#include "crnfit/ode_sim.hpp"
#include "crnfit/polynomial_ode.hpp"
#include "crnfit/reactions.hpp"
#include "crnfit/report.hpp"
#include "crnfit/rng.hpp"
#include "crnfit/solvers.hpp"
#include "crnfit/ssa.hpp"
#include "crnfit/timeseries.hpp"
#include "crnfit/version.hpp"
