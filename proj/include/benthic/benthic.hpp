#pragma once

#include "benthic/error.hpp"
#include "benthic/numerics.hpp"
#include "benthic/growth.hpp"
#include "benthic/model.hpp"
#include "benthic/discretization.hpp"
#include "benthic/lyapunov.hpp"
#include "benthic/timestepper.hpp"
#include "benthic/steadystate.hpp"
#include "benthic/spectral.hpp"
#include "benthic/config.hpp"
#include "benthic/csv.hpp"
#include "benthic/experiments.hpp"
