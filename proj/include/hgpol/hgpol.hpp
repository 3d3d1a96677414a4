#pragma once

#include "beam.hpp"
#include "errors.hpp"
#include "figures.hpp"
#include "log_signed.hpp"
#include "oracle.hpp"
#include "polarization.hpp"
#include "quadrature.hpp"
#include "scenario_config.hpp"
#include "scenario_run.hpp"
#include "special_math.hpp"
#include "turbulence.hpp"
