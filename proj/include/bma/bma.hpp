#pragma once

#include "bma/calibration.hpp"
#include "bma/config.hpp"
#include "bma/errors.hpp"
#include "bma/estimator.hpp"
#include "bma/evaluation.hpp"
#include "bma/fixed_point.hpp"
#include "bma/geometry.hpp"
#include "bma/material.hpp"
#include "bma/quadrature.hpp"
#include "bma/shape_export.hpp"
#include "bma/simulator.hpp"
#include "bma/trace.hpp"
#include "bma/units.hpp"
