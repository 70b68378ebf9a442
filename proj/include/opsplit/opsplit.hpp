#pragma once

#include "opsplit/analysis.hpp"
#include "opsplit/errors.hpp"
#include "opsplit/linalg.hpp"
#include "opsplit/models.hpp"
#include "opsplit/operator.hpp"
#include "opsplit/propagate.hpp"
#include "opsplit/quadrature.hpp"
#include "opsplit/schemes.hpp"
#include "opsplit/trajectory.hpp"
