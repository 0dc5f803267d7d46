#pragma once

#include "bargmann/errors.hpp"
#include "bargmann/matrix_core.hpp"
#include "bargmann/gauss_quad.hpp"
#include "bargmann/polynomial.hpp"
#include "bargmann/bargmann_op.hpp"
#include "bargmann/norm_opt.hpp"
#include "bargmann/duality_check.hpp"
