#pragma once

#include "stiefel/errors.hpp"
#include "stiefel/dense_linalg.hpp"
#include "stiefel/geometry.hpp"
#include "stiefel/ssaf.hpp"
#include "stiefel/problem_gen.hpp"
#include "stiefel/oracle.hpp"
#include "stiefel/bench.hpp"
