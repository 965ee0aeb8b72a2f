#pragma once

// Umbrella header for the fracvar library.

#include "fracvar/cli.hpp"
#include "fracvar/errors.hpp"
#include "fracvar/expr.hpp"
#include "fracvar/fracops.hpp"
#include "fracvar/gamma.hpp"
#include "fracvar/grid.hpp"
#include "fracvar/problem.hpp"
#include "fracvar/problem_file.hpp"
#include "fracvar/report.hpp"
#include "fracvar/solvers.hpp"
#include "fracvar/variational.hpp"
