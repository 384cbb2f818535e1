#pragma once

#include "drqr/bounds.hpp"
#include "drqr/constants.hpp"
#include "drqr/core.hpp"
#include "drqr/csv.hpp"
#include "drqr/experiments.hpp"
#include "drqr/fixed_design.hpp"
#include "drqr/robust_eval.hpp"
#include "drqr/solver.hpp"
#include "drqr/worst_case.hpp"
