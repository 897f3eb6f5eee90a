#pragma once

#include "deadbeat/errors.hpp"
#include "deadbeat/linear_deadbeat.hpp"
#include "deadbeat/nonlinear_examples.hpp"
#include "deadbeat/random_systems.hpp"
#include "deadbeat/simulate.hpp"
#include "deadbeat/subspace.hpp"
