#pragma once

#include "fracvar/analysis.hpp"
#include "fracvar/calculus.hpp"
#include "fracvar/energy_model.hpp"
#include "fracvar/errors.hpp"
#include "fracvar/serialize.hpp"
#include "fracvar/sierpinski.hpp"
#include "fracvar/solvers.hpp"
