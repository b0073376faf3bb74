#pragma once

#include <string>

#include "fracvar/energy_model.hpp"

namespace fracvar {

inline constexpr const char* kModelSchema = "fracvar.model/1";

/// JSON export of a model: dofs (coordinates, boundary flags, lumped mass),
/// region labels, fibers (dimension, weight, gradient row offset, center,
/// frame) and the gradient matrix as (row, column, value) triplets. The
/// layout is documented in docs/schemas.md.
std::string export_model_json(const EnergyModel& model);

/// Shortest decimal text that reads back to the same double (at most 17
/// significant digits).
std::string format_double(double value);

}  // namespace fracvar
