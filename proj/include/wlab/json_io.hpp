#pragma once

#include <json.hpp>

#include "wlab/polyconc.hpp"
#include "wlab/quadrature.hpp"
#include "wlab/stability.hpp"
#include "wlab/symrep.hpp"

namespace wlab {

using json = nlohmann::json;

// Schemas round-trip exactly: doubles are emitted with the shortest
// representation that parses back to the same bits (up to 17 significant
// digits). Non-finite ratios serialize as null.

json to_json(const StateVector& psi);
StateVector state_from_json(const json& j);

json to_json(const DensityOperator& rho);
DensityOperator density_from_json(const json& j);

json to_json(const ChartPolynomial& F);
ChartPolynomial polynomial_from_json(const json& j);

json to_json(const QuadratureResult& q);

json to_json(const StabilityReport& rep);

json to_json(const ConcentrationReport& rep, const StabilityReport* stability = nullptr);

}  // namespace wlab
