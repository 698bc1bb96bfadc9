#pragma once

#include "meroren/germ.hpp"

#include <nlohmann/json.hpp>

namespace meroren {

/// {center, singular: [{numerator, poles: [[coeffs, power]]}], holomorphic}
nlohmann::json to_json(const Decomposition<GaussRational>& d);
nlohmann::json to_json(const Decomposition<Complex>& d);

nlohmann::json poles_to_json(const PoleSet& poles);
PoleSet poles_from_json(const nlohmann::json& j);

/// Reads back an exact decomposition written by to_json.
Decomposition<GaussRational> exact_decomposition_from_json(const nlohmann::json& j);

}  // namespace meroren
