#pragma once

#include "ltt/model.hpp"

#include <json.hpp>
#include <string>

namespace ltt {

nlohmann::json params_to_json(const ModelParams& p);
ModelParams params_from_json(const nlohmann::json& j);

// Writes <stem>.bin (row-major IEEE-754 doubles of X) and <stem>.json
// (params, labels, coefficients).
void dump_dataset(const Dataset& data, const std::string& stem);
Dataset load_dataset(const std::string& stem);

}  // namespace ltt
