#pragma once

#include <string>

#include "json.hpp"
#include "pnorm/model.hpp"

namespace pnorm {

void to_json(nlohmann::json& j, const SolveReport& report);
void from_json(const nlohmann::json& j, SolveReport& report);

// Serialized report with every field except wall_time; equal for reruns of
// the same input.
std::string deterministic_fingerprint(const SolveReport& report);

}  // namespace pnorm
