#pragma once

#include <json.hpp>

#include "slsdp/model.hpp"

namespace slsdp {

/// {"nx", "nu", "ny", "A", "B", "C"} with row-major nested arrays.
nlohmann::json to_json(const Plant& plant);
Plant plant_from_json(const nlohmann::json& doc);

/// {"nx", "nu", "ny", "T", "phi_xx", "phi_xy", "phi_ux", "phi_uy"}; each
/// phi key holds one matrix (row-major nested arrays) per step 0..T.
nlohmann::json to_json(const SystemResponse& resp);
SystemResponse response_from_json(const nlohmann::json& doc);

/// Response document with the plant fields embedded, so a verify run needs
/// no side channel for A, B, C.
nlohmann::json response_document(const Plant& plant,
                                 const SystemResponse& resp);

nlohmann::json to_json(const ResidualReport& report);

}  // namespace slsdp
