#pragma once

#include "nccz/funcspace.hpp"

#include <nlohmann/json_fwd.hpp>

#include <string>

namespace nccz {

/// Field serialization: {grid, level, cells: [[re,im] d*d row-major per cell]}.
nlohmann::json field_to_json(const OperatorField& f);
OperatorField field_from_json(const nlohmann::json& j);

nlohmann::json grid_to_json(const GridSpec& g);
GridSpec grid_from_json(const nlohmann::json& j);

/// Writes text through a temporary file and renames it into place, so readers
/// never observe a torn file.
void atomic_write(const std::string& path, const std::string& contents);

}  // namespace nccz
