#pragma once

#include <filesystem>
#include <string>

#include "isaclab/gnn.hpp"

namespace isac::gnn {

inline constexpr int kCheckpointVersion = 1;

// JSON container:
//   {"format": "isaclab-gnn", "version": 1, "seed": ..., "config": {...},
//    "networks": [{"<param name>": {"shape": [r, c], "f64le": "<base64>"}, ...}, ...]}
// Values are the row-major little-endian IEEE doubles, so a load reproduces the
// saved parameters bitwise. A plain "values" array is accepted in place of "f64le".
std::string checkpoint_to_string(const GnnParams& params);
GnnParams checkpoint_from_string(const std::string& text);

void save_checkpoint(const GnnParams& params, const std::filesystem::path& path);
GnnParams load_checkpoint(const std::filesystem::path& path);

}  // namespace isac::gnn
