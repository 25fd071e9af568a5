#pragma once

#include <filesystem>
#include <string>

#include "rfcvnn/model.hpp"

namespace rfcvnn {

inline constexpr int kCheckpointVersion = 1;

/// JSON document: format tag, version, kind, K, seed, ablation, BN variant,
/// every parameter and running statistic by name with its shape. Doubles are
/// written in shortest round-trip form, so save/load is bit-exact.
std::string checkpoint_to_string(const Model& model);
Model checkpoint_from_string(const std::string& text);

void save_checkpoint(const Model& model, const std::filesystem::path& path);
Model load_checkpoint(const std::filesystem::path& path);

}  // namespace rfcvnn
