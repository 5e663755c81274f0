#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "talkgrade/training.hpp"

namespace talkgrade {

// Flat key = value files; '#' starts a comment. Keys match the TrainConfig
// field names (learning_rate, batch_size, ...).

/// Sets one field from its textual value. Throws on unknown keys or values
/// that do not parse.
void apply_setting(TrainConfig& cfg, const std::string& key, const std::string& value);

/// Parses "key=value" (as given to --set).
void apply_assignment(TrainConfig& cfg, std::string_view assignment);

TrainConfig parse_config(std::string_view text, TrainConfig base = {});
TrainConfig load_config(const std::filesystem::path& path, TrainConfig base = {});

/// Every field, one "key = value" line each, in a fixed order.
std::string config_to_text(const TrainConfig& cfg);

}  // namespace talkgrade
