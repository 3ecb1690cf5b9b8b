// Copyright 2026 The gadet Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
#pragma once

// JSON bindings for every configuration struct. Missing keys keep their
// defaults; unknown keys are rejected so that typos surface as ConfigError.

#include <filesystem>
#include <string>

#include <json.hpp>

#include "gadet/assign.hpp"
#include "gadet/decode.hpp"
#include "gadet/network.hpp"
#include "gadet/synth.hpp"
#include "gadet/trainer.hpp"

namespace gadet {

nlohmann::json to_json(const ModelConfig& cfg);
nlohmann::json to_json(const SynthConfig& cfg);
nlohmann::json to_json(const TrainConfig& cfg);

ModelConfig model_config_from_json(const nlohmann::json& j);
SynthConfig synth_config_from_json(const nlohmann::json& j);
TrainConfig train_config_from_json(const nlohmann::json& j);

/// Reads and parses a JSON file; parse failures become ConfigError carrying
/// the byte position, line and column of the error.
nlohmann::json read_json_file(const std::filesystem::path& path);

}  // namespace gadet
