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

#include <cstdint>
#include <filesystem>
#include <vector>

#include "gadet/network.hpp"

namespace gadet {

// Checkpoint layout, little-endian:
//   "GDCK" | u32 version | u32 config_len | config JSON bytes
//   | u32 tensor_count | per tensor: u32 name_len | name | u32 rows | u32 cols | f32 payload
inline constexpr char kCheckpointMagic[4] = {'G', 'D', 'C', 'K'};
inline constexpr std::uint32_t kCheckpointVersion = 1;

std::vector<std::uint8_t> encode_checkpoint(const ModelParams<float>& params);
/// Throws FormatError on malformed data and ShapeError when a tensor does not
/// fit the stored model configuration.
ModelParams<float> decode_checkpoint(const std::vector<std::uint8_t>& bytes);

void save_checkpoint(const ModelParams<float>& params, const std::filesystem::path& path);
ModelParams<float> load_checkpoint(const std::filesystem::path& path);

/// FNV-1a over the encoded checkpoint; handy for reproducibility checks.
std::uint64_t checkpoint_hash(const ModelParams<float>& params);

}  // namespace gadet
