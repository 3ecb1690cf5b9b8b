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
#include <string>
#include <vector>

#include "gadet/types.hpp"

namespace gadet {

// Feature file layout, all little-endian:
//   "TMF1" | u32 version | u32 T | u32 D | u32 d_g | f32 fps | f32 duration_s
//   followed by T*D f32 values, row-major.
inline constexpr char kFeatureMagic[4] = {'T', 'M', 'F', '1'};
inline constexpr std::uint32_t kFeatureFileVersion = 1;
inline constexpr std::size_t kFeatureHeaderBytes = 4 + 4 * 4 + 4 * 2;

std::vector<std::uint8_t> encode_feature_file(const FeatureSequence& seq);

/// `video_id` is not part of the file; the caller supplies it.
FeatureSequence decode_feature_file(const std::vector<std::uint8_t>& bytes,
                                    std::string video_id = {});

/// Throws IoError when the file cannot be opened, FormatError on a malformed
/// header or truncated payload and DataError on non-finite values.
FeatureSequence read_feature_file(const std::filesystem::path& path);

/// The video id defaults to the file stem when `video_id` is empty.
FeatureSequence read_feature_file(const std::filesystem::path& path, std::string video_id);

void write_feature_file(const FeatureSequence& seq, const std::filesystem::path& path);

}  // namespace gadet
