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

#include <array>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "gadet/types.hpp"

namespace gadet {

enum class Split { kTrain, kTest };

std::string_view to_string(Split split);
Split parse_split(std::string_view text);

struct VideoEntry {
  std::string id;
  std::string feature_file;  // as written in the manifest; relative paths resolve against base_dir
  double duration_s = 0.0;
  Split split = Split::kTrain;
  std::vector<Segment> segments;
};

struct SplitCounts {
  int videos = 0;
  std::array<int, kNumActivityClasses> segments{};
};

/// Video/segment counts per split, in the layout of a dataset split table.
struct ManifestCounts {
  SplitCounts train;
  SplitCounts test;
  SplitCounts total;
};

struct DatasetManifest {
  std::vector<VideoEntry> videos;
  std::filesystem::path base_dir;

  std::filesystem::path feature_path(const VideoEntry& video) const;
  std::vector<const VideoEntry*> videos_in(Split split) const;

  /// Throws ManifestError on duplicate ids or out-of-range segments.
  void validate() const;
  ManifestCounts counts() const;
};

DatasetManifest parse_manifest(std::string_view json_text, std::filesystem::path base_dir = {});
std::string manifest_to_json(const DatasetManifest& manifest);

/// Parses and validates; relative feature paths resolve against the
/// manifest's directory.
DatasetManifest load_manifest(const std::filesystem::path& path);
void save_manifest(const DatasetManifest& manifest, const std::filesystem::path& path);

/// Aligned text table: rows train/test/total, columns videos and per-class
/// segment counts.
std::string format_counts(const ManifestCounts& counts);

}  // namespace gadet
