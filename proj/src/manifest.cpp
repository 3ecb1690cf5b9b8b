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
#include "gadet/manifest.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>

#include <json.hpp>

#include "gadet/errors.hpp"

namespace gadet {

using nlohmann::json;

std::string_view to_string(Split split) { return split == Split::kTrain ? "train" : "test"; }

Split parse_split(std::string_view text) {
  if (text == "train") return Split::kTrain;
  if (text == "test") return Split::kTest;
  throw ManifestError("unknown split '" + std::string(text) + "'");
}

std::filesystem::path DatasetManifest::feature_path(const VideoEntry& video) const {
  std::filesystem::path p(video.feature_file);
  if (p.is_absolute() || base_dir.empty()) return p;
  return base_dir / p;
}

std::vector<const VideoEntry*> DatasetManifest::videos_in(Split split) const {
  std::vector<const VideoEntry*> out;
  for (const auto& v : videos) {
    if (v.split == split) out.push_back(&v);
  }
  return out;
}

void DatasetManifest::validate() const {
  std::set<std::string> seen;
  for (const auto& v : videos) {
    if (v.id.empty()) throw ManifestError("video with empty id");
    if (!seen.insert(v.id).second) throw ManifestError("duplicate video id '" + v.id + "'");
    if (!(v.duration_s > 0.0) || !std::isfinite(v.duration_s)) {
      throw ManifestError("video '" + v.id + "' has a non-positive duration");
    }
    for (const auto& s : v.segments) {
      if (!std::isfinite(s.start_s) || !std::isfinite(s.end_s) || s.start_s < 0.0 ||
          !(s.start_s < s.end_s) || s.end_s > v.duration_s) {
        std::ostringstream msg;
        msg << "segment [" << s.start_s << ", " << s.end_s << "] of video '" << v.id
            << "' lies outside [0, " << v.duration_s << "]";
        throw ManifestError(msg.str());
      }
    }
  }
}

ManifestCounts DatasetManifest::counts() const {
  ManifestCounts c;
  for (const auto& v : videos) {
    SplitCounts& part = v.split == Split::kTrain ? c.train : c.test;
    ++part.videos;
    ++c.total.videos;
    for (const auto& s : v.segments) {
      ++part.segments[class_index(s.label)];
      ++c.total.segments[class_index(s.label)];
    }
  }
  return c;
}

DatasetManifest parse_manifest(std::string_view json_text, std::filesystem::path base_dir) {
  DatasetManifest m;
  m.base_dir = std::move(base_dir);
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ManifestError(std::string("manifest is not valid JSON: ") + e.what());
  }
  try {
    for (const auto& jv : doc.at("videos")) {
      VideoEntry v;
      v.id = jv.at("id").get<std::string>();
      v.feature_file = jv.at("feature_file").get<std::string>();
      v.duration_s = jv.at("duration_s").get<double>();
      v.split = parse_split(jv.value("split", std::string("train")));
      if (jv.contains("segments")) {
        for (const auto& js : jv.at("segments")) {
          Segment s;
          try {
            s.label = parse_activity_class(js.at("label").get<std::string>());
          } catch (const ConfigError& e) {
            throw ManifestError(e.what());
          }
          s.start_s = js.at("start_s").get<double>();
          s.end_s = js.at("end_s").get<double>();
          v.segments.push_back(s);
        }
      }
      m.videos.push_back(std::move(v));
    }
  } catch (const json::exception& e) {
    throw ManifestError(std::string("malformed manifest: ") + e.what());
  }
  m.validate();
  return m;
}

std::string manifest_to_json(const DatasetManifest& manifest) {
  json videos = json::array();
  for (const auto& v : manifest.videos) {
    json segs = json::array();
    for (const auto& s : v.segments) {
      segs.push_back({{"label", to_string(s.label)}, {"start_s", s.start_s}, {"end_s", s.end_s}});
    }
    videos.push_back({{"id", v.id},
                      {"feature_file", v.feature_file},
                      {"duration_s", v.duration_s},
                      {"split", to_string(v.split)},
                      {"segments", std::move(segs)}});
  }
  json doc = {{"videos", std::move(videos)}};
  return doc.dump(2) + "\n";
}

DatasetManifest load_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open manifest " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_manifest(buf.str(), path.parent_path());
}

void save_manifest(const DatasetManifest& manifest, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << manifest_to_json(manifest);
  if (!out) throw IoError("short write to " + path.string());
}

std::string format_counts(const ManifestCounts& counts) {
  std::ostringstream out;
  out << std::left << std::setw(10) << "" << std::right << std::setw(8) << "videos";
  for (int c = 0; c < kNumActivityClasses; ++c) {
    out << std::setw(10) << display_name(activity_class_from_index(c));
  }
  out << "\n";
  const auto row = [&](const char* name, const SplitCounts& s) {
    out << std::left << std::setw(10) << name << std::right << std::setw(8) << s.videos;
    for (int n : s.segments) out << std::setw(10) << n;
    out << "\n";
  };
  row("train", counts.train);
  row("test", counts.test);
  row("total", counts.total);
  return out.str();
}

}  // namespace gadet
