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
#include "gadet/feature_file.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>

#include "gadet/errors.hpp"

namespace gadet {
namespace {

static_assert(std::endian::native == std::endian::little,
              "feature files are little-endian; big-endian hosts need byte swapping");

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void put_f32(std::vector<std::uint8_t>& out, float v) { put_u32(out, std::bit_cast<std::uint32_t>(v)); }

std::uint32_t get_u32(const std::uint8_t* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

float get_f32(const std::uint8_t* p) { return std::bit_cast<float>(get_u32(p)); }

}  // namespace

std::vector<std::uint8_t> encode_feature_file(const FeatureSequence& seq) {
  seq.validate();
  std::vector<std::uint8_t> out;
  const auto n = static_cast<std::size_t>(seq.features.size());
  out.reserve(kFeatureHeaderBytes + 4 * n);
  out.insert(out.end(), std::begin(kFeatureMagic), std::end(kFeatureMagic));
  put_u32(out, kFeatureFileVersion);
  put_u32(out, static_cast<std::uint32_t>(seq.length()));
  put_u32(out, static_cast<std::uint32_t>(seq.dims()));
  put_u32(out, seq.global_dim);
  put_f32(out, seq.feature_fps);
  put_f32(out, seq.duration_s);
  const float* data = seq.features.data();
  for (std::size_t i = 0; i < n; ++i) put_f32(out, data[i]);
  return out;
}

FeatureSequence decode_feature_file(const std::vector<std::uint8_t>& bytes, std::string video_id) {
  if (bytes.size() < kFeatureHeaderBytes) throw FormatError("feature file shorter than its header");
  if (std::memcmp(bytes.data(), kFeatureMagic, 4) != 0) throw FormatError("bad feature file magic");
  const std::uint8_t* p = bytes.data() + 4;
  const std::uint32_t version = get_u32(p);
  if (version != kFeatureFileVersion) {
    throw FormatError("unsupported feature file version " + std::to_string(version));
  }
  const std::uint32_t rows = get_u32(p + 4);
  const std::uint32_t cols = get_u32(p + 8);
  const std::uint32_t global_dim = get_u32(p + 12);
  if (rows == 0 || cols == 0) throw FormatError("feature file declares an empty matrix");
  if (global_dim > cols) throw FormatError("global dimension exceeds feature dimension");

  const std::uint64_t count = static_cast<std::uint64_t>(rows) * cols;
  const std::uint64_t expected = kFeatureHeaderBytes + 4 * count;
  if (bytes.size() < expected) {
    throw FormatError("truncated feature payload: expected " + std::to_string(count) +
                      " floats, found " + std::to_string((bytes.size() - kFeatureHeaderBytes) / 4));
  }
  if (bytes.size() > expected) throw FormatError("trailing bytes after feature payload");

  FeatureSequence seq;
  seq.video_id = std::move(video_id);
  seq.global_dim = global_dim;
  seq.feature_fps = get_f32(p + 16);
  seq.duration_s = get_f32(p + 20);
  seq.features.resize(rows, cols);
  const std::uint8_t* payload = bytes.data() + kFeatureHeaderBytes;
  float* dst = seq.features.data();
  for (std::uint64_t i = 0; i < count; ++i) {
    dst[i] = get_f32(payload + 4 * i);
    if (!std::isfinite(dst[i])) {
      throw DataError("non-finite feature value at row " + std::to_string(i / cols) + ", column " +
                      std::to_string(i % cols));
    }
  }
  seq.validate();
  return seq;
}

FeatureSequence read_feature_file(const std::filesystem::path& path) {
  return read_feature_file(path, {});
}

FeatureSequence read_feature_file(const std::filesystem::path& path, std::string video_id) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open feature file " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (video_id.empty()) video_id = path.stem().string();
  try {
    return decode_feature_file(bytes, std::move(video_id));
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  } catch (const DataError& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

void write_feature_file(const FeatureSequence& seq, const std::filesystem::path& path) {
  const auto bytes = encode_feature_file(seq);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("short write to " + path.string());
}

}  // namespace gadet
