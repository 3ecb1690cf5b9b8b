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
#include "gadet/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

#include "gadet/config_io.hpp"
#include "gadet/errors.hpp"

namespace gadet {
namespace {

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

class Reader {
 public:
  explicit Reader(const std::vector<std::uint8_t>& bytes) : bytes_(bytes) {}

  const std::uint8_t* take(std::size_t n) {
    if (bytes_.size() - pos_ < n) throw FormatError("truncated checkpoint");
    const std::uint8_t* p = bytes_.data() + pos_;
    pos_ += n;
    return p;
  }
  std::uint32_t u32() {
    const std::uint8_t* p = take(4);
    return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
           (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
  }
  std::string str(std::size_t n) {
    const std::uint8_t* p = take(n);
    return std::string(reinterpret_cast<const char*>(p), n);
  }
  bool done() const { return pos_ == bytes_.size(); }

 private:
  const std::vector<std::uint8_t>& bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

std::vector<std::uint8_t> encode_checkpoint(const ModelParams<float>& params) {
  std::vector<std::uint8_t> out;
  out.insert(out.end(), std::begin(kCheckpointMagic), std::end(kCheckpointMagic));
  put_u32(out, kCheckpointVersion);
  const std::string config = to_json(params.config).dump();
  put_u32(out, static_cast<std::uint32_t>(config.size()));
  out.insert(out.end(), config.begin(), config.end());
  const auto tensors = params.tensors();
  put_u32(out, static_cast<std::uint32_t>(tensors.size()));
  for (const auto& t : tensors) {
    put_u32(out, static_cast<std::uint32_t>(t.name.size()));
    out.insert(out.end(), t.name.begin(), t.name.end());
    put_u32(out, static_cast<std::uint32_t>(t.value->rows()));
    put_u32(out, static_cast<std::uint32_t>(t.value->cols()));
    for (Eigen::Index i = 0; i < t.value->size(); ++i) put_u32(out, std::bit_cast<std::uint32_t>(t.value->data()[i]));
  }
  return out;
}

ModelParams<float> decode_checkpoint(const std::vector<std::uint8_t>& bytes) {
  Reader in(bytes);
  if (std::memcmp(in.take(4), kCheckpointMagic, 4) != 0) throw FormatError("bad checkpoint magic");
  const std::uint32_t version = in.u32();
  if (version != kCheckpointVersion) throw FormatError("unsupported checkpoint version " + std::to_string(version));
  const std::string config_text = in.str(in.u32());
  ModelConfig config;
  try {
    config = model_config_from_json(nlohmann::json::parse(config_text));
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("checkpoint carries an unreadable model config: ") + e.what());
  }
  ModelParams<float> params = make_params<float>(config);
  auto tensors = params.tensors();
  const std::uint32_t count = in.u32();
  if (count != tensors.size()) {
    throw ShapeError("checkpoint has " + std::to_string(count) + " tensors, model config implies " +
                     std::to_string(tensors.size()));
  }
  for (auto& t : tensors) {
    const std::string name = in.str(in.u32());
    if (name != t.name) throw ShapeError("checkpoint tensor '" + name + "' where '" + t.name + "' was expected");
    const std::uint32_t rows = in.u32();
    const std::uint32_t cols = in.u32();
    if (rows != t.value->rows() || cols != t.value->cols()) {
      throw ShapeError("tensor '" + name + "' has shape " + std::to_string(rows) + "x" + std::to_string(cols) +
                       ", expected " + std::to_string(t.value->rows()) + "x" + std::to_string(t.value->cols()));
    }
    for (Eigen::Index i = 0; i < t.value->size(); ++i) {
      const std::uint8_t* p = in.take(4);
      std::uint32_t bits = 0;
      std::memcpy(&bits, p, 4);
      t.value->data()[i] = std::bit_cast<float>(bits);
    }
  }
  if (!in.done()) throw FormatError("trailing bytes after checkpoint tensors");
  return params;
}

void save_checkpoint(const ModelParams<float>& params, const std::filesystem::path& path) {
  const auto bytes = encode_checkpoint(params);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("short write to " + path.string());
}

ModelParams<float> load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open checkpoint " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return decode_checkpoint(bytes);
}

std::uint64_t checkpoint_hash(const ModelParams<float>& params) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (std::uint8_t b : encode_checkpoint(params)) {
    h ^= b;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace gadet
