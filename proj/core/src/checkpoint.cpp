// Copyright (c) 2026 The dylo Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#include "dylo/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

#include <zlib.h>

#include "dylo/errors.hpp"

namespace dylo {

namespace {

class Writer {
 public:
  void u32(std::uint32_t v) { put_le(v); }
  void i32(std::int32_t v) { put_le(static_cast<std::uint32_t>(v)); }
  void u64(std::uint64_t v) { put_le(v); }
  void f64(double v) { put_le(std::bit_cast<std::uint64_t>(v)); }
  void f32(float v) { put_le(std::bit_cast<std::uint32_t>(v)); }
  void str(const std::string& s) {
    u32(static_cast<std::uint32_t>(s.size()));
    bytes.insert(bytes.end(), s.begin(), s.end());
  }
  void raw(const char* p, std::size_t n) { bytes.insert(bytes.end(), p, p + n); }

  std::vector<std::uint8_t> bytes;

 private:
  template <typename U>
  void put_le(U v) {
    for (std::size_t i = 0; i < sizeof(U); ++i) bytes.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
};

class Reader {
 public:
  Reader(const std::vector<std::uint8_t>& bytes, std::size_t end) : b_(bytes), end_(end) {}

  std::uint32_t u32(const std::string& field) { return get_le<std::uint32_t>(field); }
  std::int32_t i32(const std::string& field) {
    return static_cast<std::int32_t>(get_le<std::uint32_t>(field));
  }
  std::uint64_t u64(const std::string& field) { return get_le<std::uint64_t>(field); }
  double f64(const std::string& field) {
    return std::bit_cast<double>(get_le<std::uint64_t>(field));
  }
  float f32(const std::string& field) { return std::bit_cast<float>(get_le<std::uint32_t>(field)); }
  std::string str(const std::string& field, std::uint32_t max_len = 4096) {
    const std::uint32_t n = u32(field + " length");
    if (n > max_len) throw CheckpointError("implausible " + field + " length " + std::to_string(n));
    need(n, field);
    std::string s(b_.begin() + static_cast<std::ptrdiff_t>(pos_),
                  b_.begin() + static_cast<std::ptrdiff_t>(pos_ + n));
    pos_ += n;
    return s;
  }
  void need(std::size_t n, const std::string& field) const {
    if (end_ - pos_ < n) throw CheckpointError("truncated file at field '" + field + "'");
  }
  std::size_t pos() const { return pos_; }

 private:
  template <typename U>
  U get_le(const std::string& field) {
    need(sizeof(U), field);
    U v = 0;
    for (std::size_t i = 0; i < sizeof(U); ++i) v |= static_cast<U>(b_[pos_ + i]) << (8 * i);
    pos_ += sizeof(U);
    return v;
  }

  const std::vector<std::uint8_t>& b_;
  std::size_t end_;
  std::size_t pos_ = 0;
};

std::uint32_t crc_of(const std::uint8_t* p, std::size_t n) {
  uLong c = crc32(0L, Z_NULL, 0);
  // zlib takes uInt lengths; feed in chunks.
  while (n > 0) {
    const auto chunk = static_cast<uInt>(std::min<std::size_t>(n, 1u << 30));
    c = crc32(c, p, chunk);
    p += chunk;
    n -= chunk;
  }
  return static_cast<std::uint32_t>(c);
}

void write_int_list(Writer& w, const std::vector<int>& v) {
  w.u32(static_cast<std::uint32_t>(v.size()));
  for (int x : v) w.i32(x);
}

std::vector<int> read_int_list(Reader& r, const std::string& field) {
  const std::uint32_t n = r.u32(field + " count");
  if (n > 64) throw CheckpointError("implausible " + field + " count " + std::to_string(n));
  std::vector<int> v;
  for (std::uint32_t i = 0; i < n; ++i) v.push_back(r.i32(field));
  return v;
}

}  // namespace

std::vector<std::uint8_t> encode_checkpoint(const Detectorf& model, const CheckpointMeta& meta) {
  Writer w;
  w.raw(kCheckpointMagic, 4);
  w.u32(kCheckpointVersion);
  const ModelConfig& c = model.config();
  w.i32(c.input_size);
  w.i32(c.input_channels);
  w.i32(c.num_classes);
  w.i32(c.width);
  w.i32(c.resc2net_n);
  w.i32(c.pconv_ratio.num);
  w.i32(c.pconv_ratio.den);
  w.u64(c.seed);
  write_int_list(w, c.strides);
  write_int_list(w, c.sppf_kernels);

  w.i32(meta.epoch);
  w.f64(meta.best_map);
  w.u64(meta.seed);
  w.u32(static_cast<std::uint32_t>(meta.class_names.size()));
  for (const auto& n : meta.class_names) w.str(n);

  const auto& params = model.parameters();
  w.u32(static_cast<std::uint32_t>(params.size()));
  for (const auto& [name, t] : params) {
    w.str(name);
    w.u32(static_cast<std::uint32_t>(t.rank()));
    for (std::size_t d : t.shape()) w.u32(static_cast<std::uint32_t>(d));
    for (float v : t.data()) w.f32(v);
  }
  w.u32(crc_of(w.bytes.data(), w.bytes.size()));
  return std::move(w.bytes);
}

LoadedCheckpoint decode_checkpoint(const std::vector<std::uint8_t>& bytes) {
  if (bytes.size() < 4 || std::memcmp(bytes.data(), kCheckpointMagic, 4) != 0) {
    throw CheckpointError("bad magic");
  }
  if (bytes.size() < 12) throw CheckpointError("truncated file at field 'version'");
  Reader r(bytes, bytes.size() - 4);
  (void)r.u32("magic");
  const std::uint32_t version = r.u32("version");
  if (version != kCheckpointVersion) {
    throw CheckpointError("version mismatch: file has " + std::to_string(version) + ", expected " +
                          std::to_string(kCheckpointVersion));
  }

  ModelConfig c;
  c.input_size = r.i32("config.input_size");
  c.input_channels = r.i32("config.input_channels");
  c.num_classes = r.i32("config.num_classes");
  c.width = r.i32("config.width");
  c.resc2net_n = r.i32("config.resc2net_n");
  c.pconv_ratio.num = r.i32("config.pconv_ratio.num");
  c.pconv_ratio.den = r.i32("config.pconv_ratio.den");
  c.seed = r.u64("config.seed");
  c.strides = read_int_list(r, "config.strides");
  c.sppf_kernels = read_int_list(r, "config.sppf_kernels");
  try {
    c.validate();
  } catch (const Error& e) {
    throw CheckpointError(std::string("invalid model config: ") + e.what());
  }

  CheckpointMeta meta;
  meta.epoch = r.i32("meta.epoch");
  meta.best_map = r.f64("meta.best_map");
  meta.seed = r.u64("meta.seed");
  const std::uint32_t n_names = r.u32("meta.class_names count");
  if (n_names > 4096) throw CheckpointError("implausible meta.class_names count");
  for (std::uint32_t i = 0; i < n_names; ++i) meta.class_names.push_back(r.str("meta.class_names"));

  // Build an empty model only to learn the expected table; weights are copied
  // after every field has been read.
  Detectorf model(c);
  const auto& params = model.parameters();
  const std::uint32_t count = r.u32("tensor count");
  if (count != params.size()) {
    throw CheckpointError("tensor count " + std::to_string(count) + " does not match the " +
                          std::to_string(params.size()) + " parameters of the stored config");
  }
  std::vector<std::vector<float>> values(params.size());
  for (std::size_t i = 0; i < params.size(); ++i) {
    const auto& [name, t] = params[i];
    const std::string got = r.str("tensor name");
    if (got != name) {
      throw CheckpointError("tensor " + std::to_string(i) + " is '" + got + "', expected '" + name +
                            "'");
    }
    const std::uint32_t rank = r.u32(name + " rank");
    if (rank != t.rank()) throw CheckpointError("tensor '" + name + "' has the wrong rank");
    for (std::size_t d = 0; d < rank; ++d) {
      if (r.u32(name + " shape") != t.dim(d)) {
        throw CheckpointError("tensor '" + name + "' has the wrong shape");
      }
    }
    r.need(t.numel() * 4, name + " data");
    values[i].resize(t.numel());
    for (auto& v : values[i]) v = r.f32(name + " data");
  }
  if (r.pos() != bytes.size() - 4) throw CheckpointError("trailing bytes before checksum");
  std::uint32_t stored = 0;
  for (std::size_t i = 0; i < 4; ++i) stored |= static_cast<std::uint32_t>(bytes[bytes.size() - 4 + i]) << (8 * i);
  if (stored != crc_of(bytes.data(), bytes.size() - 4)) throw CheckpointError("checksum mismatch");

  for (std::size_t i = 0; i < params.size(); ++i) {
    Tensorf t = params[i].second;
    std::copy(values[i].begin(), values[i].end(), t.data().begin());
  }
  return LoadedCheckpoint{std::move(meta), std::move(model)};
}

void save_checkpoint(const Detectorf& model, const CheckpointMeta& meta,
                     const std::filesystem::path& path) {
  const auto bytes = encode_checkpoint(model, meta);
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + tmp.string());
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw IoError("write failed for " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw IoError("cannot move checkpoint into " + path.string() + ": " + ec.message());
}

LoadedCheckpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open checkpoint " + path.string());
  const std::vector<std::uint8_t> bytes(std::istreambuf_iterator<char>(in), {});
  try {
    return decode_checkpoint(bytes);
  } catch (const CheckpointError& e) {
    throw CheckpointError(path.string() + ": " + e.what());
  }
}

}  // namespace dylo
