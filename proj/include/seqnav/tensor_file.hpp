#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include "seqnav/errors.hpp"

namespace seqnav {

// "SQNV" tensor container: magic, version, entry count, then per entry a
// length-prefixed name, element type code, rank, dims and a little-endian
// row-major payload. Names are unique within a file.

static_assert(std::endian::native == std::endian::little,
              "SQNV payloads are little-endian; big-endian hosts need swaps");

enum class TensorType : std::uint8_t { F32 = 0, F64 = 1, U8 = 2 };

inline std::size_t element_size(TensorType t) {
  switch (t) {
    case TensorType::F32: return 4;
    case TensorType::F64: return 8;
    case TensorType::U8: return 1;
  }
  throw Error("unknown tensor element type");
}

struct TensorEntry {
  TensorType type = TensorType::F64;
  std::vector<std::uint64_t> dims;
  std::vector<unsigned char> payload;

  std::uint64_t element_count() const {
    std::uint64_t n = 1;
    for (auto d : dims) n *= d;
    return n;
  }

  std::vector<double> as_f64() const {
    require(TensorType::F64);
    std::vector<double> out(element_count());
    std::memcpy(out.data(), payload.data(), payload.size());
    return out;
  }

  std::vector<float> as_f32() const {
    require(TensorType::F32);
    std::vector<float> out(element_count());
    std::memcpy(out.data(), payload.data(), payload.size());
    return out;
  }

  const std::vector<unsigned char>& as_u8() const {
    require(TensorType::U8);
    return payload;
  }

 private:
  void require(TensorType t) const {
    if (type != t) throw Error("tensor entry has a different element type");
  }
};

class TensorFile {
 public:
  static constexpr char kMagic[4] = {'S', 'Q', 'N', 'V'};
  static constexpr std::uint16_t kVersion = 1;

  void add_f64(const std::string& name, std::vector<std::uint64_t> dims,
               const std::vector<double>& data) {
    add_raw(name, TensorType::F64, std::move(dims),
            reinterpret_cast<const unsigned char*>(data.data()),
            data.size() * sizeof(double));
  }

  void add_f32(const std::string& name, std::vector<std::uint64_t> dims,
               const std::vector<float>& data) {
    add_raw(name, TensorType::F32, std::move(dims),
            reinterpret_cast<const unsigned char*>(data.data()),
            data.size() * sizeof(float));
  }

  void add_u8(const std::string& name, std::vector<std::uint64_t> dims,
              const std::vector<unsigned char>& data) {
    add_raw(name, TensorType::U8, std::move(dims), data.data(), data.size());
  }

  void add_scalar(const std::string& name, double value) {
    add_f64(name, {1}, {value});
  }

  bool contains(const std::string& name) const {
    return entries_.count(name) != 0;
  }

  const TensorEntry& at(const std::string& name) const {
    auto it = entries_.find(name);
    if (it == entries_.end()) throw Error("missing tensor entry: " + name);
    return it->second;
  }

  double scalar(const std::string& name) const {
    const auto v = at(name).as_f64();
    if (v.size() != 1) throw Error("tensor entry is not a scalar: " + name);
    return v[0];
  }

  std::size_t size() const { return entries_.size(); }

  const std::map<std::string, TensorEntry>& entries() const {
    return entries_;
  }

  void write(const std::string& path) const {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot open for write: " + path);
    out.write(kMagic, 4);
    write_pod(out, kVersion);
    write_pod(out, static_cast<std::uint32_t>(entries_.size()));
    for (const auto& [name, e] : entries_) {
      write_pod(out, static_cast<std::uint32_t>(name.size()));
      out.write(name.data(), static_cast<std::streamsize>(name.size()));
      write_pod(out, static_cast<std::uint8_t>(e.type));
      write_pod(out, static_cast<std::uint8_t>(e.dims.size()));
      for (auto d : e.dims) write_pod(out, d);
      out.write(reinterpret_cast<const char*>(e.payload.data()),
                static_cast<std::streamsize>(e.payload.size()));
    }
    if (!out) throw Error("write failed: " + path);
  }

  static TensorFile read(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open for read: " + path);
    char magic[4];
    if (!in.read(magic, 4) || std::memcmp(magic, kMagic, 4) != 0) {
      throw BadMagic("not an SQNV tensor file: " + path);
    }
    const auto version = read_pod<std::uint16_t>(in, path);
    if (version != kVersion) {
      throw UnsupportedVersion("unsupported SQNV version " +
                               std::to_string(version) + " in " + path);
    }
    const auto count = read_pod<std::uint32_t>(in, path);
    TensorFile tf;
    for (std::uint32_t i = 0; i < count; ++i) {
      const auto name_len = read_pod<std::uint32_t>(in, path);
      std::string name(name_len, '\0');
      if (!in.read(name.data(), name_len)) {
        throw TruncatedPayload("truncated entry name in " + path);
      }
      TensorEntry e;
      const auto type_code = read_pod<std::uint8_t>(in, path);
      if (type_code > 2) throw Error("unknown element type code in " + path);
      e.type = static_cast<TensorType>(type_code);
      const auto rank = read_pod<std::uint8_t>(in, path);
      e.dims.resize(rank);
      for (auto& d : e.dims) d = read_pod<std::uint64_t>(in, path);
      const std::uint64_t bytes = e.element_count() * element_size(e.type);
      e.payload.resize(bytes);
      if (!in.read(reinterpret_cast<char*>(e.payload.data()),
                   static_cast<std::streamsize>(bytes))) {
        throw TruncatedPayload("truncated payload for entry '" + name +
                               "' in " + path);
      }
      if (!tf.entries_.emplace(name, std::move(e)).second) {
        throw Error("duplicate tensor entry '" + name + "' in " + path);
      }
    }
    return tf;
  }

 private:
  void add_raw(const std::string& name, TensorType type,
               std::vector<std::uint64_t> dims, const unsigned char* data,
               std::size_t bytes) {
    TensorEntry e;
    e.type = type;
    e.dims = std::move(dims);
    if (e.element_count() * element_size(type) != bytes) {
      throw ShapeMismatch("tensor '" + name + "': dims do not match payload");
    }
    e.payload.assign(data, data + bytes);
    if (!entries_.emplace(name, std::move(e)).second) {
      throw Error("duplicate tensor entry: " + name);
    }
  }

  template <typename T>
  static void write_pod(std::ofstream& out, T v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof(T));
  }

  template <typename T>
  static T read_pod(std::ifstream& in, const std::string& path) {
    T v;
    if (!in.read(reinterpret_cast<char*>(&v), sizeof(T))) {
      throw TruncatedPayload("truncated header field in " + path);
    }
    return v;
  }

  std::map<std::string, TensorEntry> entries_;
};

}  // namespace seqnav
