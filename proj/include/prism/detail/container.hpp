#pragma once

// A container is either a directory holding named member files or a zip
// archive with the same members.

#include <prism/detail/zip.hpp>
#include <prism/error.hpp>

#include <bit>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace prism::detail {

namespace fs = std::filesystem;

inline Bytes read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open '" + path.string() + "'");
  return Bytes(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

inline void write_file(const fs::path& path, const Bytes& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write '" + path.string() + "'");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw DataError("write failed for '" + path.string() + "'");
}

inline std::map<std::string, Bytes> read_container(const fs::path& path, const std::vector<std::string>& names) {
  std::map<std::string, Bytes> out;
  if (fs::is_directory(path)) {
    for (const auto& name : names) {
      const auto member = path / name;
      if (!fs::exists(member)) throw DataError("'" + path.string() + "' is missing " + name);
      out.emplace(name, read_file(member));
    }
    return out;
  }
  if (!fs::exists(path)) throw DataError("'" + path.string() + "' does not exist");
  auto members = read_zip(read_file(path));
  for (const auto& name : names) {
    auto it = members.find(name);
    if (it == members.end()) throw DataError("'" + path.string() + "' is missing " + name);
    out.emplace(name, std::move(it->second));
  }
  return out;
}

inline bool is_zip_path(const fs::path& path) { return path.extension() == ".zip"; }

inline void write_container(const fs::path& path, const std::vector<std::pair<std::string, Bytes>>& members) {
  std::error_code ec;
  if (is_zip_path(path)) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path(), ec);
    write_file(path, write_zip(members));
    return;
  }
  fs::create_directories(path, ec);
  if (!fs::is_directory(path)) throw DataError("cannot create directory '" + path.string() + "'");
  for (const auto& [name, content] : members) write_file(path / name, content);
}

inline Bytes to_bytes(const std::string& s) { return Bytes(s.begin(), s.end()); }

inline std::string to_string(const Bytes& b) { return std::string(b.begin(), b.end()); }

/// Little-endian f32 encoding of doubles (each value rounded to float).
inline Bytes encode_f32le(std::span<const double> values) {
  Bytes out;
  out.reserve(values.size() * 4);
  for (double v : values) {
    const auto bits = std::bit_cast<std::uint32_t>(static_cast<float>(v));
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<unsigned char>((bits >> (8 * i)) & 0xffu));
  }
  return out;
}

inline std::vector<double> decode_f32le(const Bytes& bytes) {
  if (bytes.size() % 4 != 0) throw DataError("payload length mismatch: not a whole number of f32 values");
  std::vector<double> out(bytes.size() / 4);
  for (std::size_t i = 0; i < out.size(); ++i) {
    std::uint32_t bits = 0;
    for (int k = 0; k < 4; ++k) bits |= static_cast<std::uint32_t>(bytes[4 * i + k]) << (8 * k);
    out[i] = static_cast<double>(std::bit_cast<float>(bits));
  }
  return out;
}

}  // namespace prism::detail
