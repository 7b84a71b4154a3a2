#pragma once

// Minimal zip archive support for two-member containers (manifest + payload).
// Reads stored and deflated members; writes stored members only.

#include <prism/error.hpp>

#include <zlib.h>

#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>
#include <map>
#include <string>
#include <utility>
#include <vector>

namespace prism::detail {

using Bytes = std::vector<unsigned char>;

inline std::uint32_t read_u32(const Bytes& b, std::size_t off) {
  if (off + 4 > b.size()) throw DataError("zip: truncated archive");
  return static_cast<std::uint32_t>(b[off]) | (static_cast<std::uint32_t>(b[off + 1]) << 8) |
         (static_cast<std::uint32_t>(b[off + 2]) << 16) | (static_cast<std::uint32_t>(b[off + 3]) << 24);
}

inline std::uint16_t read_u16(const Bytes& b, std::size_t off) {
  if (off + 2 > b.size()) throw DataError("zip: truncated archive");
  return static_cast<std::uint16_t>(b[off] | (b[off + 1] << 8));
}

inline void put_u32(Bytes& b, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) b.push_back(static_cast<unsigned char>((v >> (8 * i)) & 0xffu));
}

inline void put_u16(Bytes& b, std::uint16_t v) {
  b.push_back(static_cast<unsigned char>(v & 0xffu));
  b.push_back(static_cast<unsigned char>(v >> 8));
}

inline Bytes inflate_raw(const unsigned char* src, std::size_t n, std::size_t expected) {
  Bytes out(expected);
  z_stream zs{};
  if (inflateInit2(&zs, -MAX_WBITS) != Z_OK) throw DataError("zip: inflate init failed");
  zs.next_in = const_cast<Bytef*>(src);
  zs.avail_in = static_cast<uInt>(n);
  zs.next_out = out.data();
  zs.avail_out = static_cast<uInt>(out.size());
  const int rc = inflate(&zs, Z_FINISH);
  inflateEnd(&zs);
  if (rc != Z_STREAM_END || zs.total_out != expected) throw DataError("zip: corrupt deflate stream");
  return out;
}

/// Returns every member of the archive keyed by name.
inline std::map<std::string, Bytes> read_zip(const Bytes& archive) {
  // End of central directory: scan backwards for its signature.
  if (archive.size() < 22) throw DataError("zip: file too small");
  std::size_t eocd = archive.size() - 22;
  while (read_u32(archive, eocd) != 0x06054b50u) {
    if (eocd == 0) throw DataError("zip: end of central directory not found");
    --eocd;
  }
  const std::uint16_t entries = read_u16(archive, eocd + 10);
  std::size_t cd = read_u32(archive, eocd + 16);

  std::map<std::string, Bytes> members;
  for (std::uint16_t e = 0; e < entries; ++e) {
    if (read_u32(archive, cd) != 0x02014b50u) throw DataError("zip: bad central directory entry");
    const std::uint16_t method = read_u16(archive, cd + 10);
    const std::uint32_t crc = read_u32(archive, cd + 16);
    const std::uint32_t csize = read_u32(archive, cd + 20);
    const std::uint32_t usize = read_u32(archive, cd + 24);
    const std::uint16_t name_len = read_u16(archive, cd + 28);
    const std::uint16_t extra_len = read_u16(archive, cd + 30);
    const std::uint16_t comment_len = read_u16(archive, cd + 32);
    const std::uint32_t local = read_u32(archive, cd + 42);
    if (cd + 46 + name_len > archive.size()) throw DataError("zip: truncated archive");
    std::string name(reinterpret_cast<const char*>(&archive[cd + 46]), name_len);

    if (read_u32(archive, local) != 0x04034b50u) throw DataError("zip: bad local header for " + name);
    const std::size_t data = local + 30 + read_u16(archive, local + 26) + read_u16(archive, local + 28);
    if (data + csize > archive.size()) throw DataError("zip: member '" + name + "' truncated");

    Bytes content;
    if (method == 0) {
      content.assign(archive.begin() + static_cast<std::ptrdiff_t>(data),
                     archive.begin() + static_cast<std::ptrdiff_t>(data + csize));
    } else if (method == 8) {
      content = inflate_raw(&archive[data], csize, usize);
    } else {
      throw DataError("zip: unsupported compression method for " + name);
    }
    if (crc32(0L, content.data(), static_cast<uInt>(content.size())) != crc) {
      throw DataError("zip: CRC mismatch for " + name);
    }
    members.emplace(std::move(name), std::move(content));
    cd += 46u + name_len + extra_len + comment_len;
  }
  return members;
}

/// Serializes members (in the given order) as an uncompressed archive.
inline Bytes write_zip(const std::vector<std::pair<std::string, Bytes>>& members) {
  Bytes out;
  Bytes central;
  for (const auto& [name, content] : members) {
    const auto crc = static_cast<std::uint32_t>(crc32(0L, content.data(), static_cast<uInt>(content.size())));
    const auto size = static_cast<std::uint32_t>(content.size());
    const auto offset = static_cast<std::uint32_t>(out.size());
    const auto name_len = static_cast<std::uint16_t>(name.size());

    put_u32(out, 0x04034b50u);
    put_u16(out, 20);  // version needed
    put_u16(out, 0);   // flags
    put_u16(out, 0);   // stored
    put_u16(out, 0);   // mod time
    put_u16(out, 0x21);  // mod date 1980-01-01
    put_u32(out, crc);
    put_u32(out, size);
    put_u32(out, size);
    put_u16(out, name_len);
    put_u16(out, 0);
    out.insert(out.end(), name.begin(), name.end());
    out.insert(out.end(), content.begin(), content.end());

    put_u32(central, 0x02014b50u);
    put_u16(central, 20);
    put_u16(central, 20);
    put_u16(central, 0);
    put_u16(central, 0);
    put_u16(central, 0);
    put_u16(central, 0x21);
    put_u32(central, crc);
    put_u32(central, size);
    put_u32(central, size);
    put_u16(central, name_len);
    put_u16(central, 0);
    put_u16(central, 0);
    put_u16(central, 0);
    put_u16(central, 0);
    put_u32(central, 0);
    put_u32(central, offset);
    central.insert(central.end(), name.begin(), name.end());
  }
  const auto cd_offset = static_cast<std::uint32_t>(out.size());
  out.insert(out.end(), central.begin(), central.end());
  put_u32(out, 0x06054b50u);
  put_u16(out, 0);
  put_u16(out, 0);
  put_u16(out, static_cast<std::uint16_t>(members.size()));
  put_u16(out, static_cast<std::uint16_t>(members.size()));
  put_u32(out, static_cast<std::uint32_t>(central.size()));
  put_u32(out, cd_offset);
  put_u16(out, 0);
  return out;
}

}  // namespace prism::detail
