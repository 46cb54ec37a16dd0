#pragma once

#include <bit>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>

#include "extremal/core.hpp"

namespace extremal {

// FGRID: magic "FGRD", u32 LE width, u32 LE height, f64 LE spacing,
// then width*height f32 LE values, row-major.

namespace detail {

template <class T>
void put_le(std::string& out, T v) {
  static_assert(std::is_trivially_copyable_v<T>);
  unsigned char bytes[sizeof(T)];
  std::memcpy(bytes, &v, sizeof(T));
  if constexpr (std::endian::native == std::endian::big)
    std::reverse(bytes, bytes + sizeof(T));
  out.append(reinterpret_cast<const char*>(bytes), sizeof(T));
}

template <class T>
T get_le(const unsigned char* p) {
  unsigned char bytes[sizeof(T)];
  std::memcpy(bytes, p, sizeof(T));
  if constexpr (std::endian::native == std::endian::big)
    std::reverse(bytes, bytes + sizeof(T));
  T v;
  std::memcpy(&v, bytes, sizeof(T));
  return v;
}

}  // namespace detail

inline std::string encode_fgrid(const scalar_field& f) {
  f.validate();
  std::string out;
  out.reserve(16 + f.size() * 4);
  out += "FGRD";
  detail::put_le<uint32_t>(out, uint32_t(f.width));
  detail::put_le<uint32_t>(out, uint32_t(f.height));
  detail::put_le<double>(out, f.spacing);
  for (double v : f.values) detail::put_le<float>(out, float(v));
  return out;
}

inline scalar_field decode_fgrid(const std::string& bytes) {
  if (bytes.size() < 16 || bytes.compare(0, 4, "FGRD") != 0)
    throw io_error("not an FGRID stream");
  const unsigned char* p = reinterpret_cast<const unsigned char*>(bytes.data());
  uint32_t w = detail::get_le<uint32_t>(p + 4);
  uint32_t h = detail::get_le<uint32_t>(p + 8);
  double spacing = detail::get_le<double>(p + 12);
  size_t need = 20 + size_t(w) * size_t(h) * 4;
  if (w < 1 || h < 1 || bytes.size() != need)
    throw io_error("FGRID stream has wrong length");
  scalar_field f(int(w), int(h), 0.0, spacing);
  for (size_t i = 0; i < f.size(); ++i)
    f.values[i] = double(detail::get_le<float>(p + 20 + i * 4));
  return f;
}

/// Atomic file write: temp file in the same directory, then rename.
inline void write_file_atomic(const std::filesystem::path& path, const std::string& bytes) {
  namespace fs = std::filesystem;
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw io_error("cannot open " + tmp.string() + " for writing");
    out.write(bytes.data(), std::streamsize(bytes.size()));
    if (!out) throw io_error("short write to " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) throw io_error("cannot rename " + tmp.string() + " to " + path.string());
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw io_error("cannot open " + path.string());
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return bytes;
}

inline void write_fgrid(const std::filesystem::path& path, const scalar_field& f) {
  write_file_atomic(path, encode_fgrid(f));
}

inline scalar_field read_fgrid(const std::filesystem::path& path) {
  return decode_fgrid(read_file(path));
}

/// 8-bit binary PGM (P5); [0,1] maps linearly to [0,255].
inline std::string encode_pgm(const scalar_field& f) {
  f.validate();
  std::string out = "P5\n" + std::to_string(f.width) + " " + std::to_string(f.height) +
                    "\n255\n";
  out.reserve(out.size() + f.size());
  for (double v : f.values) {
    int g = int(std::lround(std::clamp(v, 0.0, 1.0) * 255.0));
    out.push_back(char(uint8_t(g)));
  }
  return out;
}

inline scalar_field decode_pgm(const std::string& bytes) {
  size_t pos = 0;
  auto token = [&]() -> std::string {
    while (pos < bytes.size()) {
      if (bytes[pos] == '#') {
        while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
      } else if (std::isspace(uint8_t(bytes[pos]))) {
        ++pos;
      } else {
        break;
      }
    }
    size_t start = pos;
    while (pos < bytes.size() && !std::isspace(uint8_t(bytes[pos]))) ++pos;
    return bytes.substr(start, pos - start);
  };
  if (token() != "P5") throw io_error("not a binary PGM (P5) stream");
  int w = std::stoi(token());
  int h = std::stoi(token());
  int maxval = std::stoi(token());
  if (w < 1 || h < 1 || maxval < 1 || maxval > 255)
    throw io_error("unsupported PGM header");
  ++pos;  // single whitespace after maxval
  if (bytes.size() - pos < size_t(w) * size_t(h)) throw io_error("PGM stream truncated");
  scalar_field f(w, h, 0.0, 1.0);
  for (size_t i = 0; i < f.size(); ++i)
    f.values[i] = double(uint8_t(bytes[pos + i])) / double(maxval);
  return f;
}

inline void write_pgm(const std::filesystem::path& path, const scalar_field& f) {
  write_file_atomic(path, encode_pgm(f));
}

inline scalar_field read_pgm(const std::filesystem::path& path) {
  return decode_pgm(read_file(path));
}

/// Reads FGRID or PGM, auto-detected by magic bytes.
inline scalar_field read_field_auto(const std::filesystem::path& path) {
  std::string bytes = read_file(path);
  if (bytes.size() >= 4 && bytes.compare(0, 4, "FGRD") == 0) return decode_fgrid(bytes);
  if (bytes.size() >= 2 && bytes.compare(0, 2, "P5") == 0) return decode_pgm(bytes);
  throw io_error(path.string() + ": unknown field format (expected FGRID or PGM)");
}

}  // namespace extremal
