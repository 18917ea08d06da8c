#ifndef BTC_FORMATS_HPP
#define BTC_FORMATS_HPP

// On-disk formats.
//
// TSR1 (binary tensor): magic "TSR1", u32 order D, D x u32 dims, then
// prod(dims) IEEE-754 doubles, row-major, all little-endian.
//
// TSRM (text PARAFAC margins):
//   TSRM 1
//   rank R
//   dims p_1 ... p_D
//   followed by R * D lines, component-major (r = 1: modes 1..D, then r = 2 ...),
//   each holding p_j whitespace-separated reals.
//
// PGM: binary P5 greyscale, 8-bit, linear min -> 0, max -> 255.

#include <bit>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <limits>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "btc/error.hpp"
#include "btc/tensor.hpp"

namespace btc {

namespace detail {

inline void put_u32(std::string& out, std::uint32_t v) {
  for (int k = 0; k < 4; ++k) out.push_back(static_cast<char>((v >> (8 * k)) & 0xff));
}

inline void put_u64(std::string& out, std::uint64_t v) {
  for (int k = 0; k < 8; ++k) out.push_back(static_cast<char>((v >> (8 * k)) & 0xff));
}

inline std::uint32_t get_u32(std::string_view in, std::size_t at) {
  std::uint32_t v = 0;
  for (int k = 0; k < 4; ++k) {
    v |= static_cast<std::uint32_t>(static_cast<unsigned char>(in[at + k])) << (8 * k);
  }
  return v;
}

inline std::uint64_t get_u64(std::string_view in, std::size_t at) {
  std::uint64_t v = 0;
  for (int k = 0; k < 8; ++k) {
    v |= static_cast<std::uint64_t>(static_cast<unsigned char>(in[at + k])) << (8 * k);
  }
  return v;
}

inline std::string format_error_at(std::size_t offset, const std::string& what) {
  return "TSR1: " + what + " at byte offset " + std::to_string(offset);
}

}  // namespace detail

inline std::string read_file_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open '" + path.string() + "' for reading");
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline void write_file_bytes(const std::filesystem::path& path, std::string_view bytes) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw FormatError("cannot open '" + path.string() + "' for writing");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw FormatError("write to '" + path.string() + "' failed");
}

inline std::string encode_tsr1(const Dims& dims, std::span<const double> values) {
  validate_dims(dims);
  if (values.size() != cell_count(dims)) {
    throw StructuralError("TSR1: value count does not match dims");
  }
  std::string out = "TSR1";
  out.reserve(8 + 4 * dims.size() + 8 * values.size());
  detail::put_u32(out, static_cast<std::uint32_t>(dims.size()));
  for (auto p : dims) {
    if (p > std::numeric_limits<std::uint32_t>::max()) {
      throw StructuralError("TSR1: dimension exceeds 32 bits");
    }
    detail::put_u32(out, static_cast<std::uint32_t>(p));
  }
  for (double v : values) detail::put_u64(out, std::bit_cast<std::uint64_t>(v));
  return out;
}

inline std::string encode_tsr1(const DenseTensor& t) { return encode_tsr1(t.dims(), t.values()); }

inline DenseTensor decode_tsr1(std::string_view bytes) {
  if (bytes.size() < 4 || bytes.substr(0, 4) != "TSR1") {
    throw FormatError(detail::format_error_at(0, "bad magic (expected \"TSR1\")"));
  }
  if (bytes.size() < 8) {
    throw FormatError(detail::format_error_at(bytes.size(), "truncated header reading order"));
  }
  const std::uint32_t order = detail::get_u32(bytes, 4);
  if (order == 0) throw FormatError(detail::format_error_at(4, "order D = 0 is not allowed"));
  const std::size_t header = 8 + 4 * static_cast<std::size_t>(order);
  if (bytes.size() < header) {
    throw FormatError(detail::format_error_at(
        bytes.size(), "truncated header: expected " + std::to_string(header) +
                          " header bytes, got " + std::to_string(bytes.size())));
  }
  Dims dims(order);
  std::size_t cells = 1;
  for (std::uint32_t k = 0; k < order; ++k) {
    const std::size_t at = 8 + 4 * static_cast<std::size_t>(k);
    dims[k] = detail::get_u32(bytes, at);
    if (dims[k] == 0) throw FormatError(detail::format_error_at(at, "zero-length dimension"));
    if (cells > std::numeric_limits<std::size_t>::max() / 8 / dims[k]) {
      throw FormatError(detail::format_error_at(at, "dimension product overflows"));
    }
    cells *= dims[k];
  }
  const std::size_t expected = header + 8 * cells;
  if (bytes.size() != expected) {
    throw FormatError(detail::format_error_at(
        std::min(bytes.size(), expected),
        (bytes.size() < expected ? "truncated data" : "trailing bytes") +
            std::string(": expected ") + std::to_string(expected) + " bytes, got " +
            std::to_string(bytes.size())));
  }
  std::vector<double> values(cells);
  for (std::size_t c = 0; c < cells; ++c) {
    values[c] = std::bit_cast<double>(detail::get_u64(bytes, header + 8 * c));
  }
  return DenseTensor(std::move(dims), std::move(values));
}

inline DenseTensor read_tsr1(const std::filesystem::path& path) {
  try {
    return decode_tsr1(read_file_bytes(path));
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

inline void write_tsr1(const std::filesystem::path& path, const DenseTensor& t) {
  write_file_bytes(path, encode_tsr1(t));
}

inline void write_tsr1(const std::filesystem::path& path, const Dims& dims,
                       std::span<const double> values) {
  write_file_bytes(path, encode_tsr1(dims, values));
}

/// Shortest decimal that round-trips to the same double.
inline std::string format_double(double v) {
  char buf[32];
  for (int precision = 15; precision <= 17; ++precision) {
    std::snprintf(buf, sizeof buf, "%.*g", precision, v);
    if (std::strtod(buf, nullptr) == v) break;
  }
  return buf;
}

inline std::string encode_tsrm(const ParafacFactors& f) {
  std::string out = "TSRM 1\nrank " + std::to_string(f.rank()) + "\ndims";
  for (auto p : f.dims()) out += " " + std::to_string(p);
  out += "\n";
  for (std::size_t r = 0; r < f.rank(); ++r) {
    for (std::size_t j = 0; j < f.order(); ++j) {
      const auto m = f.margin(j, r);
      for (std::size_t k = 0; k < m.size(); ++k) {
        if (k) out += " ";
        out += format_double(m[k]);
      }
      out += "\n";
    }
  }
  return out;
}

inline ParafacFactors decode_tsrm(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t line_no = 0;
  auto next_line = [&](const char* what) {
    if (!std::getline(in, line)) {
      throw FormatError("TSRM: unexpected end of file, expected " + std::string(what) +
                        " at line " + std::to_string(line_no + 1));
    }
    ++line_no;
    return std::istringstream(line);
  };
  auto fail = [&](const std::string& what) {
    throw FormatError("TSRM: " + what + " at line " + std::to_string(line_no));
  };

  {
    auto ls = next_line("header");
    std::string magic;
    int version = 0;
    if (!(ls >> magic >> version) || magic != "TSRM" || version != 1) {
      fail("malformed header (expected \"TSRM 1\")");
    }
  }
  std::size_t rank = 0;
  {
    auto ls = next_line("rank");
    std::string key;
    long long value = 0;
    if (!(ls >> key >> value) || key != "rank" || value < 1) fail("malformed rank line");
    rank = static_cast<std::size_t>(value);
  }
  Dims dims;
  {
    auto ls = next_line("dims");
    std::string key;
    if (!(ls >> key) || key != "dims") fail("malformed dims line");
    long long p = 0;
    while (ls >> p) {
      if (p < 1) fail("non-positive dimension");
      dims.push_back(static_cast<std::size_t>(p));
    }
    if (!ls.eof()) fail("non-numeric dimension");
    if (dims.empty()) fail("dims line lists no dimensions");
  }
  ParafacFactors f(rank, dims);
  for (std::size_t r = 0; r < rank; ++r) {
    for (std::size_t j = 0; j < dims.size(); ++j) {
      auto ls = next_line("margin vector");
      std::vector<double> values;
      std::string token;
      while (ls >> token) {
        char* end = nullptr;
        const double v = std::strtod(token.c_str(), &end);
        if (end == token.c_str() || *end != '\0') fail("bad number '" + token + "'");
        values.push_back(v);
      }
      if (values.size() != dims[j]) {
        fail("margin (" + std::to_string(j) + "," + std::to_string(r) + ") has " +
             std::to_string(values.size()) + " values, expected " + std::to_string(dims[j]));
      }
      f.set_margin(j, r, values);
    }
  }
  return f;
}

inline ParafacFactors read_tsrm(const std::filesystem::path& path) {
  try {
    return decode_tsrm(read_file_bytes(path));
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

inline void write_tsrm(const std::filesystem::path& path, const ParafacFactors& f) {
  write_file_bytes(path, encode_tsrm(f));
}

/// 8-bit P5 image of a 1-D or 2-D tensor (rows = first mode). A constant
/// tensor renders as uniform mid-grey.
inline std::string encode_pgm(const DenseTensor& t) {
  if (t.order() > 2) throw StructuralError("PGM export needs a 1-D or 2-D tensor");
  const std::size_t rows = t.order() == 2 ? t.dims()[0] : 1;
  const std::size_t cols = t.dims().back();
  double lo = t[0], hi = t[0];
  for (double v : t.values()) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  std::string out = "P5\n" + std::to_string(cols) + " " + std::to_string(rows) + "\n255\n";
  for (double v : t.values()) {
    const double level = hi > lo ? std::round((v - lo) / (hi - lo) * 255.0) : 128.0;
    out.push_back(static_cast<char>(static_cast<unsigned char>(level)));
  }
  return out;
}

inline void write_pgm(const std::filesystem::path& path, const DenseTensor& t) {
  write_file_bytes(path, encode_pgm(t));
}

}  // namespace btc

#endif  // BTC_FORMATS_HPP
