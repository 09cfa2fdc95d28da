#pragma once
// Location/channel record sets and their on-disk formats.
//
// Binary layout (little-endian, no padding):
//
//     "WFLC"            4 bytes magic
//     version           u32 (currently 1)
//     n_records         u32
//     n_antennas        u32
//     n_freqs           u32
//     n_records times:
//         x, y          f64, f64
//         H             n_antennas * n_freqs pairs (re f64, im f64),
//                       antenna-major then frequency
//
// Readers accept trailing bytes so that other sections (surrogate weights)
// can follow the records. The CSV export has one row per record:
// x,y followed by re_j_k,im_j_k columns in the same order.

#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include "wfl/channel.hpp"
#include "wfl/errors.hpp"

namespace wfl {

struct Dataset {
  std::size_t antennas{0};
  std::size_t freqs{0};
  std::vector<Vec2> locations;
  std::vector<ChannelMatrix> channels;

  std::size_t size() const { return locations.size(); }
  bool empty() const { return locations.empty(); }

  void push_back(const Vec2& x, ChannelMatrix h) {
    if (locations.empty() && antennas == 0) {
      antennas = h.antennas();
      freqs = h.freqs();
    }
    if (h.antennas() != antennas || h.freqs() != freqs)
      throw DimensionMismatch("Dataset: record dimensions differ from the dataset");
    h.location_tag = x;
    locations.push_back(x);
    channels.push_back(std::move(h));
  }

  /// Records at the given indices, in that order.
  Dataset subset(const std::vector<std::size_t>& idx) const {
    Dataset out;
    out.antennas = antennas;
    out.freqs = freqs;
    out.locations.reserve(idx.size());
    out.channels.reserve(idx.size());
    for (auto i : idx) {
      out.locations.push_back(locations.at(i));
      out.channels.push_back(channels.at(i));
    }
    return out;
  }
};

/// Channels synthesized at every location.
inline Dataset build_dataset(const Propagation& prop, const std::vector<Vec2>& locations) {
  Dataset ds;
  ds.antennas = prop.antennas();
  ds.freqs = prop.freqs();
  ds.locations = locations;
  ds.channels.resize(locations.size());
  for (std::size_t i = 0; i < locations.size(); ++i) prop.channel_into(locations[i], ds.channels[i]);
  return ds;
}

namespace io {

inline constexpr std::array<char, 4> kDatasetMagic{'W', 'F', 'L', 'C'};
inline constexpr std::uint32_t kDatasetVersion = 1;

inline void put_u32(std::ostream& os, std::uint32_t v) {
  const unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                              static_cast<unsigned char>(v >> 16),
                              static_cast<unsigned char>(v >> 24)};
  os.write(reinterpret_cast<const char*>(b), 4);
}

inline void put_f64(std::ostream& os, double d) {
  const auto v = std::bit_cast<std::uint64_t>(d);
  unsigned char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
  os.write(reinterpret_cast<const char*>(b), 8);
}

inline std::uint32_t get_u32(std::istream& is) {
  unsigned char b[4];
  if (!is.read(reinterpret_cast<char*>(b), 4)) throw FormatError("unexpected end of file");
  return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
         (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

inline double get_f64(std::istream& is) {
  unsigned char b[8];
  if (!is.read(reinterpret_cast<char*>(b), 8)) throw FormatError("unexpected end of file");
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
  return std::bit_cast<double>(v);
}

inline void expect_magic(std::istream& is, const std::array<char, 4>& magic, const char* what) {
  char m[4];
  if (!is.read(m, 4) || std::memcmp(m, magic.data(), 4) != 0)
    throw FormatError(std::string("bad magic: not a ") + what);
}

inline std::uint32_t checked_u32(std::size_t n, const char* what) {
  if (n > 0xFFFFFFFFull) throw FormatError(std::string(what) + " exceeds u32 range");
  return static_cast<std::uint32_t>(n);
}

/// Streaming writer; records are appended one at a time.
class DatasetWriter {
 public:
  DatasetWriter(std::ostream& os, std::size_t n_records, std::size_t antennas, std::size_t freqs)
      : os_(os), antennas_(antennas), freqs_(freqs), remaining_(n_records) {
    os_.write(kDatasetMagic.data(), 4);
    put_u32(os_, kDatasetVersion);
    put_u32(os_, checked_u32(n_records, "record count"));
    put_u32(os_, checked_u32(antennas, "antenna count"));
    put_u32(os_, checked_u32(freqs, "frequency count"));
  }

  void write(const Vec2& x, const ChannelMatrix& h) {
    if (remaining_ == 0) throw FormatError("DatasetWriter: more records than declared");
    if (h.antennas() != antennas_ || h.freqs() != freqs_)
      throw DimensionMismatch("DatasetWriter: record dimensions differ from the header");
    put_f64(os_, x.x);
    put_f64(os_, x.y);
    for (const auto& v : h.data()) {
      put_f64(os_, v.real());
      put_f64(os_, v.imag());
    }
    --remaining_;
  }

  std::size_t remaining() const { return remaining_; }

 private:
  std::ostream& os_;
  std::size_t antennas_;
  std::size_t freqs_;
  std::size_t remaining_;
};

inline void write_dataset(std::ostream& os, const Dataset& ds) {
  DatasetWriter w(os, ds.size(), ds.antennas, ds.freqs);
  for (std::size_t i = 0; i < ds.size(); ++i) w.write(ds.locations[i], ds.channels[i]);
}

inline Dataset read_dataset(std::istream& is) {
  expect_magic(is, kDatasetMagic, "WFLC dataset");
  const auto version = get_u32(is);
  if (version != kDatasetVersion)
    throw FormatError("unsupported dataset version " + std::to_string(version));
  const auto n = get_u32(is);
  Dataset ds;
  ds.antennas = get_u32(is);
  ds.freqs = get_u32(is);
  ds.locations.reserve(n);
  ds.channels.reserve(n);
  for (std::uint32_t r = 0; r < n; ++r) {
    Vec2 x;
    x.x = get_f64(is);
    x.y = get_f64(is);
    ChannelMatrix h(ds.antennas, ds.freqs);
    for (auto& v : h.data()) {
      const double re = get_f64(is);
      const double im = get_f64(is);
      v = {re, im};
    }
    h.location_tag = x;
    ds.locations.push_back(x);
    ds.channels.push_back(std::move(h));
  }
  return ds;
}

inline void save_dataset(const std::string& path, const Dataset& ds) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw FormatError("cannot open " + path + " for writing");
  write_dataset(os, ds);
  if (!os) throw FormatError("write failed: " + path);
}

inline Dataset load_dataset(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw FormatError("cannot open " + path);
  return read_dataset(is);
}

inline void write_dataset_csv(std::ostream& os, const Dataset& ds) {
  os << "x,y";
  for (std::size_t j = 0; j < ds.antennas; ++j)
    for (std::size_t k = 0; k < ds.freqs; ++k) os << ",re_" << j << '_' << k << ",im_" << j << '_' << k;
  os << '\n';
  os << std::setprecision(17);
  for (std::size_t i = 0; i < ds.size(); ++i) {
    os << ds.locations[i].x << ',' << ds.locations[i].y;
    for (const auto& v : ds.channels[i].data()) os << ',' << v.real() << ',' << v.imag();
    os << '\n';
  }
}

}  // namespace io
}  // namespace wfl
