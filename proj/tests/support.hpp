#pragma once

#include <cmath>
#include <complex>
#include <memory>
#include <numbers>
#include <random>
#include <vector>

#include "wfl/channel.hpp"
#include "wfl/scene.hpp"

namespace wfl::fixtures {

/// 10 x 10 m, no walls, 64-element half-wavelength ULA far below the room.
inline Scene far_los_scene(const FreqGrid& band = FreqGrid::default_band()) {
  Scene s;
  s.array = ArrayConfig::half_wavelength_ula(64, {0, -35}, band);
  return s;
}

/// Small multipath room used where full-size channels would be slow.
inline Scene small_room(std::size_t antennas = 8) {
  Scene s;
  s.extent_x = 4;
  s.extent_y = 4;
  s.array = ArrayConfig::uniform_linear(antennas, {0, -3}, 0.0857 / 2);
  s.walls = {{{-2.5, -4}, {-2.5, 2.5}}, {{2.5, -4}, {2.5, 2.5}}, {{-2, 2.6}, {2, 2.6}}};
  return s;
}

/// 0.5 x 0.5 m, no walls, 16 antennas on a circle of radius 2 m.
inline Scene compact_ring_scene() {
  Scene s;
  s.extent_x = 0.5;
  s.extent_y = 0.5;
  std::vector<Vec2> pos;
  for (int j = 0; j < 16; ++j) pos.push_back(from_polar(2.0, 2 * std::numbers::pi * j / 16 + 0.1));
  s.array = ArrayConfig(pos);
  return s;
}

inline FreqGrid small_band() { return FreqGrid::uniform(3.5e9, 20e6, 8); }

inline double rel_err(std::complex<double> a, std::complex<double> b) {
  return std::abs(a - b) / std::max(std::abs(b), 1e-300);
}

inline double max_rel_err(const ChannelMatrix& a, const ChannelMatrix& b) {
  double worst = 0;
  double scale = 0;
  for (const auto& v : b.data()) scale = std::max(scale, std::abs(v));
  for (std::size_t i = 0; i < a.size(); ++i)
    worst = std::max(worst, std::abs(a.data()[i] - b.data()[i]) / scale);
  return worst;
}

}  // namespace wfl::fixtures
