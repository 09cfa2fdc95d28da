#pragma once
// Frequency grid and base-station array geometry.

#include <cmath>
#include <cstddef>
#include <numbers>
#include <numeric>
#include <vector>

#include "wfl/errors.hpp"
#include "wfl/geometry.hpp"

namespace wfl {

inline constexpr double kSpeedOfLight = 299'792'458.0;  // m/s
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// Subcarrier frequencies f_k and their wavelengths.
///
/// The central wavelength is the mean of the per-subcarrier wavelengths
/// (not c / mean(f)); it sets the spacing of the phase-sensitive loss minima.
class FreqGrid {
 public:
  FreqGrid() = default;

  explicit FreqGrid(std::vector<double> frequencies) : freqs_(std::move(frequencies)) {
    if (freqs_.empty()) throw InvalidArgument("FreqGrid: at least one frequency required");
    for (std::size_t k = 0; k < freqs_.size(); ++k) {
      if (!(freqs_[k] > 0.0) || !std::isfinite(freqs_[k]))
        throw InvalidArgument("FreqGrid: frequencies must be finite and positive");
      if (k > 0 && !(freqs_[k] > freqs_[k - 1]))
        throw InvalidArgument("FreqGrid: frequencies must be strictly increasing");
    }
    wavelengths_.reserve(freqs_.size());
    for (double f : freqs_) wavelengths_.push_back(kSpeedOfLight / f);
    lambda0_ = std::accumulate(wavelengths_.begin(), wavelengths_.end(), 0.0) /
               static_cast<double>(wavelengths_.size());
    detect_uniform();
  }

  /// `count` tones uniformly spread over [center - bandwidth/2, center + bandwidth/2],
  /// both edges included. A single tone sits at `center`.
  static FreqGrid uniform(double center, double bandwidth, std::size_t count) {
    if (count == 0) throw InvalidArgument("FreqGrid: count must be >= 1");
    std::vector<double> f(count);
    if (count == 1) {
      f[0] = center;
    } else {
      const double step = bandwidth / static_cast<double>(count - 1);
      for (std::size_t k = 0; k < count; ++k)
        f[k] = center - bandwidth / 2 + step * static_cast<double>(k);
    }
    return FreqGrid(std::move(f));
  }

  /// 64 tones over 20 MHz around 3.5 GHz.
  static FreqGrid default_band() { return uniform(3.5e9, 20e6, 64); }

  /// Single tone whose wavelength is exactly `lambda`.
  static FreqGrid single_wavelength(double lambda) {
    return FreqGrid({kSpeedOfLight / lambda});
  }

  std::size_t size() const { return freqs_.size(); }
  const std::vector<double>& frequencies() const { return freqs_; }
  const std::vector<double>& wavelengths() const { return wavelengths_; }
  double lambda0() const { return lambda0_; }

  /// Equal spacing lets path phases be generated by a complex recurrence.
  bool is_uniform() const { return uniform_; }
  double first() const { return freqs_.front(); }
  double spacing() const { return spacing_; }

 private:
  void detect_uniform() {
    uniform_ = true;
    spacing_ = 0.0;
    if (freqs_.size() < 2) return;
    spacing_ = (freqs_.back() - freqs_.front()) / static_cast<double>(freqs_.size() - 1);
    for (std::size_t k = 0; k < freqs_.size(); ++k) {
      const double expected = freqs_.front() + spacing_ * static_cast<double>(k);
      if (std::abs(freqs_[k] - expected) > 1e-9 * freqs_.back()) {
        uniform_ = false;
        return;
      }
    }
  }

  std::vector<double> freqs_;
  std::vector<double> wavelengths_;
  double lambda0_{0.0};
  bool uniform_{false};
  double spacing_{0.0};
};

/// Antenna element positions of the base-station array.
class ArrayConfig {
 public:
  ArrayConfig() = default;

  explicit ArrayConfig(std::vector<Vec2> positions) : positions_(std::move(positions)) {
    if (positions_.empty()) throw InvalidArgument("ArrayConfig: at least one antenna required");
    for (std::size_t i = 0; i < positions_.size(); ++i)
      for (std::size_t j = i + 1; j < positions_.size(); ++j)
        if (distance(positions_[i], positions_[j]) < 1e-12)
          throw InvalidGeometry("ArrayConfig: antenna positions must be distinct");
  }

  /// Uniform linear array of `count` elements centred on `center`, elements
  /// along the unit direction given by `axis_angle` (radians from +x).
  static ArrayConfig uniform_linear(std::size_t count, Vec2 center, double spacing,
                                    double axis_angle = 0.0) {
    if (count == 0) throw InvalidArgument("ArrayConfig: count must be >= 1");
    if (!(spacing > 0.0)) throw InvalidArgument("ArrayConfig: spacing must be positive");
    const Vec2 axis{std::cos(axis_angle), std::sin(axis_angle)};
    std::vector<Vec2> pos(count);
    const double mid = (static_cast<double>(count) - 1.0) / 2.0;
    for (std::size_t j = 0; j < count; ++j)
      pos[j] = center + axis * ((static_cast<double>(j) - mid) * spacing);
    return ArrayConfig(std::move(pos));
  }

  /// Half-wavelength ULA for the given band.
  static ArrayConfig half_wavelength_ula(std::size_t count, Vec2 center, const FreqGrid& band,
                                         double axis_angle = 0.0) {
    return uniform_linear(count, center, band.lambda0() / 2, axis_angle);
  }

  std::size_t size() const { return positions_.size(); }
  const std::vector<Vec2>& positions() const { return positions_; }
  const Vec2& operator[](std::size_t j) const { return positions_[j]; }

  Vec2 centroid() const {
    Vec2 c;
    for (const auto& p : positions_) c += p;
    return c / static_cast<double>(positions_.size());
  }

 private:
  std::vector<Vec2> positions_;
};

}  // namespace wfl
