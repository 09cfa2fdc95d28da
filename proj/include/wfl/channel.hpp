#pragma once
// Point-source channel synthesis, its spatial gradient, noise and NMSE.
//
// Entry (j, k) of H(x) is the sum over the visible virtual sources l of
// antenna j of  gain_l / d * exp(-i 2 pi d / lambda_k),  d = |x - a_l|.
// Amplitudes use the exact 1/d law.

#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <span>
#include <vector>

#include "wfl/errors.hpp"
#include "wfl/geometry.hpp"
#include "wfl/radio.hpp"
#include "wfl/scene.hpp"

namespace wfl {

/// N_a x N_s complex matrix stored row-major (antenna-major, then frequency).
class ChannelMatrix {
 public:
  ChannelMatrix() = default;
  ChannelMatrix(std::size_t antennas, std::size_t freqs)
      : antennas_(antennas), freqs_(freqs), data_(antennas * freqs) {}

  std::size_t antennas() const { return antennas_; }
  std::size_t freqs() const { return freqs_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  cplx& operator()(std::size_t j, std::size_t k) { return data_[j * freqs_ + k]; }
  const cplx& operator()(std::size_t j, std::size_t k) const { return data_[j * freqs_ + k]; }

  std::span<cplx> row(std::size_t j) { return {data_.data() + j * freqs_, freqs_}; }
  std::span<const cplx> row(std::size_t j) const { return {data_.data() + j * freqs_, freqs_}; }

  std::span<cplx> data() { return data_; }
  std::span<const cplx> data() const { return data_; }

  void resize(std::size_t antennas, std::size_t freqs) {
    antennas_ = antennas;
    freqs_ = freqs;
    data_.assign(antennas * freqs, cplx{});
  }
  void set_zero() { std::fill(data_.begin(), data_.end(), cplx{}); }

  bool same_shape(const ChannelMatrix& o) const {
    return antennas_ == o.antennas_ && freqs_ == o.freqs_;
  }

  double frobenius_sq() const {
    double s = 0.0;
    for (const auto& v : data_) s += std::norm(v);
    return s;
  }
  double frobenius() const { return std::sqrt(frobenius_sq()); }

  bool all_finite() const {
    for (const auto& v : data_)
      if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) return false;
    return true;
  }

  ChannelMatrix& operator*=(cplx s) {
    for (auto& v : data_) v *= s;
    return *this;
  }

  std::optional<Vec2> location_tag;

 private:
  std::size_t antennas_{0};
  std::size_t freqs_{0};
  std::vector<cplx> data_;
};

/// Partial derivatives of H with respect to the two location coordinates (per meter).
struct ChannelGradient {
  ChannelMatrix d_dx;
  ChannelMatrix d_dy;

  ChannelGradient() = default;
  ChannelGradient(std::size_t antennas, std::size_t freqs)
      : d_dx(antennas, freqs), d_dy(antennas, freqs) {}

  void resize(std::size_t antennas, std::size_t freqs) {
    d_dx.resize(antennas, freqs);
    d_dy.resize(antennas, freqs);
  }
  void set_zero() {
    d_dx.set_zero();
    d_dy.set_zero();
  }
};

inline void require_same_shape(const ChannelMatrix& a, const ChannelMatrix& b, const char* who) {
  if (!a.same_shape(b)) throw DimensionMismatch(std::string(who) + ": channel dimensions differ");
}

/// Frobenius norm of a - b.
inline double frobenius_distance(const ChannelMatrix& a, const ChannelMatrix& b) {
  require_same_shape(a, b, "frobenius_distance");
  double s = 0.0;
  const auto da = a.data();
  const auto db = b.data();
  for (std::size_t i = 0; i < da.size(); ++i) s += std::norm(da[i] - db[i]);
  return std::sqrt(s);
}

/// sum conj(a_i) b_i, i.e. tr(A^H B).
inline cplx inner(const ChannelMatrix& a, const ChannelMatrix& b) {
  require_same_shape(a, b, "inner");
  cplx s{};
  const auto da = a.data();
  const auto db = b.data();
  for (std::size_t i = 0; i < da.size(); ++i) s += std::conj(da[i]) * db[i];
  return s;
}

inline constexpr double kMinSourceDistance = 1e-6;  // m

namespace detail {

/// Adds gain/d * exp(-i 2 pi d / lambda_k) for every tone into `row`.
inline void accumulate_path(std::span<cplx> row, cplx gain, double d, const FreqGrid& band) {
  const double amp_scale = 1.0 / d;
  if (band.is_uniform()) {
    cplx term = gain * amp_scale * std::polar(1.0, -kTwoPi * d * band.first() / kSpeedOfLight);
    const cplx step = std::polar(1.0, -kTwoPi * d * band.spacing() / kSpeedOfLight);
    for (std::size_t k = 0; k < row.size(); ++k) {
      row[k] += term;
      term *= step;
    }
  } else {
    const auto& lam = band.wavelengths();
    for (std::size_t k = 0; k < row.size(); ++k)
      row[k] += gain * amp_scale * std::polar(1.0, -kTwoPi * d / lam[k]);
  }
}

/// Adds the path term to `row` and its x/y derivatives to `drow_x`, `drow_y`.
///   d/dx [g/d e^{-i phi d}] = g/d e^{-i phi d} (-1/d - i phi) * (x - a)/d
inline void accumulate_path_with_gradient(std::span<cplx> row, std::span<cplx> drow_x,
                                          std::span<cplx> drow_y, cplx gain, const Vec2& offset,
                                          double d, const FreqGrid& band) {
  const double inv_d = 1.0 / d;
  const Vec2 u = offset * inv_d;
  const auto& lam = band.wavelengths();
  if (band.is_uniform()) {
    cplx term = gain * inv_d * std::polar(1.0, -kTwoPi * d * band.first() / kSpeedOfLight);
    const cplx step = std::polar(1.0, -kTwoPi * d * band.spacing() / kSpeedOfLight);
    for (std::size_t k = 0; k < row.size(); ++k) {
      const cplx radial = term * cplx(-inv_d, -kTwoPi / lam[k]);
      row[k] += term;
      drow_x[k] += radial * u.x;
      drow_y[k] += radial * u.y;
      term *= step;
    }
  } else {
    for (std::size_t k = 0; k < row.size(); ++k) {
      const cplx term = gain * inv_d * std::polar(1.0, -kTwoPi * d / lam[k]);
      const cplx radial = term * cplx(-inv_d, -kTwoPi / lam[k]);
      row[k] += term;
      drow_x[k] += radial * u.x;
      drow_y[k] += radial * u.y;
    }
  }
}

inline double checked_distance(const Vec2& x, const Vec2& source) {
  const double d = distance(x, source);
  if (d <= kMinSourceDistance) throw Singularity("evaluation point coincides with a source");
  return d;
}

}  // namespace detail

/// Per-antenna sets of sources already known to be visible from x.
using SourceSets = std::vector<std::vector<VirtualSource>>;

inline ChannelMatrix synthesize(const Vec2& x, const SourceSets& sources, const FreqGrid& band) {
  ChannelMatrix h(sources.size(), band.size());
  for (std::size_t j = 0; j < sources.size(); ++j)
    for (const auto& s : sources[j])
      detail::accumulate_path(h.row(j), s.gain, detail::checked_distance(x, s.position), band);
  h.location_tag = x;
  return h;
}

/// Closed-form gradient; the visible set is held fixed.
inline ChannelGradient channel_gradient(const Vec2& x, const SourceSets& sources,
                                        const FreqGrid& band) {
  ChannelGradient g(sources.size(), band.size());
  ChannelMatrix scratch(sources.size(), band.size());
  for (std::size_t j = 0; j < sources.size(); ++j)
    for (const auto& s : sources[j]) {
      const Vec2 off = x - s.position;
      detail::accumulate_path_with_gradient(scratch.row(j), g.d_dx.row(j), g.d_dy.row(j), s.gain,
                                            off, detail::checked_distance(x, s.position), band);
    }
  return g;
}

/// H + N with N = sigma/sqrt(2) (Z1 + i Z2), sigma^2 = |H|_F^2 / (N_a N_s SNR_lin).
/// snr_db = +inf returns H unchanged.
inline ChannelMatrix add_noise(const ChannelMatrix& h, double snr_db, std::uint64_t seed) {
  if (std::isnan(snr_db) || snr_db == -std::numeric_limits<double>::infinity())
    throw InvalidArgument("add_noise: snr_db must be finite or +inf");
  if (std::isinf(snr_db)) return h;
  const double energy = h.frobenius_sq();
  if (!(energy > 0.0)) throw DegenerateChannel("add_noise: channel has zero Frobenius norm");
  const double snr_lin = std::pow(10.0, snr_db / 10.0);
  const double sigma = std::sqrt(energy / (static_cast<double>(h.size()) * snr_lin));
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> z(0.0, 1.0);
  ChannelMatrix out = h;
  const double scale = sigma / std::sqrt(2.0);
  for (auto& v : out.data()) {
    const double re = z(rng);
    const double im = z(rng);
    v += cplx(re, im) * scale;
  }
  return out;
}

/// Squared normalized model error |H_true - H_est|_F^2 / |H_true|_F^2.
inline double nmse(const ChannelMatrix& h_true, const ChannelMatrix& h_est) {
  require_same_shape(h_true, h_est, "nmse");
  const double ref = h_true.frobenius_sq();
  if (!(ref > 0.0)) throw DegenerateChannel("nmse: reference channel has zero norm");
  const double d = frobenius_distance(h_true, h_est);
  return d * d / ref;
}

/// Scene + array + band with cached per-antenna source enumeration. Visibility
/// is evaluated per call, since path sets change across the scene.
class Propagation {
 public:
  Propagation(Scene scene, FreqGrid band, int max_order = 2)
      : scene_(std::move(scene)), band_(std::move(band)), max_order_(max_order) {
    scene_.validate();
    sources_.reserve(scene_.array.size());
    for (std::size_t j = 0; j < scene_.array.size(); ++j)
      sources_.push_back(enumerate_virtual_sources(scene_, j, max_order_));
  }

  const Scene& scene() const { return scene_; }
  const FreqGrid& band() const { return band_; }
  int max_order() const { return max_order_; }
  std::size_t antennas() const { return scene_.array.size(); }
  std::size_t freqs() const { return band_.size(); }
  double lambda0() const { return band_.lambda0(); }

  const std::vector<VirtualSource>& candidates(std::size_t antenna) const {
    return sources_[antenna];
  }

  /// Visible sources at x, grouped per antenna.
  SourceSets visible(const Vec2& x) const {
    SourceSets out(antennas());
    for (std::size_t j = 0; j < antennas(); ++j)
      for (const auto& s : sources_[j])
        if (path_visible(x, s, scene_)) out[j].push_back(s);
    return out;
  }

  void channel_into(const Vec2& x, ChannelMatrix& out) const {
    if (out.antennas() != antennas() || out.freqs() != freqs()) out.resize(antennas(), freqs());
    else out.set_zero();
    const bool open = scene_.walls.empty();
    for (std::size_t j = 0; j < antennas(); ++j)
      for (const auto& s : sources_[j])
        if (open || path_visible(x, s, scene_))
          detail::accumulate_path(out.row(j), s.gain, detail::checked_distance(x, s.position),
                                  band_);
    out.location_tag = x;
  }

  void channel_with_gradient_into(const Vec2& x, ChannelMatrix& out, ChannelGradient& grad) const {
    if (out.antennas() != antennas() || out.freqs() != freqs()) out.resize(antennas(), freqs());
    else out.set_zero();
    if (grad.d_dx.antennas() != antennas() || grad.d_dx.freqs() != freqs())
      grad.resize(antennas(), freqs());
    else grad.set_zero();
    const bool open = scene_.walls.empty();
    for (std::size_t j = 0; j < antennas(); ++j)
      for (const auto& s : sources_[j])
        if (open || path_visible(x, s, scene_))
          detail::accumulate_path_with_gradient(out.row(j), grad.d_dx.row(j), grad.d_dy.row(j),
                                                s.gain, x - s.position,
                                                detail::checked_distance(x, s.position), band_);
    out.location_tag = x;
  }

  ChannelMatrix channel(const Vec2& x) const {
    ChannelMatrix h;
    channel_into(x, h);
    return h;
  }

  /// True when the direct (order-0) path of at least one antenna reaches x.
  bool has_line_of_sight(const Vec2& x) const {
    for (std::size_t j = 0; j < antennas(); ++j)
      if (path_visible(x, sources_[j].front(), scene_)) return true;
    return false;
  }

 private:
  Scene scene_;
  FreqGrid band_;
  int max_order_;
  std::vector<std::vector<VirtualSource>> sources_;
};

}  // namespace wfl
