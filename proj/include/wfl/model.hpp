#pragma once
// Evaluable, differentiable location-to-channel maps.
//
// Three providers share the ChannelModel interface:
//  - ExactModel: the image-method simulator itself (zero model error).
//  - PerturbedModel: H(x) (1 + p(x)) with a frozen smooth phase field p of
//    constant modulus, so the per-location NMSE is the same everywhere.
//  - KernelSurrogate: Gaussian-kernel interpolation of a training dataset.

#include <Eigen/Cholesky>
#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <unordered_map>
#include <vector>

#include "wfl/channel.hpp"
#include "wfl/dataset.hpp"
#include "wfl/errors.hpp"

namespace wfl {

class ChannelModel {
 public:
  virtual ~ChannelModel() = default;

  virtual std::size_t antennas() const = 0;
  virtual std::size_t freqs() const = 0;
  virtual double lambda0() const = 0;

  virtual void eval_into(const Vec2& x, ChannelMatrix& out) const = 0;
  virtual void eval_with_gradient_into(const Vec2& x, ChannelMatrix& out,
                                       ChannelGradient& grad) const = 0;

  /// Upper bound on the per-location model error, when one is known.
  virtual std::optional<double> error_bound() const = 0;
  /// Stored real scalars (0 for analytic models).
  virtual std::size_t parameter_count() const = 0;
  virtual std::string name() const = 0;

  ChannelMatrix eval(const Vec2& x) const {
    ChannelMatrix h;
    eval_into(x, h);
    return h;
  }

  ChannelGradient grad(const Vec2& x) const {
    ChannelMatrix h;
    ChannelGradient g;
    eval_with_gradient_into(x, h, g);
    return g;
  }
};

using ModelPtr = std::shared_ptr<const ChannelModel>;

class ExactModel final : public ChannelModel {
 public:
  explicit ExactModel(std::shared_ptr<const Propagation> prop) : prop_(std::move(prop)) {
    if (!prop_) throw InvalidArgument("ExactModel: null propagation");
  }

  std::size_t antennas() const override { return prop_->antennas(); }
  std::size_t freqs() const override { return prop_->freqs(); }
  double lambda0() const override { return prop_->lambda0(); }

  void eval_into(const Vec2& x, ChannelMatrix& out) const override { prop_->channel_into(x, out); }
  void eval_with_gradient_into(const Vec2& x, ChannelMatrix& out,
                               ChannelGradient& grad) const override {
    prop_->channel_with_gradient_into(x, out, grad);
  }

  std::optional<double> error_bound() const override { return 0.0; }
  std::size_t parameter_count() const override { return 0; }
  std::string name() const override { return "exact"; }

  const Propagation& propagation() const { return *prop_; }

 private:
  std::shared_ptr<const Propagation> prop_;
};

inline ModelPtr make_exact(std::shared_ptr<const Propagation> prop) {
  return std::make_shared<ExactModel>(std::move(prop));
}

inline ModelPtr make_exact(const Scene& scene, const FreqGrid& band, int max_order = 2) {
  return make_exact(std::make_shared<const Propagation>(scene, band, max_order));
}

/// H(x) (1 + p(x)) with p_jk(x) = s exp(i (q_j + r_k) . x + i psi_jk).
///
/// The wave vectors q_j, r_k are drawn with |q|, |r| <= pi / lambda0 so the
/// combined spatial period is at least lambda0. Because |p| = s everywhere,
/// the per-location NMSE equals s^2 at every x; s is set to epsilon.
class PerturbedModel final : public ChannelModel {
 public:
  PerturbedModel(std::shared_ptr<const Propagation> prop, double epsilon, std::uint64_t seed)
      : prop_(std::move(prop)), epsilon_(epsilon) {
    if (!prop_) throw InvalidArgument("PerturbedModel: null propagation");
    if (!(epsilon >= 0.0) || !std::isfinite(epsilon))
      throw InvalidArgument("PerturbedModel: epsilon must be finite and nonnegative");
    const std::size_t na = prop_->antennas();
    const std::size_t ns = prop_->freqs();
    const double kmax = std::numbers::pi / prop_->lambda0();
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    auto draw_wavevector = [&] {
      const double mag = kmax * unit(rng);
      const double ang = kTwoPi * unit(rng);
      return Vec2{mag * std::cos(ang), mag * std::sin(ang)};
    };
    q_.resize(na);
    r_.resize(ns);
    for (auto& v : q_) v = draw_wavevector();
    for (auto& v : r_) v = draw_wavevector();
    phase_.resize(na * ns);
    for (auto& ph : phase_) ph = std::polar(1.0, kTwoPi * unit(rng));
  }

  std::size_t antennas() const override { return prop_->antennas(); }
  std::size_t freqs() const override { return prop_->freqs(); }
  double lambda0() const override { return prop_->lambda0(); }

  void eval_into(const Vec2& x, ChannelMatrix& out) const override {
    prop_->channel_into(x, out);
    if (epsilon_ == 0.0) return;
    const std::size_t ns = freqs();
    std::vector<cplx> ek(ns);
    for (std::size_t k = 0; k < ns; ++k) ek[k] = std::polar(1.0, dot(r_[k], x));
    for (std::size_t j = 0; j < antennas(); ++j) {
      const cplx ej = epsilon_ * std::polar(1.0, dot(q_[j], x));
      auto row = out.row(j);
      const cplx* ph = phase_.data() + j * ns;
      for (std::size_t k = 0; k < ns; ++k) row[k] *= 1.0 + ej * ph[k] * ek[k];
    }
  }

  void eval_with_gradient_into(const Vec2& x, ChannelMatrix& out,
                               ChannelGradient& grad) const override {
    prop_->channel_with_gradient_into(x, out, grad);
    if (epsilon_ == 0.0) return;
    const std::size_t ns = freqs();
    std::vector<cplx> ek(ns);
    for (std::size_t k = 0; k < ns; ++k) ek[k] = std::polar(1.0, dot(r_[k], x));
    const cplx i1{0.0, 1.0};
    for (std::size_t j = 0; j < antennas(); ++j) {
      const cplx ej = epsilon_ * std::polar(1.0, dot(q_[j], x));
      auto h = out.row(j);
      auto gx = grad.d_dx.row(j);
      auto gy = grad.d_dy.row(j);
      const cplx* ph = phase_.data() + j * ns;
      for (std::size_t k = 0; k < ns; ++k) {
        const cplx p = ej * ph[k] * ek[k];
        const Vec2 kv = q_[j] + r_[k];
        const cplx hp = h[k] * p * i1;
        gx[k] = gx[k] * (1.0 + p) + hp * kv.x;
        gy[k] = gy[k] * (1.0 + p) + hp * kv.y;
        h[k] *= 1.0 + p;
      }
    }
  }

  std::optional<double> error_bound() const override { return 1.05 * epsilon_; }
  std::size_t parameter_count() const override { return 0; }
  std::string name() const override { return "perturbed:" + std::to_string(epsilon_); }

  double epsilon() const { return epsilon_; }

 private:
  std::shared_ptr<const Propagation> prop_;
  double epsilon_;
  std::vector<Vec2> q_;
  std::vector<Vec2> r_;
  std::vector<cplx> phase_;
};

inline ModelPtr make_perturbed(std::shared_ptr<const Propagation> prop, double epsilon,
                               std::uint64_t seed) {
  return std::make_shared<PerturbedModel>(std::move(prop), epsilon, seed);
}

inline ModelPtr make_perturbed(const Scene& scene, const FreqGrid& band, double epsilon,
                               std::uint64_t seed, int max_order = 2) {
  return make_perturbed(std::make_shared<const Propagation>(scene, band, max_order), epsilon,
                        seed);
}

/// Reference carrier e^{-i 2 pi d_j / lambda_k} / d_j of the direct paths.
/// Interpolating H / carrier instead of H removes the fast lambda-scale phase
/// rotation, leaving a field that a kernel can resolve at practical densities.
struct CarrierReference {
  ArrayConfig array;
  FreqGrid band;

  void fill(const Vec2& x, ChannelMatrix& c) const {
    if (c.antennas() != array.size() || c.freqs() != band.size()) c.resize(array.size(), band.size());
    else c.set_zero();
    for (std::size_t j = 0; j < array.size(); ++j)
      detail::accumulate_path(c.row(j), 1.0, detail::checked_distance(x, array[j]), band);
  }

  void fill_with_gradient(const Vec2& x, ChannelMatrix& c, ChannelGradient& g) const {
    if (c.antennas() != array.size() || c.freqs() != band.size()) c.resize(array.size(), band.size());
    else c.set_zero();
    if (g.d_dx.antennas() != array.size() || g.d_dx.freqs() != band.size())
      g.resize(array.size(), band.size());
    else g.set_zero();
    for (std::size_t j = 0; j < array.size(); ++j)
      detail::accumulate_path_with_gradient(c.row(j), g.d_dx.row(j), g.d_dy.row(j), 1.0,
                                            x - array[j], detail::checked_distance(x, array[j]),
                                            band);
  }
};

/// Mean distance from each point to its nearest other point.
inline double mean_nearest_neighbor_spacing(const std::vector<Vec2>& pts) {
  if (pts.size() < 2) throw InvalidArgument("mean_nearest_neighbor_spacing: need >= 2 points");
  double sum = 0.0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < pts.size(); ++j)
      if (j != i) best = std::min(best, norm_sq(pts[i] - pts[j]));
    sum += std::sqrt(best);
  }
  return sum / static_cast<double>(pts.size());
}

/// Gaussian-kernel interpolant k(r) = exp(-r^2 / h^2) of every channel
/// coefficient, around a per-coefficient mean so that constant fields are
/// reproduced exactly.
class KernelSurrogate final : public ChannelModel {
 public:
  /// Support radius in bandwidths; the kernel is below 1e-15 beyond it.
  static constexpr double kCutoff = 6.0;

  KernelSurrogate(std::vector<Vec2> nodes, double bandwidth, std::size_t antennas,
                  std::size_t freqs, std::vector<cplx> weights,
                  std::optional<CarrierReference> carrier, std::vector<cplx> mean = {})
      : nodes_(std::move(nodes)),
        h_(bandwidth),
        antennas_(antennas),
        freqs_(freqs),
        weights_(std::move(weights)),
        carrier_(std::move(carrier)),
        mean_(std::move(mean)) {
    if (mean_.empty()) mean_.assign(antennas_ * freqs_, cplx{});
    if (mean_.size() != antennas_ * freqs_)
      throw DimensionMismatch("KernelSurrogate: mean size does not match antennas x freqs");
    if (!(h_ > 0.0)) throw InvalidArgument("KernelSurrogate: bandwidth must be positive");
    if (weights_.size() != nodes_.size() * antennas_ * freqs_)
      throw DimensionMismatch("KernelSurrogate: weight count does not match nodes x coefficients");
    if (carrier_ && (carrier_->array.size() != antennas_ || carrier_->band.size() != freqs_))
      throw DimensionMismatch("KernelSurrogate: carrier reference dimensions differ");
    lambda0_ = carrier_ ? carrier_->band.lambda0() : 0.0;
    build_buckets();
  }

  std::size_t antennas() const override { return antennas_; }
  std::size_t freqs() const override { return freqs_; }
  double lambda0() const override { return lambda0_; }
  void set_lambda0(double l) { lambda0_ = l; }

  void eval_into(const Vec2& x, ChannelMatrix& out) const override {
    if (out.antennas() != antennas_ || out.freqs() != freqs_) out.resize(antennas_, freqs_);
    const std::size_t m = antennas_ * freqs_;
    auto o = out.data();
    std::copy(mean_.begin(), mean_.end(), o.begin());
    for_each_neighbor(x, [&](std::size_t i, double kv, const Vec2&) {
      const cplx* w = weights_.data() + i * m;
      for (std::size_t c = 0; c < m; ++c) o[c] += kv * w[c];
    });
    if (carrier_) {
      ChannelMatrix car;
      carrier_->fill(x, car);
      auto cd = car.data();
      for (std::size_t c = 0; c < m; ++c) o[c] *= cd[c];
    }
    out.location_tag = x;
  }

  void eval_with_gradient_into(const Vec2& x, ChannelMatrix& out,
                               ChannelGradient& grad) const override {
    if (out.antennas() != antennas_ || out.freqs() != freqs_) out.resize(antennas_, freqs_);
    if (grad.d_dx.antennas() != antennas_ || grad.d_dx.freqs() != freqs_) grad.resize(antennas_, freqs_);
    else grad.set_zero();
    const std::size_t m = antennas_ * freqs_;
    auto o = out.data();
    auto gx = grad.d_dx.data();
    auto gy = grad.d_dy.data();
    std::copy(mean_.begin(), mean_.end(), o.begin());
    const double inv_h2 = 1.0 / (h_ * h_);
    for_each_neighbor(x, [&](std::size_t i, double kv, const Vec2& off) {
      const cplx* w = weights_.data() + i * m;
      const double dkx = -2.0 * off.x * inv_h2 * kv;
      const double dky = -2.0 * off.y * inv_h2 * kv;
      for (std::size_t c = 0; c < m; ++c) {
        o[c] += kv * w[c];
        gx[c] += dkx * w[c];
        gy[c] += dky * w[c];
      }
    });
    if (carrier_) {
      ChannelMatrix car;
      ChannelGradient dcar;
      carrier_->fill_with_gradient(x, car, dcar);
      auto cd = car.data();
      auto cdx = dcar.d_dx.data();
      auto cdy = dcar.d_dy.data();
      for (std::size_t c = 0; c < m; ++c) {
        gx[c] = gx[c] * cd[c] + o[c] * cdx[c];
        gy[c] = gy[c] * cd[c] + o[c] * cdy[c];
        o[c] *= cd[c];
      }
    }
    out.location_tag = x;
  }

  std::optional<double> error_bound() const override { return std::nullopt; }
  std::size_t parameter_count() const override {
    return (nodes_.size() + 1) * 2 * antennas_ * freqs_ + 2 * nodes_.size();
  }
  std::string name() const override { return "surrogate"; }

  const std::vector<Vec2>& nodes() const { return nodes_; }
  double bandwidth() const { return h_; }
  const std::vector<cplx>& weights() const { return weights_; }
  const std::vector<cplx>& mean() const { return mean_; }
  const std::optional<CarrierReference>& carrier() const { return carrier_; }

 private:
  struct CellKey {
    std::int64_t ix, iy;
    bool operator==(const CellKey&) const = default;
  };
  struct CellHash {
    std::size_t operator()(const CellKey& k) const {
      return std::hash<std::int64_t>()(k.ix * 73856093LL ^ k.iy * 19349663LL);
    }
  };

  CellKey cell_of(const Vec2& p) const {
    return {static_cast<std::int64_t>(std::floor(p.x / cell_)),
            static_cast<std::int64_t>(std::floor(p.y / cell_))};
  }

  void build_buckets() {
    cell_ = kCutoff * h_;
    for (std::size_t i = 0; i < nodes_.size(); ++i) buckets_[cell_of(nodes_[i])].push_back(i);
  }

  template <class F>
  void for_each_neighbor(const Vec2& x, F&& f) const {
    const CellKey c = cell_of(x);
    const double r2max = cell_ * cell_;
    const double inv_h2 = 1.0 / (h_ * h_);
    for (std::int64_t dx = -1; dx <= 1; ++dx)
      for (std::int64_t dy = -1; dy <= 1; ++dy) {
        const auto it = buckets_.find({c.ix + dx, c.iy + dy});
        if (it == buckets_.end()) continue;
        for (std::size_t i : it->second) {
          const Vec2 off = x - nodes_[i];
          const double r2 = norm_sq(off);
          if (r2 > r2max) continue;
          f(i, std::exp(-r2 * inv_h2), off);
        }
      }
  }

  std::vector<Vec2> nodes_;
  double h_;
  std::size_t antennas_;
  std::size_t freqs_;
  std::vector<cplx> weights_;  // node-major, then coefficient
  std::optional<CarrierReference> carrier_;
  std::vector<cplx> mean_;
  double lambda0_{0.0};
  double cell_{1.0};
  std::unordered_map<CellKey, std::vector<std::size_t>, CellHash> buckets_;
};

/// Solves K W = G for the interpolating weights of every coefficient.
/// `carrier` enables demodulation by the direct-path carrier.
inline std::shared_ptr<const KernelSurrogate> fit_kernel_surrogate(
    const Dataset& train, double bandwidth, std::optional<CarrierReference> carrier = std::nullopt) {
  if (train.size() < 4) throw InvalidArgument("fit_kernel_surrogate: need at least 4 training records");
  if (!(bandwidth > 0.0)) throw InvalidArgument("fit_kernel_surrogate: bandwidth must be positive");
  const std::size_t n = train.size();
  const std::size_t m = train.antennas * train.freqs;

  Eigen::MatrixXd K(n, n);
  const double inv_h2 = 1.0 / (bandwidth * bandwidth);
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = a; b < n; ++b) {
      const double v = std::exp(-norm_sq(train.locations[a] - train.locations[b]) * inv_h2);
      K(a, b) = v;
      K(b, a) = v;
    }

  Eigen::MatrixXd G(n, 2 * m);
  ChannelMatrix car;
  for (std::size_t a = 0; a < n; ++a) {
    const auto& h = train.channels[a];
    if (carrier) carrier->fill(train.locations[a], car);
    for (std::size_t c = 0; c < m; ++c) {
      const cplx v = carrier ? h.data()[c] / car.data()[c] : h.data()[c];
      G(a, 2 * c) = v.real();
      G(a, 2 * c + 1) = v.imag();
    }
  }
  const Eigen::RowVectorXd mu = G.colwise().mean();
  G.rowwise() -= mu;

  Eigen::LLT<Eigen::MatrixXd> llt(K);
  if (llt.info() != Eigen::Success)
    throw IllConditionedFit(
        "fit_kernel_surrogate: kernel matrix is numerically singular; try a smaller bandwidth "
        "or fewer coincident training points");
  const Eigen::MatrixXd W = llt.solve(G);
  const double resid = (K * W - G).norm();
  const double scale = std::max(G.norm(), 1e-12 * mu.norm() * std::sqrt(static_cast<double>(n)));
  if (!W.allFinite() || resid > 1e-9 * std::max(scale, 1e-300))
    throw IllConditionedFit("fit_kernel_surrogate: interpolation system is ill-conditioned (residual " +
                            std::to_string(resid / std::max(scale, 1e-300)) + ")");

  std::vector<cplx> weights(n * m);
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t c = 0; c < m; ++c) weights[a * m + c] = {W(a, 2 * c), W(a, 2 * c + 1)};

  std::vector<cplx> mean(m);
  for (std::size_t c = 0; c < m; ++c) mean[c] = {mu(2 * c), mu(2 * c + 1)};
  auto model = std::make_shared<KernelSurrogate>(train.locations, bandwidth, train.antennas, train.freqs,
                                                 std::move(weights), std::move(carrier), std::move(mean));
  return model;
}

/// Bandwidth rule: twice the mean nearest-neighbor spacing of the training set.
inline double default_surrogate_bandwidth(const Dataset& train) {
  return 2.0 * mean_nearest_neighbor_spacing(train.locations);
}

namespace io {

inline constexpr std::array<char, 4> kWeightsMagic{'W', 'F', 'L', 'W'};
inline constexpr std::uint32_t kWeightsVersion = 2;

/// Dataset records (the training nodes and channels) followed by a weights section:
///   "WFLW", version u32, bandwidth f64, demodulated u32,
///   [if demodulated: n_ant u32, n_ant * (x f64, y f64), n_freq u32, n_freq * f64],
///   n_nodes * n_coeff * (re f64, im f64).
inline void save_surrogate(const std::string& path, const KernelSurrogate& s, const Dataset& train) {
  if (train.size() != s.nodes().size())
    throw DimensionMismatch("save_surrogate: training set does not match the fit");
  std::ofstream os(path, std::ios::binary);
  if (!os) throw FormatError("cannot open " + path + " for writing");
  write_dataset(os, train);
  os.write(kWeightsMagic.data(), 4);
  put_u32(os, kWeightsVersion);
  put_f64(os, s.bandwidth());
  put_u32(os, s.carrier() ? 1u : 0u);
  if (s.carrier()) {
    const auto& arr = s.carrier()->array;
    put_u32(os, checked_u32(arr.size(), "antenna count"));
    for (const auto& p : arr.positions()) {
      put_f64(os, p.x);
      put_f64(os, p.y);
    }
    const auto& f = s.carrier()->band.frequencies();
    put_u32(os, checked_u32(f.size(), "frequency count"));
    for (double v : f) put_f64(os, v);
  }
  for (const auto* v : {&s.mean(), &s.weights()})
    for (const auto& w : *v) {
      put_f64(os, w.real());
      put_f64(os, w.imag());
    }
  if (!os) throw FormatError("write failed: " + path);
}

inline std::shared_ptr<const KernelSurrogate> load_surrogate(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw FormatError("cannot open " + path);
  Dataset train = read_dataset(is);
  expect_magic(is, kWeightsMagic, "surrogate weights section");
  const auto version = get_u32(is);
  if (version != kWeightsVersion)
    throw FormatError("unsupported surrogate weights version " + std::to_string(version));
  const double h = get_f64(is);
  const bool demod = get_u32(is) != 0;
  std::optional<CarrierReference> carrier;
  if (demod) {
    const auto na = get_u32(is);
    std::vector<Vec2> pos(na);
    for (auto& p : pos) {
      p.x = get_f64(is);
      p.y = get_f64(is);
    }
    const auto ns = get_u32(is);
    std::vector<double> f(ns);
    for (auto& v : f) v = get_f64(is);
    carrier = CarrierReference{ArrayConfig(std::move(pos)), FreqGrid(std::move(f))};
  }
  std::vector<cplx> mean(train.antennas * train.freqs);
  std::vector<cplx> w(train.size() * train.antennas * train.freqs);
  for (auto* vec : {&mean, &w})
    for (auto& v : *vec) {
      const double re = get_f64(is);
      const double im = get_f64(is);
      v = {re, im};
    }
  return std::make_shared<KernelSurrogate>(train.locations, h, train.antennas, train.freqs,
                                           std::move(w), std::move(carrier), std::move(mean));
}

}  // namespace io

/// Parses "exact", "perturbed:<eps>" or "surrogate:<path>".
inline ModelPtr make_model(const std::string& spec, std::shared_ptr<const Propagation> prop,
                           std::uint64_t seed) {
  if (spec == "exact") return make_exact(std::move(prop));
  const auto colon = spec.find(':');
  const std::string kind = spec.substr(0, colon);
  const std::string arg = colon == std::string::npos ? "" : spec.substr(colon + 1);
  if (kind == "perturbed") {
    double eps = 0.0;
    try {
      eps = std::stod(arg);
    } catch (const std::exception&) {
      throw InvalidArgument("model spec: cannot parse epsilon in '" + spec + "'");
    }
    return make_perturbed(std::move(prop), eps, seed);
  }
  if (kind == "surrogate") {
    if (arg.empty()) throw InvalidArgument("model spec: surrogate needs a path");
    auto s = io::load_surrogate(arg);
    if (s->antennas() != prop->antennas() || s->freqs() != prop->freqs())
      throw DimensionMismatch("surrogate dimensions differ from the scene array/band");
    auto copy = std::make_shared<KernelSurrogate>(*s);
    copy->set_lambda0(prop->lambda0());
    return copy;
  }
  throw InvalidArgument("unknown model spec '" + spec + "' (expected exact, perturbed:<eps>, surrogate:<path>)");
}

}  // namespace wfl
