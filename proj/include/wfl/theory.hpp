#pragma once
// Numerical checks of the analytic properties the localizer relies on:
// the grid-quantization constant, lambda0-spaced PS minima, the phase-nulling
// circles and channel injectivity, plus the model-error consistency sweep.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <memory>
#include <numbers>
#include <optional>
#include <random>
#include <vector>

#include "wfl/baselines.hpp"
#include "wfl/channel.hpp"
#include "wfl/errors.hpp"
#include "wfl/locengine.hpp"
#include "wfl/metric.hpp"
#include "wfl/model.hpp"
#include "wfl/parallel.hpp"

namespace wfl {

/// Mean distance from a uniform point in a unit square cell to its nearest corner.
inline double closed_form_delta() {
  return (std::sqrt(2.0) + std::log(1.0 + std::sqrt(2.0))) / 6.0;
}

/// Distance from p to the nearest node of the lattice nu * Z^2.
inline double nearest_node_distance(const Vec2& p, double nu) {
  if (!(nu > 0.0)) throw InvalidArgument("nearest_node_distance: nu must be positive");
  const double dx = p.x - nu * std::round(p.x / nu);
  const double dy = p.y - nu * std::round(p.y / nu);
  return std::hypot(dx, dy);
}

struct MonteCarloEstimate {
  double mean{0.0};
  double std_error{0.0};
  std::size_t samples{0};
};

inline MonteCarloEstimate grid_error_constant_mc_estimate(std::size_t n, std::uint64_t seed) {
  if (n < 10'000) throw InvalidArgument("grid_error_constant_mc: n must be at least 1e4");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double s = 0.0;
  double s2 = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = nearest_node_distance({u(rng), u(rng)}, 1.0);
    s += d;
    s2 += d * d;
  }
  const double nn = static_cast<double>(n);
  const double mean = s / nn;
  const double var = std::max(0.0, (s2 - nn * mean * mean) / (nn - 1.0));
  return {mean, std::sqrt(var / nn), n};
}

inline double grid_error_constant_mc(std::size_t n, std::uint64_t seed) {
  return grid_error_constant_mc_estimate(n, seed).mean;
}

struct ScanProfile {
  std::vector<double> offsets;
  std::vector<double> losses;
  std::vector<double> detected_minima;

  std::vector<double> spacings() const {
    std::vector<double> out;
    for (std::size_t i = 1; i < detected_minima.size(); ++i)
      out.push_back(detected_minima[i] - detected_minima[i - 1]);
    return out;
  }
};

/// PS between f(x) and f(x + t u) for t = 0, step, ..., span; strict
/// three-point minima are recorded. Gain dominance of the scene is left to the caller.
inline ScanProfile minima_spacing_scan(const ChannelModel& model, const Vec2& x, const Vec2& direction,
                                       double span, double step) {
  if (!(step > 0.0) || step > model.lambda0() / 100.0 * (1.0 + 1e-12))
    throw InvalidArgument("minima_spacing_scan: step must be in (0, lambda0/100]");
  if (!(span > 2.0 * step)) throw InvalidArgument("minima_spacing_scan: span too short");
  const Vec2 u = normalized(direction);
  const auto n = static_cast<std::size_t>(std::floor(span / step + 1e-9)) + 1;
  ScanProfile p;
  p.offsets.resize(n);
  p.losses.resize(n);
  const ChannelMatrix ref = model.eval(x);
  parallel_for(n, [&](std::size_t i) {
    const double t = static_cast<double>(i) * step;
    p.offsets[i] = t;
    p.losses[i] = frobenius_distance(ref, model.eval(x + u * t));
  });
  for (std::size_t i = 1; i + 1 < n; ++i)
    if (p.losses[i] < p.losses[i - 1] && p.losses[i] < p.losses[i + 1])
      p.detected_minima.push_back(p.offsets[i]);
  if (p.detected_minima.size() < 2)
    throw InsufficientMinima("minima_spacing_scan: fewer than two minima within span");
  return p;
}

struct CircleResidual {
  double phase{0.0};
  double amplitude{0.0};
  Vec2 displacement;
};

/// Builds delta with x + delta on the circle about the source of radius
/// |x - a| + k lambda, at `angle` radians from the direction of x - a, and
/// evaluates the single-path phase and amplitude mismatch. The construction
/// runs in long double so the residual reflects the geometry, not round-off.
inline CircleResidual circle_condition_residual(const Vec2& x, const VirtualSource& source, int k,
                                                double lambda, double angle = 0.0) {
  using ld = long double;
  if (!(lambda > 0.0)) throw InvalidArgument("circle_condition_residual: lambda must be positive");
  const Vec2 a = source.position;
  const ld rx = static_cast<ld>(x.x) - a.x, ry = static_cast<ld>(x.y) - a.y;
  const ld d = std::hypot(rx, ry);
  const ld kl = static_cast<ld>(k) * lambda;
  if (!(d > std::abs(kl))) throw InvalidGeometry("circle_condition_residual: invalid radius");
  const ld th = std::atan2(ry, rx) + static_cast<ld>(angle);
  const ld px = a.x + (d + kl) * std::cos(th), py = a.y + (d + kl) * std::sin(th);
  CircleResidual r;
  r.displacement = {static_cast<double>(px - x.x), static_cast<double>(py - x.y)};
  const ld d2 = std::hypot(px - a.x, py - a.y);
  const ld pi = 3.141592653589793238462643383279502884L;
  r.phase = static_cast<double>(2 * std::abs(std::sin(pi * (d2 - d) / lambda)));
  r.amplitude = static_cast<double>(std::abs(1 / d - 1 / d2));
  return r;
}

struct InjectivityResult {
  double max_similarity{-std::numeric_limits<double>::infinity()};
  Vec2 worst_a;
  Vec2 worst_b;
  std::size_t pairs{0};
};

/// Maximum similarity over random location pairs at least `min_separation` apart.
inline InjectivityResult injectivity_probe(const Propagation& prop, std::size_t n_pairs,
                                           std::uint64_t seed, double min_separation = 0.0) {
  if (prop.antennas() < 2) throw InvalidArgument("injectivity_probe: needs more than one antenna");
  std::vector<std::pair<Vec2, Vec2>> pairs;
  pairs.reserve(n_pairs);
  std::mt19937_64 rng(seed);
  while (pairs.size() < n_pairs) {
    const Vec2 a = sample_location(prop.scene(), rng);
    const Vec2 b = sample_location(prop.scene(), rng);
    if (distance(a, b) > min_separation) pairs.emplace_back(a, b);
  }
  std::vector<double> sim(n_pairs);
  parallel_for(n_pairs, [&](std::size_t i) {
    sim[i] = similarity(prop.channel(pairs[i].first), prop.channel(pairs[i].second));
  });
  InjectivityResult r;
  r.pairs = n_pairs;
  for (std::size_t i = 0; i < n_pairs; ++i)
    if (sim[i] > r.max_similarity) {
      r.max_similarity = sim[i];
      r.worst_a = pairs[i].first;
      r.worst_b = pairs[i].second;
    }
  return r;
}

struct EpsilonPoint {
  double epsilon{0.0};
  double median_error{0.0};
  double max_error{0.0};
  std::vector<double> errors;
};

/// Off-grid localization of each eval location against a perturbed model per
/// epsilon. Measurements are exact channels, optionally noisy.
inline std::vector<EpsilonPoint> epsilon_sweep(std::shared_ptr<const Propagation> prop,
                                               const std::vector<double>& eps_list,
                                               const std::vector<Vec2>& eval_set,
                                               const GridSpec& grids, const LocalizerConfig& cfg,
                                               std::uint64_t seed,
                                               std::optional<double> snr_db = std::nullopt) {
  for (std::size_t i = 0; i < eps_list.size(); ++i) {
    if (eps_list[i] < 0.0) throw InvalidArgument("epsilon_sweep: negative epsilon");
    if (i > 0 && !(eps_list[i] < eps_list[i - 1]))
      throw InvalidArgument("epsilon_sweep: eps_list must be strictly decreasing");
  }
  std::vector<ChannelMatrix> measured(eval_set.size());
  parallel_for(eval_set.size(), [&](std::size_t i) {
    measured[i] = prop->channel(eval_set[i]);
    if (snr_db) measured[i] = add_noise(measured[i], *snr_db, derive_seed(seed ^ 0x5EEDull, i));
  });
  std::vector<EpsilonPoint> out;
  for (const double eps : eps_list) {
    const Localizer loc(make_perturbed(prop, eps, seed), prop->scene(), grids, cfg);
    EpsilonPoint pt;
    pt.epsilon = eps;
    pt.errors.resize(eval_set.size());
    parallel_for(eval_set.size(), [&](std::size_t i) {
      pt.errors[i] = distance(loc.localize(measured[i], derive_seed(cfg.seed, i)).estimate, eval_set[i]);
    });
    pt.median_error = median_of(pt.errors);
    pt.max_error = *std::max_element(pt.errors.begin(), pt.errors.end());
    out.push_back(std::move(pt));
  }
  return out;
}

/// Count of adjacent pairs whose median increases as epsilon decreases.
inline std::size_t median_inversions(const std::vector<EpsilonPoint>& sweep) {
  std::size_t n = 0;
  for (std::size_t i = 1; i < sweep.size(); ++i)
    if (sweep[i].median_error > sweep[i - 1].median_error) ++n;
  return n;
}

}  // namespace wfl
