#pragma once
// Model-based localization: bi-level grid search, PS descent and the       circle restart that escapes lambda0-periodic local minima.
//
// Pipeline of the off-grid variant:
//   1. x_i   = argmin over the global grid of the init loss (PI or PS)
//   2. local lattice of spacing nu and side L around x_i
//   3. x_g   = argmin of PS over the local lattice
//   4. x_gd  = descent on PS from x_g, loss gamma_gd
//   5. circles of radii k lambda0 (k = 1..N_C) around x_gd; x_c = PS argmin, gamma_c
//   6. if gamma_c <= gamma_gd: x_gd2 = descent from x_c (the estimate), else x_gd
//
// The on-grid variant stops at 3. The naive variants replace steps 1-3 by a
// single dense PS grid over the whole scene.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "wfl/metric.hpp"
#include "wfl/model.hpp"
#include "wfl/scene.hpp"

namespace wfl {

struct GridSpec {
  std::size_t global_count{1000};
  double local_side{0.0};     // L, meters
  double local_spacing{0.0};  // nu, meters
  std::size_t circle_count{5};
  std::size_t circle_points{1000};
  double naive_spacing{0.0};  // dense single-grid spacing of the naive variants

  /// nu = lambda0 / 8 and L = 94 nu (95 x 95 local lattice), global 10^3,
  /// 5 circles with 10^3 points in total, naive spacing lambda0 / 4.
  static GridSpec defaults(double lambda0) {
    GridSpec g;
    g.local_spacing = lambda0 / 8;
    g.local_side = 94 * g.local_spacing;
    g.naive_spacing = lambda0 / 4;
    return g;
  }

  void validate() const {
    if (global_count == 0) throw InvalidArgument("GridSpec: global_count must be positive");
    if (!(local_side > 0.0) || !(local_spacing > 0.0))
      throw InvalidArgument("GridSpec: local side and spacing must be positive");
    if (circle_count == 0 || circle_points < circle_count)
      throw InvalidArgument("GridSpec: need circle_count >= 1 and circle_points >= circle_count");
  }
};

/// Points per axis of nu Z intersected with [-L/2, L/2].
inline std::size_t local_axis_points(double side, double spacing) {
  return 2 * static_cast<std::size_t>(std::floor(side / (2 * spacing) + 1e-9)) + 1;
}

/// Gradient: x <- x - alpha grad L. GaussNewton: the same update with the
/// gradient preconditioned by L Q^{-1} (alpha is then dimensionless, starts at 1).
enum class DescentRule { Gradient, GaussNewton };

inline const char* to_string(DescentRule r) {
  return r == DescentRule::Gradient ? "gradient" : "gauss-newton";
}

enum class Variant { OnGrid, OffGrid, OffGridNaive, OnGridNaive };

inline const char* to_string(Variant v) {
  switch (v) {
    case Variant::OnGrid: return "on-grid";
    case Variant::OffGrid: return "off-grid";
    case Variant::OffGridNaive: return "off-grid-naive";
    case Variant::OnGridNaive: return "on-grid-naive";
  }
  return "?";
}

struct LocalizerConfig {
  LossKind init_loss{LossKind::PI};
  std::size_t descent_steps{100};    // N_nabla, passes per descent
  std::optional<double> step_size;   // alpha; unset -> alpha0 lambda0 / |grad L(x_start)|
  double step_scale{0.05};           // alpha0
  DescentRule rule{DescentRule::GaussNewton};
  Variant variant{Variant::OffGrid};
  bool circles{true};                // off-grid only: run steps 5-6
  std::uint64_t seed{0};

  void validate() const {
    if (step_size && !(*step_size > 0.0)) throw InvalidArgument("LocalizerConfig: step_size must be positive");
    if (!(step_scale > 0.0)) throw InvalidArgument("LocalizerConfig: step_scale must be positive");
  }
};

struct StageTrace {
  Vec2 x_init;
  Vec2 x_grid;
  std::optional<Vec2> x_descent;
  std::optional<Vec2> x_circle;
  std::optional<Vec2> x_descent2;
};

struct LossTrace {
  double init{0.0};     // init loss at x_init (PI or PS)
  double grid{0.0};     // PS at x_grid
  std::optional<double> gamma_gd;
  std::optional<double> gamma_c;
  std::optional<double> gamma_gd2;
  double final_ps{0.0};
};

struct LocalizationResult {
  Vec2 estimate;
  StageTrace stages;
  LossTrace losses;
  std::size_t model_evals{0};
  std::size_t descent_passes{0};
  bool second_descent{false};
};

struct GridCardinalities {
  std::size_t global{0};
  std::size_t local{0};
  std::size_t circles{0};
  std::size_t naive{0};
};

/// Forward passes the configured variant performs when no stage stops early
/// and (off-grid with circles) the second descent runs.
inline std::size_t count_model_evals(const LocalizerConfig& cfg, const GridCardinalities& g) {
  const std::size_t n = cfg.descent_steps;
  switch (cfg.variant) {
    case Variant::OnGrid: return g.global + g.local;
    case Variant::OnGridNaive: return g.naive;
    case Variant::OffGrid:
      return cfg.circles ? g.global + g.local + g.circles + 2 * n : g.global + g.local + n;
    case Variant::OffGridNaive: return cfg.circles ? g.naive + g.circles + 2 * n : g.naive + n;
  }
  return 0;
}

/// Nominal cardinalities of a grid spec on a scene (before clipping).
inline GridCardinalities nominal_cardinalities(const GridSpec& g, const Scene& scene) {
  GridCardinalities c;
  c.global = g.global_count;
  const std::size_t m = local_axis_points(g.local_side, g.local_spacing);
  c.local = m * m;
  c.circles = g.circle_points;
  if (g.naive_spacing > 0.0) {
    const auto nx = static_cast<std::size_t>(std::floor(scene.extent_x / g.naive_spacing + 1e-9));
    const auto ny = static_cast<std::size_t>(std::floor(scene.extent_y / g.naive_spacing + 1e-9));
    c.naive = nx * ny;
  }
  return c;
}

namespace detail {

inline std::vector<Vec2> cell_centered_lattice(const Rect& box, std::size_t nx, std::size_t ny,
                                               const Scene& scene) {
  std::vector<Vec2> out;
  out.reserve(nx * ny);
  const double hx = box.width() / static_cast<double>(nx);
  const double hy = box.height() / static_cast<double>(ny);
  for (std::size_t i = 0; i < nx; ++i)
    for (std::size_t j = 0; j < ny; ++j) {
      const Vec2 p{box.min.x + (static_cast<double>(i) + 0.5) * hx,
                   box.min.y + (static_cast<double>(j) + 0.5) * hy};
      if (!scene.excluded(p)) out.push_back(p);
    }
  return out;
}

inline std::pair<std::size_t, std::size_t> lattice_shape(double target, double aspect) {
  auto nx = static_cast<std::size_t>(std::ceil(std::sqrt(target * aspect) - 1e-9));
  nx = std::max<std::size_t>(nx, 1);
  auto ny = static_cast<std::size_t>(std::ceil(target / static_cast<double>(nx) - 1e-9));
  ny = std::max<std::size_t>(ny, 1);
  if (static_cast<double>(nx * ny) > 1.1 * target) {
    nx = std::max<std::size_t>(1, static_cast<std::size_t>(std::lround(std::sqrt(target * aspect))));
    ny = std::max<std::size_t>(1, static_cast<std::size_t>(std::lround(target / static_cast<double>(nx))));
  }
  return {nx, ny};
}

}  // namespace detail

/// Near-square cell-centred lattice over the extents with excluded nodes
/// removed. The lattice is refined until the kept node count is within 10%
/// of `count` (when exclusions remove many nodes).
inline std::vector<Vec2> build_global_grid(const Scene& scene, std::size_t count) {
  if (count == 0) throw InvalidArgument("build_global_grid: count must be >= 1");
  if (!(scene.feasible_area() > 0.0)) throw EmptyRegion("build_global_grid: empty location space");
  const Rect box = scene.bounds();
  const double aspect = scene.extent_x / scene.extent_y;
  const double goal = static_cast<double>(count);
  double target = goal;
  std::vector<Vec2> best;
  double best_err = std::numeric_limits<double>::infinity();
  for (int iter = 0; iter < 30; ++iter) {
    const auto [nx, ny] = detail::lattice_shape(target, aspect);
    auto pts = detail::cell_centered_lattice(box, nx, ny, scene);
    const double kept = std::max<double>(static_cast<double>(pts.size()), 1.0);
    const double err = std::abs(static_cast<double>(pts.size()) - goal);
    if (!pts.empty() && err < best_err) {
      best_err = err;
      best = std::move(pts);
    }
    if (best_err <= 0.1 * goal) break;
    target *= goal / kept;
  }
  if (best.empty()) throw EmptyRegion("build_global_grid: no lattice node outside the exclusions");
  return best;
}

/// (center + nu Z_{nu,L})^2, restricted to the scene extents. Ordered with x
/// as the outer index.
inline std::vector<Vec2> build_local_grid(const Vec2& center, double side, double spacing,
                                          const Rect& bounds) {
  if (!(side > 0.0) || !(spacing > 0.0))
    throw InvalidArgument("build_local_grid: side and spacing must be positive");
  const auto half = static_cast<long>(std::floor(side / (2 * spacing) + 1e-9));
  std::vector<Vec2> out;
  out.reserve(static_cast<std::size_t>((2 * half + 1) * (2 * half + 1)));
  for (long i = -half; i <= half; ++i)
    for (long j = -half; j <= half; ++j) {
      const Vec2 p{center.x + static_cast<double>(i) * spacing,
                   center.y + static_cast<double>(j) * spacing};
      if (bounds.contains(p)) out.push_back(p);
    }
  return out;
}

/// Dense lattice of the naive variants: spacing s, cell centred, exclusions removed.
inline std::vector<Vec2> build_dense_grid(const Scene& scene, double spacing) {
  if (!(spacing > 0.0)) throw InvalidArgument("build_dense_grid: spacing must be positive");
  const auto nx = std::max<std::size_t>(1, static_cast<std::size_t>(std::floor(scene.extent_x / spacing + 1e-9)));
  const auto ny = std::max<std::size_t>(1, static_cast<std::size_t>(std::floor(scene.extent_y / spacing + 1e-9)));
  auto pts = detail::cell_centered_lattice(scene.bounds(), nx, ny, scene);
  if (pts.empty()) throw EmptyRegion("build_dense_grid: no lattice node outside the exclusions");
  return pts;
}

/// M_C points over N_C circles of radii k lambda0, split as evenly as possible
/// (earlier circles take the remainder), uniform in angle. With a seed each
/// circle gets an independent uniform angular offset; without one the
/// offsets are 0. Points outside `bounds` are dropped.
inline std::vector<Vec2> sample_circles(const Vec2& center, std::size_t n_circles,
                                        std::size_t n_points, double lambda0,
                                        std::optional<std::uint64_t> seed,
                                        const std::optional<Rect>& bounds = std::nullopt) {
  if (n_circles == 0 || n_points < n_circles)
    throw InvalidArgument("sample_circles: need N_C >= 1 and M_C >= N_C");
  if (!(lambda0 > 0.0)) throw InvalidArgument("sample_circles: lambda0 must be positive");
  std::mt19937_64 rng(seed.value_or(0));
  std::uniform_real_distribution<double> unit(0.0, kTwoPi);
  std::vector<Vec2> out;
  out.reserve(n_points);
  const std::size_t base = n_points / n_circles;
  const std::size_t extra = n_points % n_circles;
  for (std::size_t c = 0; c < n_circles; ++c) {
    const std::size_t m = base + (c < extra ? 1 : 0);
    const double radius = static_cast<double>(c + 1) * lambda0;
    const double offset = seed ? unit(rng) : 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      const double th = offset + kTwoPi * static_cast<double>(i) / static_cast<double>(m);
      const Vec2 p = center + Vec2{radius * std::cos(th), radius * std::sin(th)};
      if (!bounds || bounds->contains(p)) out.push_back(p);
    }
  }
  return out;
}

struct GridHit {
  Vec2 point;
  double loss{std::numeric_limits<double>::infinity()};
  std::size_t index{0};
};

/// Argmin of the loss over the grid; strict comparison keeps the lowest index on ties.
inline GridHit grid_search(LossEvaluator& ev, const std::vector<Vec2>& grid, LossKind kind) {
  if (grid.empty()) throw InvalidArgument("grid_search: empty grid");
  GridHit best;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double l = ev.loss(kind, grid[i]);
    if (l < best.loss) best = {grid[i], l, i};
  }
  best.point = grid[best.index];
  return best;
}

inline Vec2 grid_search(const ChannelMatrix& h, const ChannelModel& model,
                        const std::vector<Vec2>& grid, LossKind kind) {
  LossEvaluator ev(h, model);
  return grid_search(ev, grid, kind).point;
}

struct DescentResult {
  Vec2 x;
  double loss{0.0};
  std::size_t passes{0};
  std::size_t accepted{0};
  bool converged{false};
};

struct DescentOptions {
  std::size_t steps{100};
  std::optional<double> step_size;
  double step_scale{0.05};
  DescentRule rule{DescentRule::GaussNewton};
  std::optional<Rect> bounds;
  std::size_t max_halvings{20};
};

/// x <- x - alpha grad PS, at most `steps` model passes (each pass is one
/// loss+gradient evaluation). A step that raises the loss is rejected and
/// alpha halved; alpha is not restored afterwards. Stops when the loss drops
/// below 1e-12, the step length below 1e-9 m, or after max_halvings
/// consecutive rejections. Iterates are clipped to `bounds`.
/// `x0_loss`, when given, is the known PS at x0 and spares a pass if steps == 0.
inline DescentResult gradient_descent(LossEvaluator& ev, const Vec2& x0, const DescentOptions& opt,
                                      std::optional<double> x0_loss = std::nullopt) {
  DescentResult r;
  r.x = opt.bounds ? opt.bounds->clamp(x0) : x0;
  if (opt.steps == 0) {
    if (x0_loss && r.x == x0) {
      r.loss = *x0_loss;
    } else {
      r.loss = ev.ps(r.x);
      r.passes = 1;
    }
    r.converged = r.loss < kConvergedLoss;
    return r;
  }
  LossGradient cur = ev.ps_with_gradient(r.x);
  r.passes = 1;
  r.loss = cur.loss;
  if (cur.converged) {
    r.converged = true;
    return r;
  }
  const double gnorm = norm(cur.grad);
  if (!(gnorm > 0.0)) return r;
  const bool gn = opt.rule == DescentRule::GaussNewton;
  double alpha = gn ? opt.step_size.value_or(1.0)
                    : (opt.step_size ? *opt.step_size : opt.step_scale * ev.model().lambda0() / gnorm);
  std::size_t halvings = 0;
  while (r.passes < opt.steps) {
    const Vec2 dir = gn ? cur.gauss_newton_step() : cur.grad * -1.0;
    Vec2 cand = r.x + dir * alpha;
    if (opt.bounds) cand = opt.bounds->clamp(cand);
    if (distance(cand, r.x) < 1e-9) break;
    const LossGradient next = ev.ps_with_gradient(cand);
    ++r.passes;
    if (next.loss <= cur.loss) {
      r.x = cand;
      cur = next;
      r.loss = cur.loss;
      ++r.accepted;
      halvings = 0;
      if (cur.converged) {
        r.converged = true;
        break;
      }
    } else {
      alpha *= 0.5;
      if (++halvings > opt.max_halvings) break;
    }
  }
  return r;
}

/// Standalone descent from x0 against a measured channel.
inline Vec2 gradient_descent(const ChannelMatrix& h, const ChannelModel& model, const Vec2& x0,
                             std::optional<double> alpha, std::size_t steps,
                             std::optional<Rect> bounds = std::nullopt,
                             DescentRule rule = DescentRule::GaussNewton) {
  LossEvaluator ev(h, model);
  DescentOptions opt;
  opt.steps = steps;
  opt.step_size = alpha;
  opt.bounds = bounds;
  opt.rule = rule;
  if (steps == 0) return opt.bounds ? opt.bounds->clamp(x0) : x0;
  return gradient_descent(ev, x0, opt).x;
}

/// Mixes a run seed with a per-UE index (splitmix64 finalizer).
inline std::uint64_t derive_seed(std::uint64_t run_seed, std::uint64_t index) {
  std::uint64_t z = run_seed + 0x9E3779B97F4A7C15ull * (index + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

/// Holds the x-independent grids; localize() may be called concurrently.
class Localizer {
 public:
  Localizer(ModelPtr model, const Scene& scene, GridSpec grids, LocalizerConfig cfg)
      : model_(std::move(model)), bounds_(scene.bounds()), grids_(grids), cfg_(cfg) {
    if (!model_) throw InvalidArgument("Localizer: null model");
    grids_.validate();
    cfg_.validate();
    if (naive()) {
      if (!(grids_.naive_spacing > 0.0)) throw InvalidArgument("Localizer: naive spacing must be positive");
      dense_ = build_dense_grid(scene, grids_.naive_spacing);
    } else {
      global_ = build_global_grid(scene, grids_.global_count);
    }
  }

  const std::vector<Vec2>& global_grid() const { return global_; }
  const std::vector<Vec2>& dense_grid() const { return dense_; }
  const GridSpec& grids() const { return grids_; }
  const LocalizerConfig& config() const { return cfg_; }
  const ChannelModel& model() const { return *model_; }
  const Rect& bounds() const { return bounds_; }

  /// Cardinalities with the grids as built (local grid before clipping).
  GridCardinalities cardinalities() const {
    GridCardinalities c;
    c.global = global_.size();
    const std::size_t m = local_axis_points(grids_.local_side, grids_.local_spacing);
    c.local = m * m;
    c.circles = grids_.circle_points;
    c.naive = dense_.size();
    return c;
  }

  std::size_t predicted_evals() const { return count_model_evals(cfg_, cardinalities()); }

  /// `circle_seed` sets the circle angular offsets for this call.
  LocalizationResult localize(const ChannelMatrix& h, std::uint64_t circle_seed) const {
    LossEvaluator ev(h, *model_);
    LocalizationResult res;

    if (naive()) {
      const GridHit hit = grid_search(ev, dense_, LossKind::PS);
      res.stages.x_init = hit.point;
      res.stages.x_grid = hit.point;
      res.losses.init = hit.loss;
      res.losses.grid = hit.loss;
    } else {
      const GridHit init = grid_search(ev, global_, cfg_.init_loss);
      res.stages.x_init = init.point;
      res.losses.init = init.loss;
      const auto local = build_local_grid(init.point, grids_.local_side, grids_.local_spacing, bounds_);
      const GridHit g = local.empty() ? GridHit{init.point, ev.ps(init.point), 0}
                                      : grid_search(ev, local, LossKind::PS);
      res.stages.x_grid = g.point;
      res.losses.grid = g.loss;
    }

    res.estimate = res.stages.x_grid;
    res.losses.final_ps = res.losses.grid;
    if (cfg_.variant != Variant::OnGrid && cfg_.variant != Variant::OnGridNaive)
      refine_into(ev, res, circle_seed);
    res.model_evals = ev.evals();
    return res;
  }

  LocalizationResult localize(const ChannelMatrix& h) const { return localize(h, cfg_.seed); }

  /// Descent and circle stages only, started at `x_start` (grid stages skipped).
  LocalizationResult refine(const ChannelMatrix& h, const Vec2& x_start, std::uint64_t circle_seed) const {
    LossEvaluator ev(h, *model_);
    LocalizationResult res;
    res.stages.x_init = x_start;
    res.stages.x_grid = x_start;
    res.losses.grid = ev.ps(x_start);
    res.losses.init = res.losses.grid;
    res.estimate = x_start;
    res.losses.final_ps = res.losses.grid;
    refine_into(ev, res, circle_seed);
    res.model_evals = ev.evals();
    return res;
  }

 private:
  void refine_into(LossEvaluator& ev, LocalizationResult& res, std::uint64_t circle_seed) const {
    DescentOptions opt;
    opt.steps = cfg_.descent_steps;
    opt.step_size = cfg_.step_size;
    opt.step_scale = cfg_.step_scale;
    opt.rule = cfg_.rule;
    opt.bounds = bounds_;
    const DescentResult d1 = gradient_descent(ev, res.stages.x_grid, opt, res.losses.grid);
    res.descent_passes += d1.passes;
    res.stages.x_descent = d1.x;
    res.losses.gamma_gd = d1.loss;
    res.estimate = d1.x;
    res.losses.final_ps = d1.loss;

    if (cfg_.circles) {
      const auto circ = sample_circles(d1.x, grids_.circle_count, grids_.circle_points,
                                       model_->lambda0(), circle_seed, bounds_);
      if (!circ.empty()) {
        const GridHit c = grid_search(ev, circ, LossKind::PS);
        res.stages.x_circle = c.point;
        res.losses.gamma_c = c.loss;
        if (c.loss <= d1.loss) {
          const DescentResult d2 = gradient_descent(ev, c.point, opt, c.loss);
          res.descent_passes += d2.passes;
          res.second_descent = true;
          res.stages.x_descent2 = d2.x;
          res.losses.gamma_gd2 = d2.loss;
          res.estimate = d2.x;
          res.losses.final_ps = d2.loss;
        }
      }
    }
  }

  bool naive() const {
    return cfg_.variant == Variant::OffGridNaive || cfg_.variant == Variant::OnGridNaive;
  }

  ModelPtr model_;
  Rect bounds_;
  GridSpec grids_;
  LocalizerConfig cfg_;
  std::vector<Vec2> global_;
  std::vector<Vec2> dense_;
};

inline LocalizationResult localize(const ChannelMatrix& h, ModelPtr model, const Scene& scene,
                                   const GridSpec& grids, const LocalizerConfig& cfg) {
  return Localizer(std::move(model), scene, grids, cfg).localize(h);
}

}  // namespace wfl
