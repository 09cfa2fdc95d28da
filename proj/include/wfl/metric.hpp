#pragma once
// Phase-sensitive (PS) and phase-insensitive (PI) channel distances.
//
//   PS(x~) = |H - f(x~)|_F
//   PI(x~) = sqrt(2 - 2 |tr(H^H f(x~))| / (|H|_F |f(x~)|_F))
//
// PS has minima roughly every lambda0 along the range direction; PI ignores
// global phase and scale and gives a broad basin, which is why it is only
// used for coarse grid initialization.

#include <algorithm>
#include <cmath>
#include <cstddef>

#include "wfl/channel.hpp"
#include "wfl/model.hpp"

namespace wfl {

enum class LossKind { PS, PI };

inline const char* to_string(LossKind k) { return k == LossKind::PS ? "PS" : "PI"; }

struct LossValue {
  double value{0.0};
  LossKind kind{LossKind::PS};
};

/// Loss and its gradient; `converged` is set (with a zero gradient) when the
/// loss is below the threshold where the norm's gradient is undefined.
struct LossGradient {
  double loss{0.0};
  Vec2 grad;
  bool converged{false};
  /// Gauss-Newton metric Q = Re(J^H J), J = [df/dx, df/dy].
  double qxx{0.0}, qxy{0.0}, qyy{0.0};

  /// -Q^{-1} L grad, the Gauss-Newton displacement; zero if Q is singular.
  Vec2 gauss_newton_step() const {
    const double det = qxx * qyy - qxy * qxy;
    if (!(std::abs(det) > 1e-300) || converged) return {};
    const Vec2 v = grad * loss;
    return {-(qyy * v.x - qxy * v.y) / det, -(qxx * v.y - qxy * v.x) / det};
  }
};

inline constexpr double kConvergedLoss = 1e-12;

/// 1 - |Ha - Hb|_F. Unnormalized, so its scale follows the channel scale.
inline double similarity(const ChannelMatrix& a, const ChannelMatrix& b) {
  return 1.0 - frobenius_distance(a, b);
}

inline double pi_value(const ChannelMatrix& h, double h_norm, const ChannelMatrix& f) {
  const double f_norm = f.frobenius();
  if (!(h_norm > 0.0) || !(f_norm > 0.0))
    throw DegenerateChannel("pi_distance: zero-norm channel");
  const double c = std::min(1.0, std::abs(inner(h, f)) / (h_norm * f_norm));
  return std::sqrt(std::max(0.0, 2.0 - 2.0 * c));
}

/// PI distance between two matrices directly.
inline double pi_between(const ChannelMatrix& h, const ChannelMatrix& f) {
  return pi_value(h, h.frobenius(), f);
}

namespace detail {

inline LossGradient ps_gradient_from(const ChannelMatrix& h, const ChannelMatrix& f,
                                     const ChannelGradient& df) {
  require_same_shape(h, f, "ps_gradient");
  const auto hd = h.data();
  const auto fd = f.data();
  const auto gx = df.d_dx.data();
  const auto gy = df.d_dy.data();
  double l2 = 0.0;
  double sx = 0.0;
  double sy = 0.0;
  LossGradient out;
  for (std::size_t i = 0; i < hd.size(); ++i) {
    const cplx r = fd[i] - hd[i];
    l2 += std::norm(r);
    sx += r.real() * gx[i].real() + r.imag() * gx[i].imag();
    sy += r.real() * gy[i].real() + r.imag() * gy[i].imag();
    out.qxx += std::norm(gx[i]);
    out.qyy += std::norm(gy[i]);
    out.qxy += gx[i].real() * gy[i].real() + gx[i].imag() * gy[i].imag();
  }
  out.loss = std::sqrt(l2);
  if (out.loss < kConvergedLoss) {
    out.converged = true;
    return out;
  }
  out.grad = {sx / out.loss, sy / out.loss};
  return out;
}

}  // namespace detail

inline LossValue ps_distance(const ChannelMatrix& h, const Vec2& x, const ChannelModel& model) {
  return {frobenius_distance(h, model.eval(x)), LossKind::PS};
}

inline LossGradient ps_gradient(const ChannelMatrix& h, const Vec2& x, const ChannelModel& model) {
  ChannelMatrix f;
  ChannelGradient df;
  model.eval_with_gradient_into(x, f, df);
  return detail::ps_gradient_from(h, f, df);
}

inline LossValue pi_distance(const ChannelMatrix& h, const Vec2& x, const ChannelModel& model) {
  return {pi_between(h, model.eval(x)), LossKind::PI};
}

/// Loss evaluation against one measured channel with reusable scratch space.
/// Counts model forward passes. One instance per worker thread.
class LossEvaluator {
 public:
  LossEvaluator(const ChannelMatrix& measured, const ChannelModel& model)
      : h_(measured), model_(model), h_norm_(measured.frobenius()) {
    if (measured.antennas() != model.antennas() || measured.freqs() != model.freqs())
      throw DimensionMismatch("LossEvaluator: measurement and model dimensions differ");
  }

  double ps(const Vec2& x) {
    model_.eval_into(x, f_);
    ++evals_;
    return frobenius_distance(h_, f_);
  }

  double pi(const Vec2& x) {
    model_.eval_into(x, f_);
    ++evals_;
    return pi_value(h_, h_norm_, f_);
  }

  double loss(LossKind k, const Vec2& x) { return k == LossKind::PS ? ps(x) : pi(x); }

  LossGradient ps_with_gradient(const Vec2& x) {
    model_.eval_with_gradient_into(x, f_, df_);
    ++evals_;
    return detail::ps_gradient_from(h_, f_, df_);
  }

  std::size_t evals() const { return evals_; }
  const ChannelModel& model() const { return model_; }
  const ChannelMatrix& measured() const { return h_; }

 private:
  const ChannelMatrix& h_;
  const ChannelModel& model_;
  double h_norm_;
  ChannelMatrix f_;
  ChannelGradient df_;
  std::size_t evals_{0};
};

}  // namespace wfl
