#pragma once

// Measuring norm-resolvent convergence: Hilbert-Schmidt norms of kernel
// differences by composite Gauss-Legendre quadrature, d-sweeps, and log-log
// rate fits.

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <span>
#include <sstream>
#include <vector>

#include "qgstar/coupling.hpp"
#include "qgstar/error.hpp"
#include "qgstar/kernels.hpp"
#include "qgstar/schedule.hpp"

namespace qgstar {

struct QuadratureConfig {
  int panel_order = 20;                // Gauss nodes per panel
  double truncation_multiplier = 40.0; // domain cut at X = d + multiplier / Re(kappa)
  int panels_per_axis = 16;            // graded toward 0 on [0, d] and toward d on [d, X]
};

/// Result of one Hilbert-Schmidt integral.
struct HsResult {
  double value;          // at 2 * panel_order
  double coarse_value;   // at panel_order
  double tail_estimate;  // mass beyond the truncation box, from the measured decay at x = X
};

struct ConvergenceRecord {
  double d;
  double hs_sq_scalar;
  double hs_sq_complement;
  double hs_sq_total;  // scalar + (n - 1) complement
  double u;
  double v;
  /// Largest relative change of either channel when the panel order is doubled.
  double order_change = 0.0;
};

struct RateFit {
  double slope;
  double intercept;
  double r_squared;
};

inline constexpr double kQuadratureRelTol = 1e-6;
inline constexpr double kTailRelTol = 1e-3;

/// Nodes and weights of the n-point Gauss-Legendre rule on [-1, 1].
struct GaussRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

inline GaussRule gauss_legendre(int n) {
  GaussRule rule;
  rule.nodes.resize(static_cast<std::size_t>(n));
  rule.weights.resize(static_cast<std::size_t>(n));
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      if (n == 1) p0 = 1.0;
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    const auto lo = static_cast<std::size_t>(i), hi = static_cast<std::size_t>(n - 1 - i);
    rule.nodes[lo] = -x;
    rule.nodes[hi] = x;
    rule.weights[lo] = w;
    rule.weights[hi] = w;
  }
  return rule;
}

namespace detail {

inline void validate_quadrature(const QuadratureConfig& cfg) {
  if (cfg.panel_order < 4) throw Error(ErrorCode::InvalidConfig, "panel_order must be >= 4");
  if (!(cfg.truncation_multiplier >= 10.0)) throw Error(ErrorCode::InvalidConfig, "truncation_multiplier must be >= 10");
  if (cfg.panels_per_axis < 4) throw Error(ErrorCode::InvalidConfig, "panels_per_axis must be >= 4");
}

// Breakpoints 0 < ... < d < ... < X, halving toward 0 inside [0, d] and toward d inside [d, X].
inline std::vector<double> graded_breaks(double d, double x_max, int panels) {
  const int near = std::max(2, panels / 4);
  const int far = std::max(2, panels - near);
  std::vector<double> b{0.0};
  for (int k = near - 1; k >= 1; --k) b.push_back(std::ldexp(d, -k));
  b.push_back(d);
  const double span = x_max - d;
  for (int k = far - 1; k >= 1; --k) b.push_back(d + std::ldexp(span, -k));
  b.push_back(x_max);
  return b;
}

inline std::vector<double> with_break(std::vector<double> b, double at) {
  const auto it = std::lower_bound(b.begin(), b.end(), at);
  if (it == b.end() || *it != at) b.insert(it, at);
  return b;
}

template <class F>
double integrate_panels(const std::vector<double>& breaks, const GaussRule& rule, F&& f) {
  double total = 0.0;
  for (std::size_t p = 0; p + 1 < breaks.size(); ++p) {
    const double half = 0.5 * (breaks[p + 1] - breaks[p]);
    const double mid = 0.5 * (breaks[p + 1] + breaks[p]);
    double panel = 0.0;
    for (std::size_t i = 0; i < rule.nodes.size(); ++i) panel += rule.weights[i] * f(mid + half * rule.nodes[i]);
    total += half * panel;
  }
  return total;
}

template <class KA, class KB>
double abs_diff_sq(const KA& ka, const KB& kb, SpectralParameter kappa, double x, double y) {
  const KernelQuery q(kappa, x, y);
  return std::norm(ka(q).g - kb(q).g);
}

}  // namespace detail

/// Integral of |A(x,y) - B(x,y)|^2 over [0, X]^2, X = d + multiplier / Re(kappa).
///
/// Iterated: the inner x-integral is split at d and at the current y, where the
/// difference has derivative kinks; the outer y-integral is split at d. The
/// result is recomputed with doubled panel order and the two must agree to
/// 1e-6 relative; the tail beyond X must be below 1e-3 of the value.
template <class KA, class KB>
HsResult hs_norm_sq_diff(const KA& kernel_a, const KB& kernel_b, SpectralParameter kappa, double d,
                         const QuadratureConfig& cfg = {}) {
  detail::validate_quadrature(cfg);
  if (!(d > 0.0)) throw Error(ErrorCode::NonPositiveDistance, "d must be positive");
  const double x_max = d + cfg.truncation_multiplier / kappa.value().real();
  const auto breaks = detail::graded_breaks(d, x_max, cfg.panels_per_axis);

  auto integral = [&](const GaussRule& rule) {
    return detail::integrate_panels(breaks, rule, [&](double y) {
      return detail::integrate_panels(detail::with_break(breaks, y), rule, [&](double x) {
        return detail::abs_diff_sq(kernel_a, kernel_b, kappa, x, y);
      });
    });
  };

  const GaussRule coarse_rule = gauss_legendre(cfg.panel_order);
  const GaussRule fine_rule = gauss_legendre(2 * cfg.panel_order);
  HsResult r{};
  r.coarse_value = integral(coarse_rule);
  r.value = integral(fine_rule);

  // Strip x > X (and its mirror), assuming |dG|^2 ~ exp(-2 Re(kappa) x) there.
  const double edge = detail::integrate_panels(
      breaks, coarse_rule, [&](double y) { return detail::abs_diff_sq(kernel_a, kernel_b, kappa, x_max, y); });
  r.tail_estimate = edge / kappa.value().real();

  const double change = std::abs(r.value - r.coarse_value);
  if (change > kQuadratureRelTol * std::abs(r.value)) {
    std::ostringstream msg;
    msg << "doubling panel order changed the integral by " << change / std::abs(r.value) << " (relative)";
    throw Error(ErrorCode::QuadratureNotConverged, msg.str());
  }
  if (r.tail_estimate > kTailRelTol * r.value) {
    std::ostringstream msg;
    msg << "truncation tail " << r.tail_estimate << " exceeds 1e-3 of the integral " << r.value;
    throw Error(ErrorCode::QuadratureNotConverged, msg.str());
  }
  return r;
}

namespace detail {

inline void require_decreasing(std::span<const double> d_values) {
  for (std::size_t i = 0; i < d_values.size(); ++i) {
    require_positive_distance(d_values[i]);
    if (i > 0 && !(d_values[i] < d_values[i - 1]))
      throw Error(ErrorCode::NotDecreasing, "distances must be strictly decreasing");
  }
}

}  // namespace detail

/// One record for a single d: both channels against the target H^{a,b}.
inline ConvergenceRecord convergence_point(const VertexCoupling& c, SpectralParameter kappa, double d,
                                           const ScheduleConfig& cfg = {}, const QuadratureConfig& qcfg = {}) {
  const SchedulePoint sp = schedule_point(c, d, cfg);
  const int n = c.n();
  const Complex a = c.a(), b = c.b();
  const double tol = cfg.tol_class;

  const HsResult scalar = hs_norm_sq_diff(
      [&](const KernelQuery& q) { return approx_scalar_kernel(sp, n, q); },
      [&](const KernelQuery& q) { return target_scalar_kernel(a, b, n, q, tol); }, kappa, d, qcfg);
  const HsResult complement = hs_norm_sq_diff(
      [&](const KernelQuery& q) { return approx_complement_kernel(sp, q); },
      [&](const KernelQuery& q) { return target_complement_kernel(a, q, tol); }, kappa, d, qcfg);
  auto rel_change = [](const HsResult& r) {
    return r.value > 0.0 ? std::abs(r.value - r.coarse_value) / r.value : 0.0;
  };
  ConvergenceRecord rec{d, scalar.value, complement.value, scalar.value + (n - 1) * complement.value, sp.u, sp.v};
  rec.order_change = std::max(rel_change(scalar), rel_change(complement));
  return rec;
}

inline std::vector<ConvergenceRecord> convergence_sweep(const VertexCoupling& c, SpectralParameter kappa,
                                                        std::span<const double> d_values,
                                                        const ScheduleConfig& cfg = {},
                                                        const QuadratureConfig& qcfg = {}) {
  detail::require_decreasing(d_values);
  (void)schedule_branch(c, cfg.tol_class);
  std::vector<ConvergenceRecord> out;
  out.reserve(d_values.size());
  for (double d : d_values) out.push_back(convergence_point(c, kappa, d, cfg, qcfg));
  return out;
}

/// Least-squares line through (log x, log y); needs >= 4 points, all positive.
inline RateFit fit_loglog(std::span<const double> xs, std::span<const double> ys) {
  if (xs.size() != ys.size()) throw Error(ErrorCode::LengthMismatch, "abscissae and values differ in length");
  if (xs.size() < 4) throw Error(ErrorCode::InsufficientData, "rate fit needs at least 4 points");
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (!(xs[i] > 0.0) || !(ys[i] > 0.0) || !std::isfinite(ys[i]))
      throw Error(ErrorCode::NonPositiveValue, "rate fit needs strictly positive values");
    lx.push_back(std::log(xs[i]));
    ly.push_back(std::log(ys[i]));
  }
  const double m = static_cast<double>(lx.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    mx += lx[i];
    my += ly[i];
  }
  mx /= m;
  my /= m;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
    syy += (ly[i] - my) * (ly[i] - my);
  }
  if (sxx == 0.0) throw Error(ErrorCode::InsufficientData, "rate fit needs distinct abscissae");
  RateFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double ss_res = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    const double r = ly[i] - (fit.intercept + fit.slope * lx[i]);
    ss_res += r * r;
  }
  fit.r_squared = syy > 0.0 ? 1.0 - ss_res / syy : 1.0;
  return fit;
}

/// Fits log(record.*field) against log(record.d).
inline RateFit fit_rate(std::span<const ConvergenceRecord> records, double ConvergenceRecord::*field) {
  std::vector<double> xs, ys;
  for (const auto& r : records) {
    xs.push_back(r.d);
    ys.push_back(r.*field);
  }
  return fit_loglog(xs, ys);
}

/// Rate of |diff(d)| over the grid, for any callable d -> complex kernel difference.
template <class Diff>
RateFit pointwise_rate(const Diff& diff, std::span<const double> d_values) {
  std::vector<double> mags;
  for (double d : d_values) mags.push_back(std::abs(diff(d)));
  return fit_loglog(d_values, mags);
}

struct ChannelRates {
  RateFit complement;
  RateFit scalar;
};

/// Pointwise decay of the kernel difference at a fixed (x, y) outside [0, d].
inline ChannelRates pointwise_rate_probe(const VertexCoupling& c, SpectralParameter kappa, double x, double y,
                                         std::span<const double> d_values, const ScheduleConfig& cfg = {}) {
  detail::require_decreasing(d_values);
  if (!d_values.empty() && !(x > d_values.front() && y > d_values.front()))
    throw Error(ErrorCode::InvalidQuery, "probe point must lie beyond every d");
  const KernelQuery q(kappa, x, y);
  const int n = c.n();
  const Complex tc = target_complement_kernel(c.a(), q, cfg.tol_class).g;
  const Complex ts = target_scalar_kernel(c.a(), c.b(), n, q, cfg.tol_class).g;
  ChannelRates out;
  out.complement = pointwise_rate(
      [&](double d) { return approx_complement_kernel(schedule_point(c, d, cfg), q).g - tc; }, d_values);
  out.scalar = pointwise_rate(
      [&](double d) { return approx_scalar_kernel(schedule_point(c, d, cfg), n, q).g - ts; }, d_values);
  return out;
}

}  // namespace qgstar
