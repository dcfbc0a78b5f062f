#pragma once

// Closed-form Green functions of -d^2/dx^2 + kappa^2 on the half-line, and
// their rank-one (Krein) perturbation by a delta interaction at x = d.
//
// Every unperturbed kernel here has the form
//
//   G(x, y) = psi(x_<) exp(-kappa x_>) / W,   psi = P sinh(kappa x) + Q cosh(kappa x),
//
// with Wronskian W = kappa (P + Q). Products sinh(kappa x_<) exp(-kappa x_>)
// are evaluated as differences of decaying exponentials, so nothing overflows.

#include <cmath>
#include <complex>
#include <string>

#include "qgstar/coupling.hpp"
#include "qgstar/error.hpp"
#include "qgstar/schedule.hpp"

namespace qgstar {

/// kappa = -i k with Re kappa > 0; the resolvent is taken at energy -kappa^2.
class SpectralParameter {
 public:
  explicit SpectralParameter(Complex kappa) : kappa_(kappa) {
    if (!(kappa.real() > 0.0) || !std::isfinite(kappa.imag()) || !std::isfinite(kappa.real()))
      throw Error(ErrorCode::InvalidQuery, "spectral parameter needs Re(kappa) > 0");
  }
  Complex value() const noexcept { return kappa_; }

 private:
  Complex kappa_;
};

/// Which one-sided derivative to report when x sits exactly on a kink (y or d).
enum class Side { Left, Right };

struct KernelQuery {
  SpectralParameter kappa;
  double x;
  double y;
  Side side = Side::Right;

  KernelQuery(SpectralParameter k, double x_, double y_, Side s = Side::Right)
      : kappa(k), x(x_), y(y_), side(s) {
    if (!(x >= 0.0) || !(y >= 0.0) || !std::isfinite(x) || !std::isfinite(y))
      throw Error(ErrorCode::InvalidQuery, "positions must be finite and nonnegative");
  }
  KernelQuery with_xy(double x_, double y_) const { return KernelQuery(kappa, x_, y_, side); }
};

struct KernelValue {
  Complex g;
  Complex dg_dx;
  /// Set when Re(kappa |x - y|) exceeds 700; g and dg_dx are then returned as 0.
  bool underflow = false;
};

/// psi(x) = p sinh(kappa x) + q cosh(kappa x) fixes the condition at the origin.
struct BoundaryProfile {
  Complex p;
  Complex q;
};

namespace detail {

inline constexpr double kSingularTol = 1e-300;
inline constexpr double kUnderflowExponent = 700.0;

// exp(z) - 1 without cancellation for small |z|.
inline Complex expm1(Complex z) {
  const double re = std::expm1(z.real()) * std::cos(z.imag()) - 2.0 * std::pow(std::sin(0.5 * z.imag()), 2);
  const double im = std::exp(z.real()) * std::sin(z.imag());
  return {re, im};
}

// sinh(kappa lo) exp(-kappa hi) and cosh(kappa lo) exp(-kappa hi), 0 <= lo <= hi.
struct DecayPair {
  Complex s;
  Complex c;
  bool underflow;
};

inline DecayPair decay_pair(Complex kappa, double lo, double hi) {
  const Complex gap = kappa * (hi - lo);
  const Complex e = std::exp(-gap);
  const Complex m = expm1(-2.0 * kappa * lo);
  return {-0.5 * e * m, 0.5 * e * (2.0 + m), gap.real() > kUnderflowExponent};
}

inline bool below(double x, double point, Side side) { return x < point || (x == point && side == Side::Left); }

}  // namespace detail

inline KernelValue profile_kernel(const BoundaryProfile& bp, const KernelQuery& q) {
  const Complex k = q.kappa.value();
  const Complex wr = bp.p + bp.q;
  if (std::abs(wr) < detail::kSingularTol)
    throw Error(ErrorCode::SingularDenominator, "Wronskian vanishes; kappa is at a resonance");
  const double lo = std::min(q.x, q.y), hi = std::max(q.x, q.y);
  const auto f = detail::decay_pair(k, lo, hi);
  KernelValue out;
  if (f.underflow) {
    out.underflow = true;
    return out;
  }
  out.g = (bp.p * f.s + bp.q * f.c) / (k * wr);
  if (detail::below(q.x, q.y, q.side)) {
    out.dg_dx = (bp.p * f.c + bp.q * f.s) / wr;
  } else {
    out.dg_dx = -k * out.g;
  }
  return out;
}

/// sinh(kappa x_<) exp(-kappa x_>) / kappa.
inline KernelValue dirichlet_kernel(const KernelQuery& q) { return profile_kernel({1.0, 0.0}, q); }

/// cosh(kappa x_<) exp(-kappa x_>) / kappa.
inline KernelValue neumann_kernel(const KernelQuery& q) { return profile_kernel({0.0, q.kappa.value()}, q); }

/// Adds a delta interaction of strength v at x = d to the kernel `base`
/// (any callable KernelQuery -> KernelValue sharing the same kappa).
template <class Base>
KernelValue krein_perturb(const Base& base, double v, double d, const KernelQuery& q) {
  if (!(d > 0.0)) throw Error(ErrorCode::NonPositiveDistance, "interaction point must satisfy d > 0");
  const KernelValue gxy = base(q);
  if (v == 0.0) return gxy;
  const KernelValue gxd = base(q.with_xy(q.x, d));
  const KernelValue gdy = base(q.with_xy(d, q.y));
  const KernelValue gdd = base(q.with_xy(d, d));
  const Complex den = -1.0 / v - gdd.g;
  if (std::abs(den) < detail::kSingularTol)
    throw Error(ErrorCode::SingularDenominator, "Krein denominator vanishes at this kappa");
  const Complex w = gdy.g / den;
  return {gxy.g + gxd.g * w, gxy.dg_dx + gxd.dg_dx * w, gxy.underflow};
}

/// Complement-channel target: (a - 1) psi(0) + i (a + 1) psi'(0) = 0.
inline KernelValue target_complement_kernel(Complex a, const KernelQuery& q,
                                            double tol_class = kDefaultTolClass) {
  using namespace std::complex_literals;
  if (std::abs(a + 1.0) <= tol_class) return dirichlet_kernel(q);
  return profile_kernel({1i * (a - 1.0), q.kappa.value() * (a + 1.0)}, q);
}

/// Scalar-channel target: (a + nb - 1) psi(0) + i (a + nb + 1) psi'(0) = 0.
inline KernelValue target_scalar_kernel(Complex a, Complex b, int n, const KernelQuery& q,
                                        double tol_class = kDefaultTolClass) {
  using namespace std::complex_literals;
  const Complex s = a + static_cast<double>(n) * b;
  if (std::abs(s + 1.0) <= tol_class) return dirichlet_kernel(q);
  return profile_kernel({1i * (s - 1.0), q.kappa.value() * (s + 1.0)}, q);
}

/// Scalar channel of a delta coupling of strength u at the vertex: psi'(0) = (u/n) psi(0).
inline KernelValue delta_vertex_kernel(double u, int n, const KernelQuery& q) {
  return profile_kernel({u / static_cast<double>(n), q.kappa.value()}, q);
}

inline KernelValue approx_complement_kernel(const SchedulePoint& sp, const KernelQuery& q) {
  return krein_perturb([](const KernelQuery& qq) { return dirichlet_kernel(qq); }, sp.v, sp.d, q);
}

inline KernelValue approx_scalar_kernel(const SchedulePoint& sp, int n, const KernelQuery& q) {
  return krein_perturb([&](const KernelQuery& qq) { return delta_vertex_kernel(sp.u, n, qq); }, sp.v, sp.d, q);
}

}  // namespace qgstar
