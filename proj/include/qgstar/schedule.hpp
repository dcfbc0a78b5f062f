#pragma once

// Strengths of the approximating singular interactions: a delta coupling of
// strength u at the vertex plus a delta interaction of strength v on every
// edge at distance d from the vertex.

#include <cmath>
#include <complex>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "qgstar/coupling.hpp"
#include "qgstar/error.hpp"

namespace qgstar {

/// Vertex-strength law: Generic u ~ d^-2, Resonant u = zeta / d^nu, DeltaP u = -n / d.
enum class Branch { Generic, Resonant, DeltaP };

constexpr std::string_view branch_tag(Branch b) {
  switch (b) {
    case Branch::Generic: return "generic";
    case Branch::Resonant: return "resonant";
    case Branch::DeltaP: return "delta_p";
  }
  return "unknown";
}

struct ScheduleConfig {
  double zeta = 1.0;  // resonant numerator, nonzero
  double nu = 3.0;    // resonant exponent, > 2
  /// Overrides the class-based branch choice. Used for negative controls only.
  std::optional<Branch> force_branch;
  double tol_class = kDefaultTolClass;
};

struct SchedulePoint {
  double d;
  double u;
  double v;
};

namespace detail {

inline constexpr double kRealnessTol = 1e-13;

inline void require_positive_distance(double d) {
  if (!(d > 0.0) || !std::isfinite(d))
    throw Error(ErrorCode::NonPositiveDistance, "distance must be positive, got " + std::to_string(d));
}

inline void validate_config(const ScheduleConfig& cfg) {
  if (!(cfg.zeta != 0.0) || !std::isfinite(cfg.zeta))
    throw Error(ErrorCode::InvalidConfig, "zeta must be a nonzero finite number");
  if (!(cfg.nu > 2.0) || !std::isfinite(cfg.nu))
    throw Error(ErrorCode::InvalidConfig, "nu must exceed 2");
}

// Validation admits |a| = 1 only up to tol_unitary; the realness guards below
// are at rounding level, so the eigenvalues are projected back to the circle.
inline Complex on_unit_circle(Complex z) { return z / std::abs(z); }

// (z - 1) / (z + 1), purely imaginary for |z| = 1.
inline Complex cayley(Complex z) { return (z - 1.0) / (z + 1.0); }

}  // namespace detail

/// Natural branch for a coupling; throws ExcludedCoupling for Delta and Diagonal couplings.
inline Branch schedule_branch(const VertexCoupling& c, double tol_class = kDefaultTolClass) {
  switch (classify(c, tol_class)) {
    case CouplingClass::Delta:
      throw Error(ErrorCode::ExcludedCoupling,
                  "delta couplings (a = -1) are excluded; they have a direct potential approximation");
    case CouplingClass::Diagonal:
      throw Error(ErrorCode::ExcludedCoupling, "diagonal couplings (b = 0) are excluded");
    case CouplingClass::DeltaP: return Branch::DeltaP;
    // a (a + nb) = 1 is not degenerate for the generic law; zeta / d^nu would
    // drive the scalar channel to the complement slope instead.
    default: return Branch::Generic;
  }
}

/// v(d) = -1/d + i (a-1)/(a+1) = -1/d - 2 Im(a) / |a+1|^2.
///
/// The O(1) term makes psi'(d+) / psi(d) tend to the complement-channel slope
/// i (a-1)/(a+1) of the target condition (a-1) psi(0) + i (a+1) psi'(0) = 0.
inline double edge_strength_v(const VertexCoupling& c, double d, double tol_class = kDefaultTolClass) {
  using namespace std::complex_literals;
  detail::require_positive_distance(d);
  (void)schedule_branch(c, tol_class);
  const Complex a = detail::on_unit_circle(c.a());
  const Complex symbolic = 1i * detail::cayley(a);
  if (std::abs(symbolic.imag()) > detail::kRealnessTol * std::max(1.0, std::abs(symbolic)))
    throw Error(ErrorCode::NonRealSchedule, "edge strength has imaginary part " + std::to_string(symbolic.imag()));
  return -1.0 / d - 2.0 * a.imag() / std::norm(a + 1.0);
}

inline double vertex_strength_u(const VertexCoupling& c, double d, const ScheduleConfig& cfg = {}) {
  using namespace std::complex_literals;
  detail::require_positive_distance(d);
  detail::validate_config(cfg);
  const Branch natural = schedule_branch(c, cfg.tol_class);
  const Branch branch = cfg.force_branch.value_or(natural);
  const double n = static_cast<double>(c.n());
  switch (branch) {
    case Branch::Resonant: return cfg.zeta / std::pow(d, cfg.nu);
    case Branch::DeltaP: return -n / d;
    case Branch::Generic: break;
  }
  const Complex a = detail::on_unit_circle(c.a());
  const Complex s = detail::on_unit_circle(c.scalar_eigenvalue());
  const Complex bracket = detail::cayley(s) - detail::cayley(a);
  if (std::abs(bracket) < 1e-13)
    throw Error(ErrorCode::DegenerateBracket,
                "generic-branch bracket vanishes (|bracket| = " + std::to_string(std::abs(bracket)) +
                    "); coupling is numerically diagonal");
  const Complex u = 1i * (n / (d * d)) / bracket;
  if (std::abs(u.imag()) > detail::kRealnessTol * std::abs(u))
    throw Error(ErrorCode::NonRealSchedule, "vertex strength has imaginary part " + std::to_string(u.imag()));
  return u.real();
}

inline SchedulePoint schedule_point(const VertexCoupling& c, double d, const ScheduleConfig& cfg = {}) {
  return {d, vertex_strength_u(c, d, cfg), edge_strength_v(c, d, cfg.tol_class)};
}

/// Requires d strictly decreasing and positive; order is preserved.
inline std::vector<SchedulePoint> schedule_sweep(const VertexCoupling& c, std::span<const double> d_values,
                                                 const ScheduleConfig& cfg = {}) {
  for (std::size_t i = 0; i < d_values.size(); ++i) {
    detail::require_positive_distance(d_values[i]);
    if (i > 0 && !(d_values[i] < d_values[i - 1]))
      throw Error(ErrorCode::NotDecreasing, "distances must be strictly decreasing");
  }
  std::vector<SchedulePoint> out;
  out.reserve(d_values.size());
  for (double d : d_values) out.push_back(schedule_point(c, d, cfg));
  return out;
}

/// n_points geometrically spaced values from d_start down to d_end inclusive.
inline std::vector<double> geometric_grid(double d_start, double d_end, int n_points) {
  detail::require_positive_distance(d_start);
  detail::require_positive_distance(d_end);
  if (n_points < 2) throw Error(ErrorCode::InvalidConfig, "geometric grid needs at least 2 points");
  std::vector<double> out(static_cast<std::size_t>(n_points));
  const double l0 = std::log(d_start), l1 = std::log(d_end);
  for (int i = 0; i < n_points; ++i)
    out[static_cast<std::size_t>(i)] = std::exp(l0 + (l1 - l0) * i / (n_points - 1));
  out.front() = d_start;
  out.back() = d_end;
  return out;
}

}  // namespace qgstar
