#pragma once

// Independent reconstruction of half-line Green functions by direct matching.
//
// The half-line is cut at the source point y and, if present, at the
// interface d. On every bounded piece [L, R] the solution of -psi'' + kappa^2 psi = 0
// is written as A exp(-kappa (x - L)) + B exp(kappa (x - R)), so both basis
// functions are bounded by 1 on their piece; the unbounded piece carries only
// the decaying exponential. The boundary condition at 0, continuity at each
// cut, and the derivative jumps (v psi(d) at the interface, -1 at the source)
// form a square linear system of size at most 5.
//
// Nothing here uses Krein's formula or the x_< / x_> symmetrisation.

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <optional>
#include <sstream>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "qgstar/error.hpp"
#include "qgstar/kernels.hpp"

namespace qgstar {

namespace boundary {
struct Dirichlet {};
/// psi'(0) = slope * psi(0)
struct Robin { double slope; };
/// c0 psi(0) + c1 psi'(0) = 0
struct Complex2Term { Complex c0; Complex c1; };
}  // namespace boundary

using Boundary = std::variant<boundary::Dirichlet, boundary::Robin, boundary::Complex2Term>;

struct Interface {
  double d;
  double v;
};

struct HalflineProblem {
  Boundary boundary;
  std::optional<Interface> interface;
};

/// Piecewise-exponential solution of one matching problem.
class OracleSolution {
 public:
  /// psi(x) and psi'(x); at a cut point the derivative is taken from `side`.
  KernelValue evaluate(double x, Side side = Side::Right) const {
    const std::size_t i = piece_index(x, side);
    const Piece& p = pieces_[i];
    const Complex em = std::exp(-kappa_ * (x - p.left));
    Complex g = p.decaying * em;
    Complex dg = -kappa_ * p.decaying * em;
    if (p.right) {
      const Complex ep = std::exp(kappa_ * (x - *p.right));
      g += p.growing * ep;
      dg += kappa_ * p.growing * ep;
    }
    return {g, dg};
  }

  /// 2-norm condition number of the row-equilibrated matching matrix.
  double condition() const noexcept { return condition_; }
  const std::vector<double>& cuts() const noexcept { return cuts_; }

 private:
  struct Piece {
    double left;
    std::optional<double> right;
    Complex decaying = 0.0;
    Complex growing = 0.0;
  };

  std::size_t piece_index(double x, Side side) const {
    std::size_t i = 0;
    while (i < cuts_.size() && (x > cuts_[i] || (x == cuts_[i] && side == Side::Right))) ++i;
    return i;
  }

  Complex kappa_;
  std::vector<double> cuts_;
  std::vector<Piece> pieces_;
  double condition_ = 0.0;

  friend OracleSolution oracle_solve(const HalflineProblem&, SpectralParameter, double);
};

inline constexpr double kOracleMaxCondition = 1e14;

/// Solves for the Green function with source at y > 0.
inline OracleSolution oracle_solve(const HalflineProblem& prob, SpectralParameter kappa, double y) {
  using Mat = Eigen::Matrix<Complex, Eigen::Dynamic, Eigen::Dynamic>;
  using Vec = Eigen::Matrix<Complex, Eigen::Dynamic, 1>;

  if (!(y > 0.0) || !std::isfinite(y)) throw Error(ErrorCode::InvalidQuery, "oracle needs a source point y > 0");
  if (prob.interface && !(prob.interface->d > 0.0))
    throw Error(ErrorCode::NonPositiveDistance, "interface position must be positive");
  if (const auto* ct = std::get_if<boundary::Complex2Term>(&prob.boundary); ct && ct->c0 == 0.0 && ct->c1 == 0.0)
    throw Error(ErrorCode::InvalidConfig, "two-term boundary condition needs (c0, c1) != (0, 0)");

  OracleSolution sol;
  sol.kappa_ = kappa.value();
  const Complex k = sol.kappa_;

  struct Cut {
    double at;
    double strength;  // delta strength at this point
    double source;    // 1 where the unit source sits
  };
  std::vector<Cut> cuts{{y, 0.0, 1.0}};
  if (prob.interface) {
    if (prob.interface->d == y) {
      cuts[0].strength = prob.interface->v;
    } else {
      cuts.push_back({prob.interface->d, prob.interface->v, 0.0});
    }
  }
  std::sort(cuts.begin(), cuts.end(), [](const Cut& l, const Cut& r) { return l.at < r.at; });

  double left = 0.0;
  for (const Cut& c : cuts) {
    sol.cuts_.push_back(c.at);
    sol.pieces_.push_back({left, c.at});
    left = c.at;
  }
  sol.pieces_.push_back({left, std::nullopt});

  // Unknown layout: (A_0, B_0, A_1, B_1, ..., C_last).
  const auto n_bounded = static_cast<Eigen::Index>(cuts.size());
  const Eigen::Index size = 2 * n_bounded + 1;
  Mat m = Mat::Zero(size, size);
  Vec rhs = Vec::Zero(size);

  // Values and derivatives of the basis of piece i at its left and right ends.
  auto width = [&](std::size_t i) { return *sol.pieces_[i].right - sol.pieces_[i].left; };

  {
    const Complex tail = std::exp(-k * width(0));
    const Complex val_a = 1.0, val_b = tail, der_a = -k, der_b = k * tail;
    Complex r_a, r_b;
    if (std::holds_alternative<boundary::Dirichlet>(prob.boundary)) {
      r_a = val_a;
      r_b = val_b;
    } else if (const auto* rb = std::get_if<boundary::Robin>(&prob.boundary)) {
      r_a = der_a - rb->slope * val_a;
      r_b = der_b - rb->slope * val_b;
    } else {
      const auto& ct = std::get<boundary::Complex2Term>(prob.boundary);
      r_a = ct.c0 * val_a + ct.c1 * der_a;
      r_b = ct.c0 * val_b + ct.c1 * der_b;
    }
    m(0, 0) = r_a;
    m(0, 1) = r_b;
  }

  for (std::size_t ci = 0; ci < cuts.size(); ++ci) {
    const auto row = static_cast<Eigen::Index>(1 + 2 * ci);
    const auto lcol = static_cast<Eigen::Index>(2 * ci);
    const auto rcol = lcol + 2;
    const bool right_bounded = ci + 1 < cuts.size();

    // Left piece at its right end: A e^{-kappa w} + B.
    const Complex lt = std::exp(-k * width(ci));
    const Complex lval_a = lt, lval_b = 1.0, lder_a = -k * lt, lder_b = k;
    // Right piece at its left end: A + B e^{-kappa w'} (B absent when unbounded).
    const Complex rt = right_bounded ? std::exp(-k * width(ci + 1)) : Complex(0.0);
    const Complex rval_a = 1.0, rval_b = rt, rder_a = -k, rder_b = k * rt;

    // continuity
    m(row, lcol) = -lval_a;
    m(row, lcol + 1) = -lval_b;
    m(row, rcol) = rval_a;
    if (right_bounded) m(row, rcol + 1) = rval_b;
    // psi'(t+) - psi'(t-) - strength psi(t) = -source
    m(row + 1, lcol) = -lder_a - cuts[ci].strength * lval_a;
    m(row + 1, lcol + 1) = -lder_b - cuts[ci].strength * lval_b;
    m(row + 1, rcol) = rder_a;
    if (right_bounded) m(row + 1, rcol + 1) = rder_b;
    rhs(row + 1) = -cuts[ci].source;
  }

  for (Eigen::Index r = 0; r < size; ++r) {
    const double scale = m.row(r).cwiseAbs().maxCoeff();
    if (scale == 0.0) throw Error(ErrorCode::SingularSystem, "matching matrix has a zero row");
    m.row(r) /= scale;
    rhs(r) /= scale;
  }

  const Eigen::JacobiSVD<Mat> svd(m);
  const auto& sv = svd.singularValues();
  const double smin = sv(sv.size() - 1);
  sol.condition_ = smin > 0.0 ? sv(0) / smin : std::numeric_limits<double>::infinity();
  if (!(sol.condition_ < kOracleMaxCondition)) {
    std::ostringstream msg;
    msg << "matching system is singular at this kappa (condition number " << sol.condition_ << ")";
    throw Error(ErrorCode::SingularSystem, msg.str());
  }

  const Vec coeff = m.fullPivLu().solve(rhs);
  for (std::size_t i = 0; i < sol.pieces_.size(); ++i) {
    sol.pieces_[i].decaying = coeff(static_cast<Eigen::Index>(2 * i));
    if (sol.pieces_[i].right) sol.pieces_[i].growing = coeff(static_cast<Eigen::Index>(2 * i + 1));
  }
  return sol;
}

inline KernelValue oracle_kernel(const HalflineProblem& prob, const KernelQuery& q) {
  return oracle_solve(prob, q.kappa, q.y).evaluate(q.x, q.side);
}

}  // namespace qgstar
