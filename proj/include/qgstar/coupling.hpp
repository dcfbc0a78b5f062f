#pragma once

// Permutation-symmetric vertex couplings U = aI + bJ on an n-edge star graph.
//
// The boundary condition at the vertex is (U - I) Psi(0) + i (U + I) Psi'(0) = 0
// with U unitary; symmetry under relabelling of edges forces U = aI + bJ where
// J is the all-ones matrix and |a| = |a + n b| = 1.

#include <cmath>
#include <complex>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <type_traits>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "qgstar/error.hpp"

namespace qgstar {

inline constexpr double kDefaultTolUnitary = 1e-12;
inline constexpr double kDefaultTolClass = 1e-9;

enum class CouplingClass { Delta, DeltaPrimeS, DeltaPrime, DeltaP, Resonant, Diagonal, Generic };

constexpr std::string_view class_tag(CouplingClass c) {
  switch (c) {
    case CouplingClass::Delta: return "delta";
    case CouplingClass::DeltaPrimeS: return "delta_prime_s";
    case CouplingClass::DeltaPrime: return "delta_prime";
    case CouplingClass::DeltaP: return "delta_p";
    case CouplingClass::Resonant: return "resonant";
    case CouplingClass::Diagonal: return "diagonal";
    case CouplingClass::Generic: return "generic";
  }
  return "unknown";
}

namespace family {
struct Delta { double alpha; };
struct DeltaPrimeS { double beta; };
struct DeltaPrime { double beta; };
struct DeltaP { double alpha; };
}  // namespace family

using Family = std::variant<family::Delta, family::DeltaPrimeS, family::DeltaPrime, family::DeltaP>;

/// A single failed modulus condition, with the measured defect.
struct Violation {
  std::string condition;
  double defect;
};

class VertexCoupling;
VertexCoupling make_coupling(int n, Complex a, Complex b, double tol_unitary = kDefaultTolUnitary);

/// Validated (n, a, b). Only constructible through make_coupling / from_family.
class VertexCoupling {
 public:
  int n() const noexcept { return n_; }
  Complex a() const noexcept { return a_; }
  Complex b() const noexcept { return b_; }
  /// Eigenvalue of U on the permutation-symmetric vector (1, ..., 1).
  Complex scalar_eigenvalue() const noexcept { return a_ + static_cast<double>(n_) * b_; }

  /// Sub-label recorded by from_family (DeltaPrimeS, DeltaPrime, ...); informational only.
  std::optional<CouplingClass> family_label() const noexcept { return label_; }

 private:
  VertexCoupling(int n, Complex a, Complex b) : n_(n), a_(a), b_(b) {}

  int n_;
  Complex a_;
  Complex b_;
  std::optional<CouplingClass> label_;

  friend VertexCoupling make_coupling(int, Complex, Complex, double);
  friend VertexCoupling from_family(const Family&, int);
};

/// Lists the modulus conditions (a, b) fails; empty means valid.
inline std::vector<Violation> check_coupling(int n, Complex a, Complex b,
                                             double tol_unitary = kDefaultTolUnitary) {
  std::vector<Violation> out;
  const double da = std::abs(std::abs(a) - 1.0);
  if (!(da <= tol_unitary)) out.push_back({"|a| = 1", da});
  const double ds = std::abs(std::abs(a + static_cast<double>(n) * b) - 1.0);
  if (!(ds <= tol_unitary)) out.push_back({"|a + n b| = 1", ds});
  return out;
}

inline VertexCoupling make_coupling(int n, Complex a, Complex b, double tol_unitary) {
  if (n < 2) throw Error(ErrorCode::BadEdgeCount, "edge count must be >= 2, got " + std::to_string(n));
  const auto violations = check_coupling(n, a, b, tol_unitary);
  if (!violations.empty()) {
    std::ostringstream msg;
    msg.precision(3);
    for (std::size_t i = 0; i < violations.size(); ++i) {
      if (i) msg << "; ";
      msg << violations[i].condition << " violated by " << violations[i].defect;
    }
    throw Error(ErrorCode::ConstraintViolated, msg.str());
  }
  return VertexCoupling(n, a, b);
}

inline VertexCoupling from_family(const Family& f, int n) {
  using namespace std::complex_literals;
  const double nn = static_cast<double>(n);
  struct Params {
    Complex a, b;
    CouplingClass label;
  };
  const Params p = std::visit(
      [nn](const auto& fam) -> Params {
        using T = std::decay_t<decltype(fam)>;
        if constexpr (std::is_same_v<T, family::Delta>) {
          return {-1.0, 2.0 / (nn + 1i * fam.alpha), CouplingClass::Delta};
        } else if constexpr (std::is_same_v<T, family::DeltaPrimeS>) {
          return {1.0, 2.0 / (1i * fam.beta - nn), CouplingClass::DeltaPrimeS};
        } else if constexpr (std::is_same_v<T, family::DeltaPrime>) {
          return {(1i * fam.beta + nn) / (1i * fam.beta - nn), 2.0 / (nn - 1i * fam.beta),
                  CouplingClass::DeltaPrime};
        } else {
          return {(nn - 1i * fam.alpha) / (nn + 1i * fam.alpha), -2.0 / (nn + 1i * fam.alpha),
                  CouplingClass::DeltaP};
        }
      },
      f);
  VertexCoupling c = make_coupling(n, p.a, p.b);
  c.label_ = p.label;
  return c;
}

inline Eigen::MatrixXcd coupling_matrix(const VertexCoupling& c) {
  const int n = c.n();
  Eigen::MatrixXcd u = Eigen::MatrixXcd::Constant(n, n, c.b());
  u.diagonal().array() += c.a();
  return u;
}

/// Precedence: Diagonal, Delta, DeltaP, Resonant, Generic.
inline CouplingClass classify(const VertexCoupling& c, double tol_class = kDefaultTolClass) {
  const Complex s = c.scalar_eigenvalue();
  if (std::abs(c.b()) <= tol_class) return CouplingClass::Diagonal;
  if (std::abs(c.a() + 1.0) <= tol_class) return CouplingClass::Delta;
  if (std::abs(s + 1.0) <= tol_class) return CouplingClass::DeltaP;
  if (std::abs(c.a() * s - 1.0) <= tol_class) return CouplingClass::Resonant;
  return CouplingClass::Generic;
}

struct BoundaryValues {
  std::vector<Complex> values;       // Psi(0)
  std::vector<Complex> derivatives;  // Psi'(0), outgoing
};

/// (U - I) Psi(0) + i (U + I) Psi'(0); zero iff the boundary values satisfy the coupling.
inline std::vector<Complex> bc_residual(const VertexCoupling& c, const BoundaryValues& bv) {
  using namespace std::complex_literals;
  const auto n = static_cast<std::size_t>(c.n());
  if (bv.values.size() != n || bv.derivatives.size() != n)
    throw Error(ErrorCode::LengthMismatch, "boundary vectors must have length " + std::to_string(n));
  Complex sum_v = 0.0, sum_d = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    sum_v += bv.values[j];
    sum_d += bv.derivatives[j];
  }
  std::vector<Complex> r(n);
  for (std::size_t j = 0; j < n; ++j) {
    const Complex u_psi = c.a() * bv.values[j] + c.b() * sum_v;
    const Complex u_dpsi = c.a() * bv.derivatives[j] + c.b() * sum_d;
    r[j] = (u_psi - bv.values[j]) + 1i * (u_dpsi + bv.derivatives[j]);
  }
  return r;
}

}  // namespace qgstar
