#pragma once

// Matrix-valued Green functions on the star graph, assembled from the two
// permutation channels: the symmetric (scalar) subspace with projector J/n and
// its orthogonal complement with projector I - J/n.

#include <complex>

#include <Eigen/Dense>

#include "qgstar/coupling.hpp"
#include "qgstar/kernels.hpp"
#include "qgstar/schedule.hpp"

namespace qgstar {

/// entries(j, l): kernel between edge j at x and edge l at y; d_entries: x-derivatives.
struct MatrixKernelValue {
  Eigen::MatrixXcd entries;
  Eigen::MatrixXcd d_entries;
};

/// complement * (I - J/n) + scalar * J/n.
inline MatrixKernelValue assemble_channels(int n, const KernelValue& complement, const KernelValue& scalar) {
  const double inv_n = 1.0 / static_cast<double>(n);
  MatrixKernelValue m;
  m.entries = Eigen::MatrixXcd::Constant(n, n, (scalar.g - complement.g) * inv_n);
  m.entries.diagonal().array() += complement.g;
  m.d_entries = Eigen::MatrixXcd::Constant(n, n, (scalar.dg_dx - complement.dg_dx) * inv_n);
  m.d_entries.diagonal().array() += complement.dg_dx;
  return m;
}

/// Resolvent kernel of H^{a,b}. Delta and diagonal couplings are allowed here.
inline MatrixKernelValue full_target_kernel(const VertexCoupling& c, const KernelQuery& q,
                                            double tol_class = kDefaultTolClass) {
  return assemble_channels(c.n(), target_complement_kernel(c.a(), q, tol_class),
                           target_scalar_kernel(c.a(), c.b(), c.n(), q, tol_class));
}

/// Resolvent kernel of the approximating operator H_{u,v}(d) for the schedule point sp.
inline MatrixKernelValue full_approx_kernel(const VertexCoupling& c, const SchedulePoint& sp, const KernelQuery& q,
                                            double tol_class = kDefaultTolClass) {
  (void)schedule_branch(c, tol_class);
  return assemble_channels(c.n(), approx_complement_kernel(sp, q), approx_scalar_kernel(sp, c.n(), q));
}

/// (U - I) G(0, y) + i (U + I) dG/dx(0, y), column by column. `mk` must be taken at x = 0.
inline Eigen::MatrixXcd vertex_bc_residual(const VertexCoupling& c, const MatrixKernelValue& mk) {
  using namespace std::complex_literals;
  const Eigen::MatrixXcd u = coupling_matrix(c);
  const auto id = Eigen::MatrixXcd::Identity(c.n(), c.n());
  return (u - id) * mk.entries + 1i * (u + id) * mk.d_entries;
}

}  // namespace qgstar
