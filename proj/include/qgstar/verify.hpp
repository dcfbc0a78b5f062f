#pragma once

// Invariant battery behind `qgstar verify`: oracle equivalence of every closed
// form, derivative jumps, vertex residuals, the analytic quadrature case and
// monotone sweeps. Each check yields (name, value, tolerance); it passes when
// value <= tolerance.

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "qgstar/convergence.hpp"
#include "qgstar/coupling.hpp"
#include "qgstar/kernels.hpp"
#include "qgstar/oracle.hpp"
#include "qgstar/schedule.hpp"
#include "qgstar/stargraph.hpp"

namespace qgstar {

enum class Suite { Fast, Full };

struct CheckResult {
  std::string name;
  double value;
  double tolerance;
  bool pass() const { return value <= tolerance; }
};

/// Closed forms under test; swapping one out is how the battery's own negative control works.
struct KernelSet {
  std::function<KernelValue(const KernelQuery&)> dirichlet = [](const KernelQuery& q) { return dirichlet_kernel(q); };
};

namespace detail {

inline double rel_err(Complex got, Complex want) {
  return std::abs(got - want) / std::max(std::abs(want), 1e-300);
}

struct Battery {
  Suite suite;
  KernelSet kernels;
  std::vector<CheckResult> results;
  std::mt19937_64 rng{20061205};

  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); }

  void add(std::string name, double value, double tol) { results.push_back({std::move(name), value, tol}); }

  int samples() const { return suite == Suite::Fast ? 25 : 100; }

  // max relative error between closed form and oracle over random (x, y)
  template <class Closed>
  double oracle_gap(const HalflineProblem& prob, SpectralParameter kappa, const Closed& closed) {
    double worst = 0.0;
    for (int i = 0; i < samples(); ++i) {
      const KernelQuery q(kappa, uniform(0.01, 4.0), uniform(0.01, 4.0));
      worst = std::max(worst, rel_err(closed(q).g, oracle_kernel(prob, q).g));
    }
    return worst;
  }

  void oracle_checks() {
    using namespace std::complex_literals;
    const SpectralParameter k1(1.0);
    const auto dir = kernels.dirichlet;
    add("oracle_dirichlet", oracle_gap({boundary::Dirichlet{}, {}}, k1, dir), 1e-12);

    const Complex a = 0.6 + 0.8i;
    add("oracle_target_complement",
        oracle_gap({boundary::Complex2Term{a - 1.0, 1i * (a + 1.0)}, {}}, k1,
                   [&](const KernelQuery& q) { return target_complement_kernel(a, q); }),
        1e-12);

    const auto dps = from_family(family::DeltaPrime{2.0}, 3);
    const Complex s = dps.scalar_eigenvalue();
    add("oracle_target_scalar",
        oracle_gap({boundary::Complex2Term{s - 1.0, 1i * (s + 1.0)}, {}}, k1,
                   [&](const KernelQuery& q) { return target_scalar_kernel(dps.a(), dps.b(), dps.n(), q); }),
        1e-12);

    add("oracle_delta_vertex",
        oracle_gap({boundary::Robin{1.0}, {}}, k1, [](const KernelQuery& q) { return delta_vertex_kernel(3.0, 3, q); }),
        1e-12);

    for (double d : {1e-1, 1e-3}) {
      const SchedulePoint sp = schedule_point(dps, d);
      const std::string tag = d > 1e-2 ? "_d1e-1" : "_d1e-3";
      add("oracle_approx_complement" + tag,
          oracle_gap({boundary::Dirichlet{}, Interface{d, sp.v}}, k1,
                     [&](const KernelQuery& q) { return krein_perturb(dir, sp.v, sp.d, q); }),
          1e-10);
      add("oracle_approx_scalar" + tag,
          oracle_gap({boundary::Robin{sp.u / 3.0}, Interface{d, sp.v}}, k1,
                     [&](const KernelQuery& q) { return approx_scalar_kernel(sp, 3, q); }),
          1e-10);
    }
  }

  void jump_checks() {
    using namespace std::complex_literals;
    const SpectralParameter k(1.0 + 0.5i);
    const auto c = from_family(family::DeltaPrime{2.0}, 3);
    const SchedulePoint sp = schedule_point(c, 0.05);
    double norm_jump = 0.0, iface_jump = 0.0;
    for (int i = 0; i < samples(); ++i) {
      const double y = uniform(0.1, 3.0);
      auto jump_at = [&](auto&& kernel, double x, double yy) {
        return kernel(KernelQuery(k, x, yy, Side::Right)).dg_dx - kernel(KernelQuery(k, x, yy, Side::Left)).dg_dx;
      };
      auto ac = [&](const KernelQuery& q) { return krein_perturb(kernels.dirichlet, sp.v, sp.d, q); };
      auto as = [&](const KernelQuery& q) { return approx_scalar_kernel(sp, c.n(), q); };
      auto tc = [&](const KernelQuery& q) { return target_complement_kernel(c.a(), q); };
      norm_jump = std::max({norm_jump, std::abs(jump_at(ac, y, y) + 1.0), std::abs(jump_at(as, y, y) + 1.0),
                            std::abs(jump_at(tc, y, y) + 1.0)});
      const KernelQuery qd(k, sp.d, y);
      iface_jump = std::max(iface_jump, rel_err(jump_at(ac, sp.d, y), sp.v * ac(qd).g));
      iface_jump = std::max(iface_jump, rel_err(jump_at(as, sp.d, y), sp.v * as(qd).g));
    }
    add("normalization_jump", norm_jump, 1e-10);
    add("interface_jump", iface_jump, 1e-10);
  }

  void residual_checks() {
    // kappa = 1 is a bound state of the a = i coupling below
    const SpectralParameter k(1.3);
    double target = 0.0, approx = 0.0;
    const std::vector<VertexCoupling> couplings{
        from_family(family::Delta{1.0}, 3), from_family(family::DeltaPrimeS{1.0}, 3),
        from_family(family::DeltaPrime{2.0}, 4), from_family(family::DeltaP{1.0}, 2),
        make_coupling(2, Complex(0.0, 1.0), Complex(0.0, -1.0))};
    for (const auto& c : couplings) {
      for (int i = 0; i < samples() / 5 + 1; ++i) {
        const KernelQuery q(k, 0.0, uniform(0.1, 3.0));
        const auto mk = full_target_kernel(c, q);
        target = std::max(target, vertex_bc_residual(c, mk).cwiseAbs().maxCoeff() /
                                      std::max(mk.entries.cwiseAbs().maxCoeff(), mk.d_entries.cwiseAbs().maxCoeff()));
        if (classify(c) == CouplingClass::Delta) continue;
        const SchedulePoint sp = schedule_point(c, 0.01);
        const auto ma = full_approx_kernel(c, sp, q);
        const double scale = std::max(ma.entries.cwiseAbs().maxCoeff(), ma.d_entries.cwiseAbs().maxCoeff());
        for (int l = 0; l < c.n(); ++l) {
          const Complex r = ma.d_entries.col(l).sum() - sp.u * ma.entries(0, l);
          approx = std::max(approx, std::abs(r) / scale);
        }
      }
    }
    add("vertex_residual_target", target, 1e-11);
    add("vertex_residual_approx_delta", approx, 1e-10);
  }

  void quadrature_checks() {
    const auto neu = [](const KernelQuery& q) { return neumann_kernel(q); };
    std::vector<double> kappas{1.0};
    if (suite == Suite::Full) kappas.push_back(2.0);
    for (double kv : kappas) {
      const double exact = 1.0 / (4.0 * std::pow(kv, 4));
      const double got = hs_norm_sq_diff(kernels.dirichlet, neu, SpectralParameter(kv), 0.1).value;
      add("quadrature_dirichlet_neumann_kappa" + std::to_string(static_cast<int>(kv)), std::abs(got - exact) / exact,
          1e-8);
    }
  }

  // Counts non-decreasing steps of hs_sq_total over the grid.
  void sweep_check(const std::string& name, const VertexCoupling& c, SpectralParameter k,
                   const std::vector<double>& grid, const ScheduleConfig& cfg = {}) {
    const auto recs = convergence_sweep(c, k, grid, cfg);
    int bad = 0;
    for (std::size_t i = 1; i < recs.size(); ++i)
      if (!(recs[i].hs_sq_total < recs[i - 1].hs_sq_total)) ++bad;
    add(name + "_nonmonotone_steps", bad, 0.0);
    if (suite == Suite::Full) {
      const double slope = fit_rate(recs, &ConvergenceRecord::hs_sq_total).slope;
      add(name + "_slope_offset", std::abs(slope - 1.0), 0.2);
    }
  }

  void sweep_checks() {
    const SpectralParameter k1(1.0);
    if (suite == Suite::Fast) {
      sweep_check("sweep_delta_prime_s", from_family(family::DeltaPrimeS{1.0}, 3), k1, geometric_grid(1e-1, 1e-2, 4));
      return;
    }
    const auto grid = geometric_grid(1e-1, 1e-3, 9);
    sweep_check("sweep_delta_prime_s", from_family(family::DeltaPrimeS{1.0}, 3), k1, grid);
    sweep_check("sweep_delta_prime", from_family(family::DeltaPrime{2.0}, 3), k1, grid);
    sweep_check("sweep_delta_p", from_family(family::DeltaP{1.0}, 2), k1, grid);
    sweep_check("sweep_resonant", make_coupling(2, Complex(0.0, 1.0), Complex(0.0, -1.0)), SpectralParameter(2.0),
                grid);
  }
};

}  // namespace detail

inline std::vector<CheckResult> run_verification(Suite suite, const KernelSet& kernels = {}) {
  detail::Battery b{suite, kernels, {}};
  b.oracle_checks();
  b.jump_checks();
  b.residual_checks();
  b.quadrature_checks();
  b.sweep_checks();
  return b.results;
}

}  // namespace qgstar
