// qgstar: command-line front end for the star-graph coupling library.
//
// Exit codes: 0 success, 1 domain error (or invalid coupling / failed check),
// 2 malformed invocation.

#include <CLI11.hpp>
#include <json.hpp>

#include <charconv>
#include <cmath>
#include <fstream>
#include <iostream>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "qgstar/convergence.hpp"
#include "qgstar/coupling.hpp"
#include "qgstar/kernels.hpp"
#include "qgstar/schedule.hpp"
#include "qgstar/stargraph.hpp"
#include "qgstar/verify.hpp"

namespace {

using json = nlohmann::ordered_json;
using namespace qgstar;

constexpr int kMaxEdges = 64;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string fmt17(double x) {
  if (std::isnan(x)) return "nan";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, x, std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

std::string fmt_short(double x) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, x, std::chars_format::scientific, 3);
  return std::string(buf, res.ptr);
}

json complex_json(Complex z) { return json{{"re", z.real()}, {"im", z.imag()}}; }

json matrix_json(const Eigen::MatrixXcd& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(complex_json(m(i, j)));
    rows.push_back(std::move(row));
  }
  return rows;
}

void emit(const json& j) { std::cout << j.dump() << '\n'; }

// ---- coupling flags ----

struct CouplingFlags {
  std::optional<int> n;
  std::optional<double> a_re, a_im, b_re, b_im;
  std::optional<std::string> family;
  std::optional<double> alpha, beta;
  double tol = kDefaultTolUnitary;
};

void add_coupling_flags(CLI::App* app, CouplingFlags& f) {
  app->add_option("--n", f.n, "number of edges (2..64)");
  app->add_option("--a-re", f.a_re, "Re a");
  app->add_option("--a-im", f.a_im, "Im a");
  app->add_option("--b-re", f.b_re, "Re b");
  app->add_option("--b-im", f.b_im, "Im b");
  app->add_option("--family", f.family, "named family instead of (a, b)")
      ->check(CLI::IsMember({"delta", "delta_prime_s", "delta_prime", "delta_p"}));
  app->add_option("--alpha", f.alpha, "strength for delta / delta_p");
  app->add_option("--beta", f.beta, "strength for delta_prime_s / delta_prime");
  app->add_option("--tol", f.tol, "unitarity tolerance")->capture_default_str();
}

bool has_coupling(const CouplingFlags& f) { return f.family || f.a_re || f.a_im || f.b_re || f.b_im; }

int require_n(const CouplingFlags& f) {
  if (!f.n) throw UsageError("--n is required");
  if (*f.n > kMaxEdges) throw UsageError("--n is capped at " + std::to_string(kMaxEdges));
  if (*f.n < 2) throw Error(ErrorCode::BadEdgeCount, "edge count must be >= 2, got " + std::to_string(*f.n));
  return *f.n;
}

struct RawCoupling {
  Complex a, b;
};

RawCoupling require_raw(const CouplingFlags& f) {
  if (!f.a_re || !f.a_im || !f.b_re || !f.b_im)
    throw UsageError("coupling needs --a-re --a-im --b-re --b-im, or --family");
  return {{*f.a_re, *f.a_im}, {*f.b_re, *f.b_im}};
}

VertexCoupling build_coupling(const CouplingFlags& f) {
  const int n = require_n(f);
  if (f.family) {
    if (f.a_re || f.a_im || f.b_re || f.b_im) throw UsageError("--family cannot be combined with (a, b) flags");
    const std::string& name = *f.family;
    const bool uses_alpha = name == "delta" || name == "delta_p";
    const auto& strength = uses_alpha ? f.alpha : f.beta;
    if (!strength) throw UsageError("--family " + name + (uses_alpha ? " needs --alpha" : " needs --beta"));
    if (name == "delta") return from_family(family::Delta{*strength}, n);
    if (name == "delta_p") return from_family(family::DeltaP{*strength}, n);
    if (name == "delta_prime_s") return from_family(family::DeltaPrimeS{*strength}, n);
    return from_family(family::DeltaPrime{*strength}, n);
  }
  const RawCoupling r = require_raw(f);
  return make_coupling(n, r.a, r.b, f.tol);
}

// ---- schedule flags ----

struct ScheduleFlags {
  double zeta = 1.0;
  double nu = 3.0;
  std::optional<std::string> branch;
};

void add_schedule_flags(CLI::App* app, ScheduleFlags& s) {
  app->add_option("--zeta", s.zeta, "resonant numerator")->capture_default_str();
  app->add_option("--nu", s.nu, "resonant exponent")->capture_default_str();
  app->add_option("--branch", s.branch, "override the vertex-strength law")
      ->check(CLI::IsMember({"generic", "resonant", "delta_p"}));
}

ScheduleConfig to_config(const ScheduleFlags& s) {
  ScheduleConfig cfg;
  cfg.zeta = s.zeta;
  cfg.nu = s.nu;
  if (s.branch) {
    if (*s.branch == "generic") cfg.force_branch = Branch::Generic;
    else if (*s.branch == "resonant") cfg.force_branch = Branch::Resonant;
    else cfg.force_branch = Branch::DeltaP;
  }
  return cfg;
}

// ---- subcommands ----

int run_validate(const CouplingFlags& f) {
  const int n = require_n(f);
  if (f.family) {
    const VertexCoupling c = build_coupling(f);
    emit({{"status", "ok"}, {"valid", true}, {"class", class_tag(classify(c))}, {"violations", json::array()}});
    return 0;
  }
  const RawCoupling r = require_raw(f);
  const auto violations = check_coupling(n, r.a, r.b, f.tol);
  if (violations.empty()) {
    const VertexCoupling c = make_coupling(n, r.a, r.b, f.tol);
    emit({{"status", "ok"}, {"valid", true}, {"class", class_tag(classify(c))}, {"violations", json::array()}});
    return 0;
  }
  json list = json::array();
  for (const auto& v : violations) list.push_back({{"condition", v.condition}, {"defect", v.defect}});
  emit({{"status", "ok"}, {"valid", false}, {"class", nullptr}, {"violations", list}});
  return 1;
}

int run_schedule(const CouplingFlags& f, const ScheduleFlags& s, double d) {
  const VertexCoupling c = build_coupling(f);
  const ScheduleConfig cfg = to_config(s);
  const Branch natural = schedule_branch(c);
  const SchedulePoint sp = schedule_point(c, d, cfg);
  emit({{"status", "ok"},
        {"d", sp.d},
        {"u", sp.u},
        {"v", sp.v},
        {"branch", branch_tag(cfg.force_branch.value_or(natural))},
        {"class", class_tag(classify(c))}});
  return 0;
}

struct KernelFlags {
  std::string type;
  double kappa_re = 1.0, kappa_im = 0.0;
  double x = 0.0, y = 0.0;
  std::string side = "right";
  std::optional<double> u, v, d;
};

int run_kernel(const KernelFlags& k, const CouplingFlags& f, const ScheduleFlags& s) {
  const SpectralParameter kappa(Complex(k.kappa_re, k.kappa_im));
  const KernelQuery q(kappa, k.x, k.y, k.side == "left" ? Side::Left : Side::Right);
  const ScheduleConfig cfg = to_config(s);
  auto need_d = [&] {
    if (!k.d) throw UsageError("--type " + k.type + " needs --d");
    return *k.d;
  };
  // explicit (u, v) take precedence over a coupling's schedule
  auto schedule_for = [&](bool needs_u) {
    const double d = need_d();
    if (k.v && (!needs_u || k.u)) return SchedulePoint{d, k.u.value_or(0.0), *k.v};
    if (!has_coupling(f)) throw UsageError("--type " + k.type + " needs a coupling or explicit --u/--v");
    SchedulePoint sp = schedule_point(build_coupling(f), d, cfg);
    if (k.u) sp.u = *k.u;
    if (k.v) sp.v = *k.v;
    return sp;
  };

  json out{{"status", "ok"}, {"type", k.type}};
  auto put_scalar = [&](const KernelValue& kv) {
    out["g"] = complex_json(kv.g);
    out["dg_dx"] = complex_json(kv.dg_dx);
    out["underflow"] = kv.underflow;
  };
  auto put_matrix = [&](const MatrixKernelValue& mk) {
    out["g"] = matrix_json(mk.entries);
    out["dg_dx"] = matrix_json(mk.d_entries);
  };

  if (k.type == "dirichlet") {
    put_scalar(dirichlet_kernel(q));
  } else if (k.type == "target_complement") {
    put_scalar(target_complement_kernel(build_coupling(f).a(), q));
  } else if (k.type == "target_scalar") {
    const VertexCoupling c = build_coupling(f);
    put_scalar(target_scalar_kernel(c.a(), c.b(), c.n(), q));
  } else if (k.type == "delta_vertex") {
    if (!k.u) throw UsageError("--type delta_vertex needs --u");
    put_scalar(delta_vertex_kernel(*k.u, require_n(f), q));
  } else if (k.type == "approx_complement") {
    const SchedulePoint sp = schedule_for(false);
    out["d"] = sp.d;
    out["v"] = sp.v;
    put_scalar(approx_complement_kernel(sp, q));
  } else if (k.type == "approx_scalar") {
    const SchedulePoint sp = schedule_for(true);
    out["d"] = sp.d;
    out["u"] = sp.u;
    out["v"] = sp.v;
    put_scalar(approx_scalar_kernel(sp, require_n(f), q));
  } else if (k.type == "full_target") {
    put_matrix(full_target_kernel(build_coupling(f), q));
  } else {
    const VertexCoupling c = build_coupling(f);
    const SchedulePoint sp = schedule_point(c, need_d(), cfg);
    out["d"] = sp.d;
    out["u"] = sp.u;
    out["v"] = sp.v;
    put_matrix(full_approx_kernel(c, sp, q));
  }
  emit(out);
  return 0;
}

struct SweepFlags {
  double kappa_re = 1.0, kappa_im = 0.0;
  double d_start = 0.0, d_end = 0.0;
  int points = 0;
  std::string out;
  int panel_order = QuadratureConfig{}.panel_order;
};

int run_sweep(const SweepFlags& w, const CouplingFlags& f, const ScheduleFlags& s) {
  const VertexCoupling c = build_coupling(f);
  const SpectralParameter kappa(Complex(w.kappa_re, w.kappa_im));
  const auto grid = geometric_grid(w.d_start, w.d_end, w.points);
  QuadratureConfig qcfg;
  qcfg.panel_order = w.panel_order;
  const auto records = convergence_sweep(c, kappa, grid, to_config(s), qcfg);

  std::string csv = "d,u,v,hs_sq_scalar,hs_sq_complement,hs_sq_total,fit_slope_running\n";
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto& r = records[i];
    double running = std::numeric_limits<double>::quiet_NaN();
    if (i >= 3) {
      try {
        running = fit_rate(std::span(records).first(i + 1), &ConvergenceRecord::hs_sq_total).slope;
      } catch (const Error&) {
      }
    }
    for (double x : {r.d, r.u, r.v, r.hs_sq_scalar, r.hs_sq_complement, r.hs_sq_total}) csv += fmt17(x) + ',';
    csv += fmt17(running) + '\n';
  }

  if (w.out == "-") {
    std::cout << csv;
  } else {
    std::ofstream file(w.out, std::ios::binary);
    if (!file) throw UsageError("cannot open " + w.out + " for writing");
    file << csv;
    if (!file.flush()) throw UsageError("failed writing " + w.out);
  }

  try {
    const RateFit fit = fit_rate(records, &ConvergenceRecord::hs_sq_total);
    std::cerr << "rate_fit slope=" << fmt17(fit.slope) << " intercept=" << fmt17(fit.intercept)
              << " r_squared=" << fmt17(fit.r_squared) << '\n';
  } catch (const Error& e) {
    std::cerr << "rate_fit unavailable: " << e.what() << '\n';
  }
  return 0;
}

int run_verify(const std::string& suite, double tamper) {
  KernelSet kernels;
  if (tamper != 1.0) {
    kernels.dirichlet = [tamper](const KernelQuery& q) {
      KernelValue kv = dirichlet_kernel(q);
      kv.g *= tamper;
      kv.dg_dx *= tamper;
      return kv;
    };
  }
  const auto results = run_verification(suite == "full" ? Suite::Full : Suite::Fast, kernels);
  std::size_t passed = 0;
  for (const auto& r : results) {
    passed += r.pass();
    std::cout << (r.pass() ? "PASS " : "FAIL ") << r.name << ' ' << fmt_short(r.value) << ' '
              << fmt_short(r.tolerance) << '\n';
  }
  std::cout << "verify: " << passed << '/' << results.size() << " checks passed\n";
  return passed == results.size() ? 0 : 1;
}

int report(const Error& e) {
  std::cerr << e.what() << '\n';
  emit({{"status", "error"}, {"error", e.name()}, {"message", e.what()}});
  return e.code() == ErrorCode::BadEdgeCount ? 2 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Permutation-symmetric star-graph couplings and their singular approximations"};
  app.require_subcommand(1);

  CouplingFlags cf;
  ScheduleFlags sf;

  auto* validate = app.add_subcommand("validate", "check |a| = 1 and |a + n b| = 1 and classify");
  add_coupling_flags(validate, cf);

  double sched_d = 0.0;
  auto* schedule = app.add_subcommand("schedule", "vertex and edge strengths at distance d");
  add_coupling_flags(schedule, cf);
  add_schedule_flags(schedule, sf);
  schedule->add_option("--d", sched_d, "edge interaction distance")->required();

  KernelFlags kf;
  auto* kernel = app.add_subcommand("kernel", "evaluate one Green function and its x-derivative");
  kernel->add_option("--type", kf.type)
      ->required()
      ->check(CLI::IsMember({"dirichlet", "target_complement", "target_scalar", "delta_vertex", "approx_complement",
                             "approx_scalar", "full_target", "full_approx"}));
  kernel->add_option("--kappa-re", kf.kappa_re)->capture_default_str();
  kernel->add_option("--kappa-im", kf.kappa_im)->capture_default_str();
  kernel->add_option("--x", kf.x)->required();
  kernel->add_option("--y", kf.y)->required();
  kernel->add_option("--side", kf.side, "one-sided derivative at a kink")
      ->check(CLI::IsMember({"left", "right"}))
      ->capture_default_str();
  kernel->add_option("--u", kf.u, "vertex strength");
  kernel->add_option("--v", kf.v, "edge strength");
  kernel->add_option("--d", kf.d, "edge interaction distance");
  add_coupling_flags(kernel, cf);
  add_schedule_flags(kernel, sf);

  SweepFlags wf;
  auto* sweep = app.add_subcommand("sweep", "Hilbert-Schmidt distance to the target over a geometric d-grid (CSV)");
  add_coupling_flags(sweep, cf);
  add_schedule_flags(sweep, sf);
  sweep->add_option("--kappa-re", wf.kappa_re)->capture_default_str();
  sweep->add_option("--kappa-im", wf.kappa_im)->capture_default_str();
  sweep->add_option("--d-start", wf.d_start)->required();
  sweep->add_option("--d-end", wf.d_end)->required();
  sweep->add_option("--points", wf.points)->required();
  sweep->add_option("--out", wf.out, "CSV path, or - for stdout")->required();
  sweep->add_option("--panel-order", wf.panel_order)->capture_default_str();

  std::string suite;
  double tamper = 1.0;
  auto* verify = app.add_subcommand("verify", "run the invariant battery");
  verify->add_option("--suite", suite)->required()->check(CLI::IsMember({"fast", "full"}));
  verify->add_option("--tamper-dirichlet", tamper)->group("");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*validate) return run_validate(cf);
    if (*schedule) return run_schedule(cf, sf, sched_d);
    if (*kernel) return run_kernel(kf, cf, sf);
    if (*sweep) return run_sweep(wf, cf, sf);
    return run_verify(suite, tamper);
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return 2;
  } catch (const Error& e) {
    return report(e);
  }
}
