// Pinned verification scenarios shared by `msflow verify` and the acceptance
// suite: each returns a list of named checks with the measured value and the
// pass band.
#pragma once

#include <limits>
#include <random>

#include "msflow/diagnostics.hpp"
#include "msflow/euler_check.hpp"
#include "msflow/remap.hpp"
#include "msflow/run.hpp"

namespace msflow::verify {

struct CheckResult {
  std::string name;
  double value = 0.0;
  double lo = -std::numeric_limits<double>::infinity();
  double hi = std::numeric_limits<double>::infinity();
  bool pass = false;
};

inline CheckResult check_le(const std::string& name, double value, double hi) {
  return {name, value, -std::numeric_limits<double>::infinity(), hi, value <= hi};
}
inline CheckResult check_range(const std::string& name, double value, double lo, double hi) {
  return {name, value, lo, hi, lo <= value && value <= hi};
}

inline bool all_pass(const std::vector<CheckResult>& checks) {
  for (const auto& c : checks)
    if (!c.pass) return false;
  return true;
}

namespace detail {

inline epdiff::ChParams ch_params(int n, double dt, double lambda = 1.0) {
  epdiff::ChParams p;
  p.lambda = lambda;
  p.grid = {n, 2.0 * std::numbers::pi, dt};
  return p;
}

inline grid::MatrixX<double> random_tangent(int n, int m, std::mt19937& rng) {
  std::normal_distribution<double> nd;
  grid::MatrixX<double> d(n, m);
  for (int j = 0; j < n; ++j)
    for (int a = 0; a < m; ++a) d(j, a) = nd(rng);
  return d;
}

}  // namespace detail

// Criterion: CH structure matrices are exactly antisymmetric and the
// two-forms are closed (cyclic identity <= 1e-6 on 100 random states, h=1e-4).
inline std::vector<CheckResult> verify_structure() {
  const auto p = detail::ch_params(64, 0.01);
  const auto spec = epdiff::ch_lagrangian_spec<double>(p);

  bool gradients_ok = true;
  try {
    mslagrangian::validate_spec(spec);
  } catch (const std::exception&) {
    gradients_ok = false;
  }

  std::mt19937 rng(2024);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  std::vector<grid::VectorX<double>> samples;
  double antisym = 0.0;
  for (int s = 0; s < 100; ++s) {
    grid::VectorX<double> z(4);
    for (int i = 0; i < 4; ++i) z[i] = dist(rng);
    samples.push_back(z);
    const auto K = mslagrangian::assemble_structure_matrix(spec, z);
    for (const auto& k : K.k)
      antisym = std::max(antisym, (k + k.transpose()).cwiseAbs().maxCoeff());
  }
  const double closedness = mslagrangian::check_closedness(spec, samples, 1e-4);

  return {check_le("coefficient gradients match finite differences", gradients_ok ? 0.0 : 1.0, 0.5),
          check_le("structure matrix antisymmetry max |K + K^T|", antisym, 1e-15),
          check_le("closedness cyclic identity (100 states, h=1e-4)", closedness, 1e-6)};
}

// Criterion: exact discrete two-form balance. n=64, dt=0.01, lambda=1,
// u0 = 0.2 sin x, two random tangent trajectories, 100 steps; max per-node
// residual <= 1e-10.
inline std::vector<CheckResult> verify_symplecticity() {
  const auto p = detail::ch_params(64, 0.01);
  auto u0 = epdiff::initial_sine<double>(0.2, 1, p.grid);
  auto s = epdiff::clebsch_init(u0, p);
  run::ChSimulation<double> sim(p, {});
  auto& eng = sim.engine();
  auto z = run::ChSimulation<double>::pack(s);
  std::mt19937 rng(7);
  auto d1 = detail::random_tangent(p.grid.n_cells, epdiff::kChNumVars, rng);
  auto d2 = detail::random_tangent(p.grid.n_cells, epdiff::kChNumVars, rng);

  double maxres = 0.0, max_tangent = 0.0;
  for (int k = 0; k < 100; ++k) {
    const auto zn = eng.step(z, p.grid.dt);
    const auto d1n = eng.tangent_step(z, zn, d1, p.grid.dt);
    const auto d2n = eng.tangent_step(z, zn, d2, p.grid.dt);
    const auto r = eng.symplecticity_residual(z, zn, d1, d1n, d2, d2n, p.grid.dt);
    maxres = std::max(maxres, r.abs().maxCoeff());
    z = zn;
    d1 = d1n;
    d2 = d2n;
    max_tangent = std::max(max_tangent, d1.cwiseAbs().maxCoeff());
  }
  return {check_le("max per-node two-form residual (100 steps)", maxres, 1e-10),
          check_le("tangent field stays bounded", max_tangent, 1e3)};
}

// Criterion: exact discrete Noether invariants over 10^3 steps at n=128,
// dt=1e-2: integral(pi), integral(m), and the seam-corrected affine
// relabelling invariant integral(pi (l + 1/2)), each drifting <= 1e-10.
inline std::vector<CheckResult> verify_noether() {
  const auto p = detail::ch_params(128, 1e-2);
  const double dx = p.grid.dx();
  auto u0 = epdiff::initial_sine<double>(0.2, 1, p.grid);
  auto s = epdiff::clebsch_init(u0, p);
  run::ChSimulation<double> sim(p, {});

  const auto invariants = [&](const epdiff::ChState<double>& st) {
    const auto l = epdiff::labels(st, p.grid);
    const auto m = epdiff::momentum_map(st, p.grid);
    return Eigen::Array3d{grid::quadrature<double>(st.pi, dx), grid::quadrature<double>(m, dx),
                          grid::quadrature<double>(st.pi * (l + 0.5), dx)};
  };
  const Eigen::Array3d I0 = invariants(s);
  Eigen::Array3d worst = Eigen::Array3d::Zero();
  run::RunOptions opts;
  opts.n_steps = 1000;
  opts.enable_remap = false;
  sim.run(s, opts, [&](int, const run::StepRecord<double>& rec) {
    Eigen::Array3d I = invariants(rec.state);
    I[2] += sim.seam_correction();  // affine part l picks up the seam flux
    worst = worst.max((I - I0).abs());
  });
  return {check_le("drift of integral(pi) over 1000 steps", worst[0], 1e-10),
          check_le("drift of integral(m) over 1000 steps", worst[1], 1e-10),
          check_le("drift of corrected affine invariant over 1000 steps", worst[2], 1e-10)};
}

// Criterion: the 2D vorticity law is the antisymmetrized derivative of the
// momentum law as an identity on arbitrary smooth fields: the two evaluations
// agree with log-log slope 2 +/- 0.1 over h in {1e-2, 5e-3, 2.5e-3}.
inline std::vector<CheckResult> verify_vorticity_identity() {
  diagnostics::Fields2D f;
  f.lambda = 0.8;
  f.u[0] = [](double x, double y, double t) {
    return std::sin(x + 0.3 * y + 0.2 * t) + 0.1 * std::cos(2.0 * y - 0.5 * t);
  };
  f.u[1] = [](double x, double y, double t) {
    return std::cos(0.7 * x - y) + 0.2 * std::sin(x + t);
  };
  f.m[0] = [](double x, double y, double t) {
    return std::cos(x - y + 0.1 * t) + 0.3 * std::sin(2.0 * x + y);
  };
  f.m[1] = [](double x, double y, double t) {
    return std::sin(0.5 * x + y - 0.3 * t) + 0.2 * std::cos(x - 2.0 * y);
  };
  const std::vector<std::array<double, 3>> pts = {
      {0.3, -0.4, 0.1}, {1.1, 0.7, 0.0}, {-0.6, 0.2, 0.5}};
  const std::vector<double> hs = {1e-2, 5e-3, 2.5e-3};
  std::vector<double> errs;
  for (double h : hs) {
    double worst = 0.0;
    for (const auto& q : pts) {
      const double v = diagnostics::vorticity_residual_2d(f, q[0], q[1], q[2], h);
      const double c = diagnostics::momentum_residual_curl(f, q[0], q[1], q[2], h);
      worst = std::max(worst, std::abs(v - c));
    }
    errs.push_back(worst);
  }
  const double slope = diagnostics::fit_loglog_slope(hs, errs);
  return {check_range("vorticity identity convergence order in h", slope, 1.9, 2.1),
          check_le("vorticity identity mismatch at h=2.5e-3", errs.back(), 1e-3)};
}

// Criterion: the Euler Clebsch structure. Orders 2 +/- 0.1 for the
// variational and elimination residuals on manufactured fields, plus the
// circulation identity for rigid rotation.
inline std::vector<CheckResult> verify_euler() {
  std::vector<CheckResult> out;
  const std::vector<double> hs = {1e-2, 5e-3, 2.5e-3};
  const std::vector<std::array<double, 3>> pts = {
      {0.4, 0.2, 0.3}, {-0.5, 0.6, 0.7}, {0.8, -0.3, 1.1}};

  {  // rigid rotation: full variational system
    const auto f = euler_check::rigid_rotation_fields(0.7);
    std::vector<double> errs;
    for (double h : hs) {
      double worst = 0.0;
      for (const auto& q : pts)
        worst = std::max(worst,
                         euler_check::euler_el_residual(f, q[0], q[1], q[2], h)
                             .cwiseAbs()
                             .maxCoeff());
      errs.push_back(worst);
    }
    out.push_back(check_range("rigid rotation EL residual order in h",
                              diagnostics::fit_loglog_slope(hs, errs), 1.9, 2.1));
    out.push_back(check_le("rigid rotation Euler (eliminated) residual",
                           euler_check::euler_elimination_residual(f.u, f.p, 0.4, 0.2, 0.3, 1e-3)
                               .cwiseAbs()
                               .maxCoeff(),
                           1e-10));
  }

  {  // Taylor-Green: eliminated Euler equations
    std::array<diagnostics::ScalarField2D, 2> u;
    diagnostics::ScalarField2D p;
    euler_check::taylor_green_fields(u, p);
    std::vector<double> errs;
    for (double h : hs) {
      double worst = 0.0;
      for (const auto& q : pts)
        worst = std::max(
            worst, euler_check::euler_elimination_residual(u, p, q[0], q[1], q[2], h)
                       .cwiseAbs()
                       .maxCoeff());
      errs.push_back(worst);
    }
    out.push_back(check_range("Taylor-Green elimination residual order in h",
                              diagnostics::fit_loglog_slope(hs, errs), 1.9, 2.1));
  }

  {  // circulation identity for rigid rotation around a centered circle
    const auto f = euler_check::rigid_rotation_fields(0.7);
    euler_check::Loop loop = [](double s) {
      const double th = 2.0 * std::numbers::pi * s;
      return Eigen::Vector2d(0.8 * std::cos(th), 0.8 * std::sin(th));
    };
    const double r1 = std::abs(euler_check::circulation_identity_residual(f, loop, 0.2, 1e-4, 1e-2));
    const double r2 = std::abs(euler_check::circulation_identity_residual(f, loop, 0.2, 1e-4, 5e-3));
    out.push_back(check_le("rigid rotation circulation drift rate (dt=1e-2)", r1, 1e-3));
    // For rigid rotation the leading RK2 loop-advection error is tangential
    // (a phase shift), so the circulation residual decays at third order; the
    // requirement is "at least second order", i.e. ratio >= ~4.
    out.push_back(check_range("circulation drift reduction under dt halving", r1 / r2, 3.4,
                              std::numeric_limits<double>::infinity()));
  }
  return out;
}

// Criterion: momentum-preserving remap on random admissible states.
inline std::vector<CheckResult> verify_remap() {
  const auto p = detail::ch_params(96, 0.01);
  std::mt19937 rng(11);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  double rel = 0.0, metric_dev = 0.0;
  for (int s = 0; s < 100; ++s) {
    const int n = p.grid.n_cells;
    epdiff::ChState<double> st;
    st.u.resize(n);
    st.dl.resize(n);
    st.pi.resize(n);
    st.W.resize(n);
    const auto x = p.grid.nodes<double>();
    const double a = 0.3 * dist(rng), ph = std::numbers::pi * dist(rng);
    for (int j = 0; j < n; ++j) {
      st.u[j] = dist(rng);
      st.dl[j] = a * std::sin(x[j] + ph);  // admissible: slope bounded away from 0
      st.pi[j] = dist(rng);
      st.W[j] = dist(rng);
    }
    const auto m_before = epdiff::momentum_map(st, p.grid);
    const auto fresh = remap::remap_to_identity(st, p.grid);
    const auto m_after = epdiff::momentum_map(fresh, p.grid);
    const double scale = std::max(1e-30, m_before.abs().maxCoeff());
    rel = std::max(rel, (m_after - m_before).abs().maxCoeff() / scale);
    metric_dev = std::max(metric_dev,
                          std::abs(remap::tangling_metric(fresh, p.grid) - 1.0));
  }
  return {check_le("relative momentum-map change across remap (100 states)", rel, 1e-14),
          check_le("post-remap tangling metric deviation from 1", metric_dev, 0.0)};
}

// Refinement ladder shared by the convergence criteria: n in {64, 128, 256},
// dt = dx/4 rounded so n_steps * dt = 1 exactly, u0 = 0.2 sin x,
// rho0 = 1 + 0.3 sin x, lambda = 1.
struct ConvergenceData {
  std::vector<double> dxs;
  std::vector<double> sin_relabel_drift;
  std::vector<double> energy_drift;
  std::vector<double> circulation_drift;
  std::vector<double> ch_residual_max;
};

inline ConvergenceData run_convergence_ladder() {
  ConvergenceData data;
  for (int n : {64, 128, 256}) {
    const double dx = 2.0 * std::numbers::pi / n;
    const int steps = static_cast<int>(std::ceil(1.0 / (0.25 * dx)));
    const double dt = 1.0 / steps;
    auto p = detail::ch_params(n, dt);
    const auto x = p.grid.nodes<double>();
    auto u0 = epdiff::initial_sine<double>(0.2, 1, p.grid);
    grid::ArrayX<double> rho0 = 1.0 + 0.3 * x.sin();
    auto s = epdiff::clebsch_init(u0, p, true, &rho0);
    run::ChSimulation<double> sim(p, {});

    const auto xi = diagnostics::make_xi("sin:1", p.grid.length);
    const double I0 = diagnostics::relabelling_invariant<double>(s, p.grid, xi);
    const double C0 = diagnostics::circulation(s, p);
    const auto energy_total = [&](const epdiff::ChState<double>& st) {
      grid::ArrayX<double> zero = grid::ArrayX<double>::Zero(n);
      auto [density, flux] = diagnostics::energy_density_and_flux(st, zero, p);
      return grid::quadrature(density, dx);
    };
    const double E0 = energy_total(s);

    std::vector<grid::ArrayX<double>> u_levels;
    u_levels.reserve(static_cast<std::size_t>(steps) + 1);
    epdiff::ChState<double> final_state;
    run::RunOptions opts;
    opts.n_steps = steps;
    opts.enable_remap = false;
    sim.run(s, opts, [&](int k, const run::StepRecord<double>& rec) {
      u_levels.push_back(rec.state.u);
      if (k == steps) final_state = rec.state;
    });

    double ch_max = 0.0;
    for (int k = 1; k + 1 <= steps; ++k) {
      const auto r = epdiff::ch_residual(u_levels[static_cast<std::size_t>(k - 1)],
                                         u_levels[static_cast<std::size_t>(k)],
                                         u_levels[static_cast<std::size_t>(k + 1)], p, dt);
      ch_max = std::max(ch_max, r.abs().maxCoeff());
    }

    data.dxs.push_back(dx);
    data.sin_relabel_drift.push_back(
        std::abs(diagnostics::relabelling_invariant<double>(final_state, p.grid, xi) - I0));
    data.energy_drift.push_back(std::abs(energy_total(final_state) - E0));
    data.circulation_drift.push_back(std::abs(diagnostics::circulation(final_state, p) - C0));
    data.ch_residual_max.push_back(ch_max);
  }
  return data;
}

// Criteria: nonlinear relabelling, elimination to CH, energy, and circulation
// all refine at second order on the ladder.
inline std::vector<CheckResult> verify_convergence() {
  const ConvergenceData d = run_convergence_ladder();
  std::vector<CheckResult> out;
  out.push_back(check_range("sin-relabelling invariant drift order",
                            diagnostics::fit_loglog_slope(d.dxs, d.sin_relabel_drift), 1.7, 2.3));
  out.push_back(check_range("CH equation residual order (elimination)",
                            diagnostics::fit_loglog_slope(d.dxs, d.ch_residual_max), 1.7, 2.3));
  out.push_back(check_range("energy drift reduction 64 -> 128",
                            d.energy_drift[0] / d.energy_drift[1], 2.8, 5.2));
  out.push_back(check_range("energy drift reduction 128 -> 256",
                            d.energy_drift[1] / d.energy_drift[2], 2.8, 5.2));
  out.push_back(check_range("circulation drift order",
                            diagnostics::fit_loglog_slope(d.dxs, d.circulation_drift), 1.7, 2.3));
  return out;
}

}  // namespace msflow::verify
