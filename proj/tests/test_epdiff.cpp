#include <doctest.h>

#include <cmath>
#include <numbers>

#include "msflow/epdiff.hpp"

using namespace msflow;
using grid::ArrayX;
using grid::VectorX;

namespace {
constexpr double kTwoPi = 2.0 * std::numbers::pi;

epdiff::ChParams make_params(int n, double dt = 0.01, double lambda = 1.0, double L = kTwoPi) {
  epdiff::ChParams p;
  p.lambda = lambda;
  p.grid = {n, L, dt};
  return p;
}
}  // namespace

TEST_CASE("ChParams and ChState validation") {
  auto p = make_params(64);
  CHECK_NOTHROW(p.validate());
  p.lambda = 0.0;
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);

  epdiff::ChState<double> s;
  s.u = ArrayX<double>::Zero(16);
  s.dl = ArrayX<double>::Zero(16);
  s.pi = ArrayX<double>::Zero(16);
  s.W = ArrayX<double>::Zero(16);
  CHECK(!s.has_rho());
  CHECK_NOTHROW(s.validate());
  s.rho = ArrayX<double>::Constant(16, 1.0);
  CHECK(s.has_rho());
  CHECK_NOTHROW(s.validate());
  s.rho[3] = -0.1;
  CHECK_THROWS_AS(s.validate(), std::invalid_argument);
  s.rho = ArrayX<double>::Constant(15, 1.0);
  CHECK_THROWS_AS(s.validate(), std::invalid_argument);
}

TEST_CASE("Hamiltonian and coefficient values at pinned states") {
  auto spec = epdiff::ch_lagrangian_spec<double>(make_params(64));
  VectorX<double> z(4);
  z << 1.0, 0.0, 0.0, 0.0;  // u = 1
  CHECK(spec.hamiltonian(z) == doctest::Approx(-0.5).epsilon(1e-15));
  z << 0.0, 0.0, 0.0, 1.0;  // W = 1, lambda = 1
  CHECK(spec.hamiltonian(z) == doctest::Approx(0.5).epsilon(1e-15));

  z << 2.0, 0.3, -1.5, 0.4;
  const auto L = spec.coeff(z);
  CHECK(L(0, epdiff::kL) == doctest::Approx(-1.5).epsilon(1e-15));        // L^t_l = pi
  CHECK(L(1, epdiff::kU) == doctest::Approx(0.4).epsilon(1e-15));         // lambda^2 W
  CHECK(L(1, epdiff::kL) == doctest::Approx(-3.0).epsilon(1e-15));        // pi u
  CHECK(L.cwiseAbs().sum() == doctest::Approx(1.5 + 0.4 + 3.0).epsilon(1e-15));
}

TEST_CASE("labels and label_slope on and off the identity chart") {
  auto p = make_params(128);
  const double dx = p.grid.dx();
  const auto x = p.grid.nodes<double>();
  epdiff::ChState<double> s;
  s.u = ArrayX<double>::Zero(128);
  s.pi = ArrayX<double>::Zero(128);
  s.W = ArrayX<double>::Zero(128);
  s.dl = ArrayX<double>::Zero(128);

  CHECK((epdiff::labels(s, p.grid) - x).abs().maxCoeff() == 0.0);
  CHECK((epdiff::label_slope(s, p.grid) - 1.0).abs().maxCoeff() == 0.0);

  s.dl = 0.1 * x.sin();
  const ArrayX<double> slope = epdiff::label_slope(s, p.grid);
  CHECK((slope - (1.0 + 0.1 * x.cos())).abs().maxCoeff() <= 0.1 * dx * dx / 6.0 * 1.1);
}

TEST_CASE("momentum_map: pinned values and exact Clebsch consistency") {
  auto p = make_params(128);
  const int n = p.grid.n_cells;
  epdiff::ChState<double> s;
  s.u = ArrayX<double>::Zero(n);
  s.W = ArrayX<double>::Zero(n);
  s.dl = ArrayX<double>::Zero(n);
  s.pi = ArrayX<double>::Constant(n, -0.7);
  // Identity chart: m = -pi exactly.
  CHECK((epdiff::momentum_map(s, p.grid) - 0.7).abs().maxCoeff() == 0.0);

  s.pi = ArrayX<double>::Zero(n);
  CHECK(epdiff::momentum_map(s, p.grid).abs().maxCoeff() == 0.0);

  const auto x = p.grid.nodes<double>();
  s.pi = ArrayX<double>::Constant(n, 1.0);
  s.dl = 0.1 * x.sin();
  const ArrayX<double> m = epdiff::momentum_map(s, p.grid);
  CHECK((m + (1.0 + 0.1 * x.cos())).abs().maxCoeff() <= 1e-3);
}

TEST_CASE("clebsch_init reproduces the Helmholtz momentum exactly") {
  auto p = make_params(256);
  const auto x = p.grid.nodes<double>();

  // Zero velocity: everything zero.
  const auto s0 = epdiff::clebsch_init<double>(ArrayX<double>::Zero(256), p);
  CHECK(s0.u.abs().maxCoeff() == 0.0);
  CHECK(s0.pi.abs().maxCoeff() == 0.0);
  CHECK(s0.W.abs().maxCoeff() == 0.0);
  CHECK(s0.dl.abs().maxCoeff() == 0.0);

  const ArrayX<double> u0 = x.sin();
  const auto s = epdiff::clebsch_init(u0, p);
  // lambda = 1: pi -> -(1 + lambda^2) sin = -2 sin in the continuum limit.
  const double dx = p.grid.dx();
  CHECK((s.pi + 2.0 * x.sin()).abs().maxCoeff() <= dx * dx / 12.0 * 1.3);
  // Bitwise: momentum map of the initialized state equals helmholtz_apply(u0).
  const ArrayX<double> m = epdiff::momentum_map(s, p.grid);
  const ArrayX<double> mh = grid::helmholtz_apply(u0, p.lambda, dx);
  CHECK((m - mh).abs().maxCoeff() == 0.0);

  // Optional density defaults to 1, or takes the supplied profile.
  const auto swith = epdiff::clebsch_init(u0, p, true);
  CHECK((swith.rho - 1.0).abs().maxCoeff() == 0.0);
  ArrayX<double> rho0 = 1.0 + 0.3 * x.sin();
  const auto sprof = epdiff::clebsch_init(u0, p, true, &rho0);
  CHECK((sprof.rho - rho0).abs().maxCoeff() == 0.0);
}

TEST_CASE("ch_residual vanishes identically on constant velocity") {
  auto p = make_params(64);
  const ArrayX<double> u = ArrayX<double>::Constant(64, 0.8);
  CHECK(epdiff::ch_residual(u, u, u, p, 0.01).abs().maxCoeff() == 0.0);
}

TEST_CASE("ch_residual on shifted peakon slices: small off crest, large at crest") {
  // Exact traveling peakon on a wide domain so the periodic tails are
  // negligible; the discrete residual concentrates in the crest cells.
  auto p = make_params(1024, 1e-3, 1.0, 20.0);
  const double c = 1.0, x0 = 10.0, dt = p.grid.dt;
  const auto slice = [&](double t) {
    return epdiff::peakon_initial<double>(c, x0 + c * t, p);
  };
  const ArrayX<double> r = epdiff::ch_residual(slice(-dt), slice(0.0), slice(dt), p, dt);
  const auto x = p.grid.nodes<double>();
  double crest = 0.0, off = 0.0;
  for (int j = 0; j < p.grid.n_cells; ++j) {
    const double d = epdiff::periodic_distance(x[j], x0, p.grid.length);
    if (d <= 3.0 * p.grid.dx())
      crest = std::max(crest, std::abs(r[j]));
    else
      off = std::max(off, std::abs(r[j]));
  }
  CHECK(crest >= 1.0);
  CHECK(off <= 0.01 * crest);
}

TEST_CASE("peakon_initial: crest value c, decay to c/e after one length scale") {
  // Grid chosen so both the crest and the point one lambda away are nodes.
  auto p = make_params(32, 0.01, 0.25, 8.0);  // dx = 0.25 = lambda
  const double c = 1.3, x0 = 2.0;
  const ArrayX<double> u0 = epdiff::peakon_initial(c, x0, p);
  const int j0 = 8;  // x = 2.0
  CHECK(u0[j0] == doctest::Approx(c).epsilon(1e-14));
  CHECK(u0[j0 + 1] == doctest::Approx(c / std::numbers::e).epsilon(1e-13));
  CHECK(u0[j0 - 1] == doctest::Approx(c / std::numbers::e).epsilon(1e-13));

  CHECK_THROWS_AS(epdiff::peakon_initial<double>(0.0, x0, p), std::invalid_argument);
}

TEST_CASE("peakon momentum concentrates at the crest") {
  auto p = make_params(512, 0.01, 0.25);
  const double x0 = std::numbers::pi;  // a node of the 512-cell grid
  const ArrayX<double> u0 = epdiff::peakon_initial(1.0, x0, p);
  const double dx = p.grid.dx();
  const ArrayX<double> m = grid::helmholtz_apply(u0, p.lambda, dx);
  const double total = grid::quadrature(m, dx);
  const auto x = p.grid.nodes<double>();
  double near = 0.0;
  for (int j = 0; j < 512; ++j)
    if (epdiff::periodic_distance(x[j], x0, p.grid.length) <= 3.0 * dx) near += m[j] * dx;
  CHECK(total > 0.0);
  CHECK(near / total >= 0.95);
}

TEST_CASE("named initial profiles") {
  auto p = make_params(64);
  const auto x = p.grid.nodes<double>();
  const ArrayX<double> s2 = epdiff::initial_sine<double>(0.5, 2, p.grid);
  CHECK((s2 - 0.5 * (2.0 * x).sin()).abs().maxCoeff() <= 1e-15);

  const ArrayX<double> b = epdiff::initial_bump<double>(1.2, std::numbers::pi, 0.5, p.grid);
  CHECK(b.maxCoeff() == doctest::Approx(1.2).epsilon(1e-12));
  CHECK(b.minCoeff() >= 0.0);
  CHECK_THROWS_AS(epdiff::initial_bump<double>(1.0, 0.0, 0.0, p.grid), std::invalid_argument);

  CHECK(epdiff::periodic_distance(0.1, kTwoPi - 0.1, kTwoPi) == doctest::Approx(0.2).epsilon(1e-12));
}
