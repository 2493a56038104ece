// EPDiff(H^1) / Camassa-Holm in inverse-map (back-to-labels) variables on the
// periodic line. Variable order (u, l, pi, W); labels are stored as the
// displacement dl = l - x so the identity chart differentiates exactly and the
// periodic seam never enters l itself.
#pragma once

#include <cmath>
#include <numbers>

#include "msflow/grid.hpp"
#include "msflow/mslagrangian.hpp"

namespace msflow::epdiff {

using grid::ArrayX;
using grid::GridSpec;
using grid::MatrixX;
using grid::VectorX;

struct ChParams {
  double lambda = 1.0;  // H^1 length scale
  GridSpec grid;

  void validate() const {
    if (!(lambda > 0.0)) throw std::invalid_argument("ChParams: lambda must be > 0");
    grid.validate();
  }
};

// Fixed variable ordering shared with the integrator and diagnostics.
enum ChVar : int { kU = 0, kL = 1, kPi = 2, kW = 3 };
inline constexpr int kChNumVars = 4;

template <typename Scalar = double>
struct ChState {
  ArrayX<Scalar> u;
  ArrayX<Scalar> dl;  // label displacement, l = x + dl
  ArrayX<Scalar> pi;
  ArrayX<Scalar> W;
  ArrayX<Scalar> rho;  // optional advected density; size 0 when absent
  Scalar time = Scalar(0);

  bool has_rho() const { return rho.size() > 0; }

  void validate() const {
    const auto n = u.size();
    if (dl.size() != n || pi.size() != n || W.size() != n)
      throw std::invalid_argument("ChState: array length mismatch");
    if (has_rho() && rho.size() != n) throw std::invalid_argument("ChState: rho length mismatch");
    auto finite = [](const ArrayX<Scalar>& a) { return a.isFinite().all(); };
    if (!finite(u) || !finite(dl) || !finite(pi) || !finite(W) ||
        (has_rho() && !finite(rho)))
      throw std::invalid_argument("ChState: non-finite entry");
    if (has_rho() && (rho <= Scalar(0)).any())
      throw std::invalid_argument("ChState: rho must be positive");
  }
};

// Absolute labels l = x + dl.
template <typename Scalar>
ArrayX<Scalar> labels(const ChState<Scalar>& s, const GridSpec& g) {
  return g.template nodes<Scalar>() + s.dl;
}

// Discrete label slope l_x = 1 + central_diff(dl); exactly 1 on the identity
// chart.
template <typename Scalar>
ArrayX<Scalar> label_slope(const ChState<Scalar>& s, const GridSpec& g) {
  return Scalar(1) + grid::central_diff<Scalar>(s.dl, Scalar(g.dx()));
}

// Affine Lagrangian L = L^t_a z^a_{,t} + L^x_a z^a_{,x} - H with
//   L^t = (0, pi, 0, 0),  L^x = (lambda^2 W, pi u, 0, 0),
//   H   = -(u^2/2 - (lambda^2/2) W^2).
// Independent-variable order: alpha = 0 is t, alpha = 1 is x.
template <typename Scalar = double>
mslagrangian::AffineLagrangianSpec<Scalar> ch_lagrangian_spec(const ChParams& params) {
  const Scalar lam2 = Scalar(params.lambda) * Scalar(params.lambda);
  mslagrangian::AffineLagrangianSpec<Scalar> spec;
  spec.n_dep = kChNumVars;
  spec.n_indep = 2;
  spec.var_names = {"u", "l", "pi", "W"};
  spec.coeff = [lam2](const VectorX<Scalar>& z) {
    MatrixX<Scalar> L = MatrixX<Scalar>::Zero(2, kChNumVars);
    L(0, kL) = z[kPi];           // L^t_l = pi
    L(1, kU) = lam2 * z[kW];     // L^x_u = lambda^2 W
    L(1, kL) = z[kPi] * z[kU];   // L^x_l = pi u
    return L;
  };
  spec.coeff_grad = [lam2](const VectorX<Scalar>& z) {
    std::vector<MatrixX<Scalar>> G(2, MatrixX<Scalar>::Zero(kChNumVars, kChNumVars));
    G[0](kPi, kL) = Scalar(1);   // dL^t_l / dpi
    G[1](kW, kU) = lam2;         // dL^x_u / dW
    G[1](kU, kL) = z[kPi];       // dL^x_l / du
    G[1](kPi, kL) = z[kU];       // dL^x_l / dpi
    return G;
  };
  spec.hamiltonian = [lam2](const VectorX<Scalar>& z) {
    return -(Scalar(0.5) * z[kU] * z[kU] - Scalar(0.5) * lam2 * z[kW] * z[kW]);
  };
  spec.hamiltonian_grad = [lam2](const VectorX<Scalar>& z) {
    VectorX<Scalar> g = VectorX<Scalar>::Zero(kChNumVars);
    g[kU] = -z[kU];
    g[kW] = lam2 * z[kW];
    return g;
  };
  return spec;
}

// m = -pi * l_x (1D momentum map of the cotangent-lifted relabelling action).
template <typename Scalar>
ArrayX<Scalar> momentum_map(const ChState<Scalar>& s, const GridSpec& g) {
  return -s.pi * label_slope(s, g);
}

// Clebsch initialization: identity labels, W = u0_x, pi = -m so the momentum
// map reproduces m = (1 - lambda^2 D2) u0 exactly at t = 0.
template <typename Scalar>
ChState<Scalar> clebsch_init(const ArrayX<Scalar>& u0, const ChParams& params,
                             bool with_rho = false,
                             const ArrayX<Scalar>* rho0 = nullptr) {
  const Scalar dx = Scalar(params.grid.dx());
  ChState<Scalar> s;
  s.u = u0;
  s.dl = ArrayX<Scalar>::Zero(u0.size());
  s.W = grid::central_diff<Scalar>(u0, dx);
  s.pi = -grid::helmholtz_apply<Scalar>(u0, Scalar(params.lambda), dx);
  if (with_rho)
    s.rho = rho0 ? *rho0 : ArrayX<Scalar>::Constant(u0.size(), Scalar(1));
  s.validate();
  return s;
}

// Pointwise residual of m_t + u m_x + 2 m u_x = 0 (m = u - lambda^2 u_xx) on
// three consecutive velocity slices; centered differences throughout.
template <typename Scalar>
ArrayX<Scalar> ch_residual(const ArrayX<Scalar>& u_prev, const ArrayX<Scalar>& u_mid,
                           const ArrayX<Scalar>& u_next, const ChParams& params, Scalar dt) {
  const Scalar dx = Scalar(params.grid.dx());
  const Scalar lam = Scalar(params.lambda);
  const ArrayX<Scalar> m = grid::helmholtz_apply(u_mid, lam, dx);
  const ArrayX<Scalar> m_t =
      (grid::helmholtz_apply(u_next, lam, dx) - grid::helmholtz_apply(u_prev, lam, dx)) /
      (Scalar(2) * dt);
  return m_t + u_mid * grid::central_diff(m, dx) + Scalar(2) * m * grid::central_diff(u_mid, dx);
}

// Periodic distance on [0, L).
inline double periodic_distance(double x, double y, double length) {
  double d = std::fmod(std::abs(x - y), length);
  return std::min(d, length - d);
}

// Traveling-wave reference profile u0(x) = c exp(-d_per(x, x0)/lambda).
template <typename Scalar = double>
ArrayX<Scalar> peakon_initial(Scalar c, Scalar x0, const ChParams& params) {
  if (c == Scalar(0)) throw std::invalid_argument("peakon_initial: c must be nonzero");
  const auto x = params.grid.nodes<Scalar>();
  ArrayX<Scalar> u0(x.size());
  for (Eigen::Index j = 0; j < x.size(); ++j)
    u0[j] = c * std::exp(-periodic_distance(double(x[j]), double(x0), params.grid.length) /
                         double(params.lambda));
  return u0;
}

// Named initial velocity profiles used by the CLI and tests.
template <typename Scalar = double>
ArrayX<Scalar> initial_sine(Scalar amplitude, int wavenumber, const GridSpec& g) {
  const auto x = g.nodes<Scalar>();
  const Scalar k = Scalar(2) * Scalar(std::numbers::pi) * Scalar(wavenumber) / Scalar(g.length);
  return amplitude * (k * x).sin();
}

template <typename Scalar = double>
ArrayX<Scalar> initial_bump(Scalar amplitude, Scalar center, Scalar width, const GridSpec& g) {
  if (!(width > Scalar(0))) throw std::invalid_argument("initial_bump: width must be > 0");
  const auto x = g.nodes<Scalar>();
  ArrayX<Scalar> u0(x.size());
  for (Eigen::Index j = 0; j < x.size(); ++j) {
    const double d = periodic_distance(double(x[j]), double(center), g.length);
    u0[j] = amplitude * Scalar(std::exp(-(d * d) / double(width * width)));
  }
  return u0;
}

}  // namespace msflow::epdiff
