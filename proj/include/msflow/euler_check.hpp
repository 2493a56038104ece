// Verification of the incompressible-Euler multisymplectic structure on
// closed-form 2D fields: the six variational equations of the Clebsch
// Lagrangian L = rho u^2/2 + p(1 - rho) + pi_k(l_{k,t} + u_i l_{k,i})
// + phi(rho_t + (rho u_i)_{,i}), elimination to the Euler equations, and the
// advected-quantity circulation identity. All derivatives are central
// differences of the supplied evaluators; no grid module involved.
#pragma once

#include <array>
#include <functional>

#include <Eigen/Dense>

#include "msflow/diagnostics.hpp"

namespace msflow::euler_check {

using diagnostics::ScalarField2D;

struct EulerFields {
  std::array<ScalarField2D, 2> u;
  ScalarField2D rho;
  ScalarField2D p;
  std::array<ScalarField2D, 2> l;
  std::array<ScalarField2D, 2> pi;
  ScalarField2D phi;
};

namespace detail {
using diagnostics::detail::deriv;
}

// Residual rows, in order:
//   [0..1] delta u_i : rho u_i + pi_k l_{k,i} - rho phi_{,i}
//   [2]    delta rho : u^2/2 - p - phi_{,t} - u_i phi_{,i}
//   [3..4] delta l_k : pi_{k,t} + (u_i pi_k)_{,i}
//   [5..6] delta pi_k: l_{k,t} + u_i l_{k,i}
//   [7]    delta phi : rho_{,t} + (rho u_i)_{,i}
//   [8]    delta p   : 1 - rho
// All vanish on solutions of the Euler Clebsch system.
inline Eigen::VectorXd euler_el_residual(const EulerFields& f, double x, double y, double t,
                                         double h) {
  Eigen::VectorXd r(9);
  const double rho = f.rho(x, y, t);

  for (int i = 0; i < 2; ++i) {
    double v = rho * f.u[i](x, y, t) - rho * detail::deriv(f.phi, i, h)(x, y, t);
    for (int k = 0; k < 2; ++k)
      v += f.pi[k](x, y, t) * detail::deriv(f.l[k], i, h)(x, y, t);
    r[i] = v;
  }

  {
    double v = -f.p(x, y, t) - detail::deriv(f.phi, 2, h)(x, y, t);
    for (int i = 0; i < 2; ++i) {
      const double ui = f.u[i](x, y, t);
      v += 0.5 * ui * ui - ui * detail::deriv(f.phi, i, h)(x, y, t);
    }
    r[2] = v;
  }

  for (int k = 0; k < 2; ++k) {
    double v = detail::deriv(f.pi[k], 2, h)(x, y, t);
    for (int i = 0; i < 2; ++i) {
      ScalarField2D uipk = [&f, i, k](double a, double b, double c) {
        return f.u[i](a, b, c) * f.pi[k](a, b, c);
      };
      v += detail::deriv(uipk, i, h)(x, y, t);
    }
    r[3 + k] = v;
  }

  for (int k = 0; k < 2; ++k) {
    double v = detail::deriv(f.l[k], 2, h)(x, y, t);
    for (int i = 0; i < 2; ++i)
      v += f.u[i](x, y, t) * detail::deriv(f.l[k], i, h)(x, y, t);
    r[5 + k] = v;
  }

  {
    double v = detail::deriv(f.rho, 2, h)(x, y, t);
    for (int i = 0; i < 2; ++i) {
      ScalarField2D rui = [&f, i](double a, double b, double c) {
        return f.rho(a, b, c) * f.u[i](a, b, c);
      };
      v += detail::deriv(rui, i, h)(x, y, t);
    }
    r[7] = v;
  }

  r[8] = 1.0 - rho;
  return r;
}

// The paper's momentum map m = -pi_k grad(l_k) - phi<>rho with the density
// diamond phi<>rho = -rho grad(phi); the delta-u row above is rho u_i - m_i.
inline Eigen::Vector2d euler_momentum_map(const EulerFields& f, double x, double y, double t,
                                          double h) {
  Eigen::Vector2d m;
  for (int i = 0; i < 2; ++i) {
    double v = f.rho(x, y, t) * detail::deriv(f.phi, i, h)(x, y, t);
    for (int k = 0; k < 2; ++k)
      v -= f.pi[k](x, y, t) * detail::deriv(f.l[k], i, h)(x, y, t);
    m[i] = v;
  }
  return m;
}

// Finite-difference residual of the incompressible Euler equations:
// rows [0..1] = u_{i,t} + u_j u_{i,j} + p_{,i}, row [2] = div u.
inline Eigen::Vector3d euler_elimination_residual(const std::array<ScalarField2D, 2>& u,
                                                  const ScalarField2D& p, double x, double y,
                                                  double t, double h) {
  Eigen::Vector3d r;
  for (int i = 0; i < 2; ++i) {
    double v = detail::deriv(u[i], 2, h)(x, y, t) + detail::deriv(p, i, h)(x, y, t);
    for (int j = 0; j < 2; ++j)
      v += u[j](x, y, t) * detail::deriv(u[i], j, h)(x, y, t);
    r[i] = v;
  }
  r[2] = detail::deriv(u[0], 0, h)(x, y, t) + detail::deriv(u[1], 1, h)(x, y, t);
  return r;
}

// Closed parameterized loop s in [0,1) -> (x, y).
using Loop = std::function<Eigen::Vector2d(double)>;

// Trapezoid line integral of a vector field around a closed loop.
inline double loop_integral(const std::function<Eigen::Vector2d(double, double)>& field,
                            const Loop& loop, int n_points = 256) {
  double total = 0.0;
  for (int k = 0; k < n_points; ++k) {
    const double s = double(k) / n_points;
    const double sp = double((k + 1) % n_points) / n_points;
    const double sm = double((k + n_points - 1) % n_points) / n_points;
    const Eigen::Vector2d x = loop(s);
    const Eigen::Vector2d dx = 0.5 * (loop(sp) - loop(sm));
    total += field(x[0], x[1]).dot(dx);
  }
  return total;
}

// Kelvin circulation identity: advects the loop by one midpoint (RK2) step of
// size delta_t in the prescribed flow and returns
// [circulation(t + delta_t, advected loop) - circulation(t, loop)] / delta_t,
// where circulation = loop integral of m/rho. Zero at O(h^2 + delta_t^2) on
// solutions.
inline double circulation_identity_residual(const EulerFields& f, const Loop& loop, double t,
                                            double h, double delta_t, int n_points = 256) {
  auto m_over_rho = [&](double tt) {
    return [&f, tt, h](double x, double y) -> Eigen::Vector2d {
      return euler_momentum_map(f, x, y, tt, h) / f.rho(x, y, tt);
    };
  };
  const double before = loop_integral(m_over_rho(t), loop, n_points);

  std::vector<Eigen::Vector2d> moved(static_cast<std::size_t>(n_points));
  for (int k = 0; k < n_points; ++k) {
    const Eigen::Vector2d x0 = loop(double(k) / n_points);
    auto vel = [&f](const Eigen::Vector2d& x, double tt) {
      return Eigen::Vector2d(f.u[0](x[0], x[1], tt), f.u[1](x[0], x[1], tt));
    };
    const Eigen::Vector2d xm = x0 + 0.5 * delta_t * vel(x0, t);
    moved[static_cast<std::size_t>(k)] = x0 + delta_t * vel(xm, t + 0.5 * delta_t);
  }
  Loop advected = [&moved, n_points](double s) {
    // evaluated only at the same n_points parameter values
    const int k = static_cast<int>(std::lround(s * n_points)) % n_points;
    return moved[static_cast<std::size_t>(k)];
  };
  const double after = loop_integral(m_over_rho(t + delta_t), advected, n_points);
  return (after - before) / delta_t;
}

// --- manufactured fields -----------------------------------------------

// Rigid rotation u = Omega(-y, x) with rotated labels l = R(-Omega t) x,
// pi = -R(-Omega t) u, phi = 0, p = Omega^2 r^2 / 2, rho = 1: an exact
// solution of the Euler Clebsch system.
inline EulerFields rigid_rotation_fields(double omega) {
  EulerFields f;
  f.u[0] = [omega](double, double y, double) { return -omega * y; };
  f.u[1] = [omega](double x, double, double) { return omega * x; };
  f.rho = [](double, double, double) { return 1.0; };
  f.p = [omega](double x, double y, double) { return 0.5 * omega * omega * (x * x + y * y); };
  f.l[0] = [omega](double x, double y, double t) {
    return std::cos(omega * t) * x + std::sin(omega * t) * y;
  };
  f.l[1] = [omega](double x, double y, double t) {
    return -std::sin(omega * t) * x + std::cos(omega * t) * y;
  };
  // pi = -R(-Omega t) u with u = Omega(-y, x)
  f.pi[0] = [omega](double x, double y, double t) {
    return -(std::cos(omega * t) * (-omega * y) + std::sin(omega * t) * (omega * x));
  };
  f.pi[1] = [omega](double x, double y, double t) {
    return -(-std::sin(omega * t) * (-omega * y) + std::cos(omega * t) * (omega * x));
  };
  f.phi = [](double, double, double) { return 0.0; };
  return f;
}

// Steady Taylor-Green velocity/pressure pair (exact steady Euler solution);
// used for the elimination residual only.
inline void taylor_green_fields(std::array<ScalarField2D, 2>& u, ScalarField2D& p) {
  u[0] = [](double x, double y, double) { return std::sin(x) * std::cos(y); };
  u[1] = [](double x, double y, double) { return -std::cos(x) * std::sin(y); };
  p = [](double x, double y, double) { return 0.25 * (std::cos(2 * x) + std::cos(2 * y)); };
}

inline EulerFields rest_state_fields(double pressure = 1.0) {
  EulerFields f;
  f.u[0] = f.u[1] = [](double, double, double) { return 0.0; };
  f.rho = [](double, double, double) { return 1.0; };
  f.p = [pressure](double, double, double) { return pressure; };
  f.l[0] = [](double x, double, double) { return x; };
  f.l[1] = [](double, double y, double) { return y; };
  f.pi[0] = f.pi[1] = [](double, double, double) { return 0.0; };
  f.phi = [](double, double, double) { return 0.0; };
  return f;
}

}  // namespace msflow::euler_check
