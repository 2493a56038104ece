// Conservation-law diagnostics: energy and momentum density/flux pairs,
// relabelling invariants, circulation, time-series bookkeeping, and the 2D
// vorticity-law identity evaluated on closed-form fields.
#pragma once

#include <array>
#include <functional>
#include <utility>

#include "msflow/epdiff.hpp"

namespace msflow::diagnostics {

using epdiff::ChParams;
using epdiff::ChState;
using grid::ArrayX;
using grid::GridSpec;

struct MissingDensity : std::runtime_error {
  MissingDensity() : std::runtime_error("circulation requires a rho field") {}
};
struct NonpositiveDensity : std::runtime_error {
  NonpositiveDensity() : std::runtime_error("circulation requires rho > 0 everywhere") {}
};

enum class ExpectedBehavior { conserved_exact, conserved_to_order, residual_to_zero };

struct DiagnosticSeries {
  std::string name;
  std::vector<double> times;
  std::vector<double> values;
  ExpectedBehavior expected = ExpectedBehavior::conserved_to_order;

  void push(double t, double v) {
    if (!times.empty() && t <= times.back())
      throw std::invalid_argument("DiagnosticSeries: times must be strictly increasing");
    times.push_back(t);
    values.push_back(v);
  }
  double max_drift() const {
    if (values.empty()) return 0.0;
    double d = 0.0;
    for (double v : values) d = std::max(d, std::abs(v - values.front()));
    return d;
  }
};

// Energy law pair: density = u m - u^2/2 - (lambda^2/2) u_x^2,
// flux = lambda^2 u_x u_t + u^2 m. Divergence vanishes on solutions.
template <typename Scalar>
std::pair<ArrayX<Scalar>, ArrayX<Scalar>> energy_density_and_flux(const ChState<Scalar>& s,
                                                                  const ArrayX<Scalar>& u_t,
                                                                  const ChParams& p) {
  const Scalar dx = Scalar(p.grid.dx());
  const Scalar lam2 = Scalar(p.lambda) * Scalar(p.lambda);
  const ArrayX<Scalar> m = epdiff::momentum_map(s, p.grid);
  const ArrayX<Scalar> ux = grid::central_diff(s.u, dx);
  ArrayX<Scalar> density = s.u * m - Scalar(0.5) * s.u.square() - Scalar(0.5) * lam2 * ux.square();
  ArrayX<Scalar> flux = lam2 * ux * u_t + s.u.square() * m;
  return {std::move(density), std::move(flux)};
}

// Momentum law pair: density = m, flux = u m + u^2/2 - (lambda^2/2) u_x^2.
// (This flux sign makes m_t + flux_x the conservation form of the 1D CH
// equation, and its antisymmetrized derivative reproduces the vorticity
// identity below; see vorticity_residual_2d.)
template <typename Scalar>
std::pair<ArrayX<Scalar>, ArrayX<Scalar>> momentum_density_and_flux(const ChState<Scalar>& s,
                                                                    const ChParams& p) {
  const Scalar dx = Scalar(p.grid.dx());
  const Scalar lam2 = Scalar(p.lambda) * Scalar(p.lambda);
  const ArrayX<Scalar> m = epdiff::momentum_map(s, p.grid);
  const ArrayX<Scalar> ux = grid::central_diff(s.u, dx);
  ArrayX<Scalar> flux = s.u * m + Scalar(0.5) * s.u.square() - Scalar(0.5) * lam2 * ux.square();
  return {m, std::move(flux)};
}

// integral(pi * xi(l)); conserved exactly for affine xi, to O(dx^2 + dt^2) for
// general smooth xi. Linear in xi by construction.
template <typename Scalar>
Scalar relabelling_invariant(const ChState<Scalar>& s, const GridSpec& g,
                             const std::function<Scalar(Scalar)>& xi) {
  const ArrayX<Scalar> l = epdiff::labels(s, g);
  ArrayX<Scalar> integrand(l.size());
  for (Eigen::Index j = 0; j < l.size(); ++j) integrand[j] = s.pi[j] * xi(l[j]);
  return grid::quadrature(integrand, Scalar(g.dx()));
}

// Whole-domain circulation integral(m / rho); the periodic domain is the only
// closed material loop in 1D.
template <typename Scalar>
Scalar circulation(const ChState<Scalar>& s, const ChParams& p) {
  if (!s.has_rho()) throw MissingDensity();
  if ((s.rho <= Scalar(0)).any()) throw NonpositiveDensity();
  const ArrayX<Scalar> m = epdiff::momentum_map(s, p.grid);
  return grid::quadrature<Scalar>(m / s.rho, Scalar(p.grid.dx()));
}

// Named relabelling-function registry: "const" -> 1, "linear" -> l,
// "sin:k" -> sin(2 pi k l / L), "tanh:a" -> tanh(a l).
inline std::function<double(double)> make_xi(const std::string& spec, double domain_length) {
  if (spec == "const") return [](double) { return 1.0; };
  if (spec == "linear") return [](double l) { return l; };
  const auto colon = spec.find(':');
  if (colon != std::string::npos) {
    const std::string head = spec.substr(0, colon);
    const double arg = std::stod(spec.substr(colon + 1));
    if (head == "sin") {
      const double k = 2.0 * std::numbers::pi * arg / domain_length;
      return [k](double l) { return std::sin(k * l); };
    }
    if (head == "tanh")
      return [arg](double l) { return std::tanh(arg * l); };
  }
  throw std::invalid_argument("unknown relabelling function: " + spec);
}

// Least-squares slope of log(err) against log(h): the fitted convergence order.
inline double fit_loglog_slope(const std::vector<double>& h, const std::vector<double>& err) {
  if (h.size() != err.size() || h.size() < 2)
    throw std::invalid_argument("fit_loglog_slope: need matching lists of length >= 2");
  const auto n = static_cast<double>(h.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < h.size(); ++i) {
    const double x = std::log(h[i]), y = std::log(err[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

// ---------------------------------------------------------------------------
// 2D vorticity-law identity on closed-form fields (no grid involved).

using ScalarField2D = std::function<double(double, double, double)>;  // (x, y, t)

struct Fields2D {
  std::array<ScalarField2D, 2> u;  // velocity components
  std::array<ScalarField2D, 2> m;  // momentum components
  double lambda = 1.0;
};

namespace detail {

// Central-difference derivative operator; dir: 0 = x, 1 = y, 2 = t.
inline ScalarField2D deriv(ScalarField2D f, int dir, double h) {
  return [f = std::move(f), dir, h](double x, double y, double t) {
    switch (dir) {
      case 0: return (f(x + h, y, t) - f(x - h, y, t)) / (2 * h);
      case 1: return (f(x, y + h, t) - f(x, y - h, t)) / (2 * h);
      default: return (f(x, y, t + h) - f(x, y, t - h)) / (2 * h);
    }
  };
}

}  // namespace detail

// Momentum-law residual R_i = d_t m_i + d_j F_ij with
//   F_ij = u_j m_i - lambda^2 u_{k,j} u_{k,i}
//          + delta_ij (u_k u_k / 2 + (lambda^2/2) u_{k,l} u_{k,l}),
// all derivatives by nested central differences of step h. Zero on EPDiff(H^1)
// solutions; on arbitrary fields its curl equals vorticity_residual_2d.
inline Eigen::Vector2d momentum_residual_2d(const Fields2D& f, double x, double y, double t,
                                            double h) {
  const double lam2 = f.lambda * f.lambda;
  std::array<std::array<ScalarField2D, 2>, 2> du;  // du[k][j] = u_{k,j}
  for (int k = 0; k < 2; ++k)
    for (int j = 0; j < 2; ++j) du[k][j] = detail::deriv(f.u[k], j, h);

  Eigen::Vector2d R;
  for (int i = 0; i < 2; ++i) {
    double r = detail::deriv(f.m[i], 2, h)(x, y, t);
    for (int j = 0; j < 2; ++j) {
      ScalarField2D Fij = [&f, &du, i, j, lam2](double xx, double yy, double tt) {
        double v = f.u[j](xx, yy, tt) * f.m[i](xx, yy, tt);
        for (int k = 0; k < 2; ++k) v -= lam2 * du[k][j](xx, yy, tt) * du[k][i](xx, yy, tt);
        if (i == j) {
          for (int k = 0; k < 2; ++k) {
            const double uk = f.u[k](xx, yy, tt);
            v += 0.5 * uk * uk;
            for (int l = 0; l < 2; ++l) {
              const double ukl = du[k][l](xx, yy, tt);
              v += 0.5 * lam2 * ukl * ukl;
            }
          }
        }
        return v;
      };
      r += detail::deriv(Fij, j, h)(x, y, t);
    }
    R[i] = r;
  }
  return R;
}

// Vorticity-law residual
//   d_t(m_{2,1} - m_{1,2})
//   + d_j[ lambda^2 (u_{k,1} u_{k,j2} - u_{k,2} u_{k,j1})
//          + (u_j m_2)_{,1} - (u_j m_1)_{,2} ]
// (indices 1 = x, 2 = y). This is the antisymmetrized derivative of the
// momentum law, so on arbitrary smooth fields it matches
// momentum_residual_curl to O(h^2) and vanishes on solutions.
inline double vorticity_residual_2d(const Fields2D& f, double x, double y, double t, double h) {
  const double lam2 = f.lambda * f.lambda;
  std::array<std::array<ScalarField2D, 2>, 2> du;
  for (int k = 0; k < 2; ++k)
    for (int j = 0; j < 2; ++j) du[k][j] = detail::deriv(f.u[k], j, h);

  const ScalarField2D vort = [&f, h](double xx, double yy, double tt) {
    return detail::deriv(f.m[1], 0, h)(xx, yy, tt) - detail::deriv(f.m[0], 1, h)(xx, yy, tt);
  };
  double r = detail::deriv(vort, 2, h)(x, y, t);

  for (int j = 0; j < 2; ++j) {
    ScalarField2D flux = [&f, &du, j, lam2, h](double xx, double yy, double tt) {
      double v = 0.0;
      for (int k = 0; k < 2; ++k) {
        const ScalarField2D ukj2 = detail::deriv(du[k][j], 1, h);  // u_{k,j y}
        const ScalarField2D ukj1 = detail::deriv(du[k][j], 0, h);  // u_{k,j x}
        v += lam2 * (du[k][0](xx, yy, tt) * ukj2(xx, yy, tt) -
                     du[k][1](xx, yy, tt) * ukj1(xx, yy, tt));
      }
      ScalarField2D ujm1 = [&f, j](double a, double b, double c) {
        return f.u[j](a, b, c) * f.m[0](a, b, c);
      };
      ScalarField2D ujm2 = [&f, j](double a, double b, double c) {
        return f.u[j](a, b, c) * f.m[1](a, b, c);
      };
      v += detail::deriv(ujm2, 0, h)(xx, yy, tt) - detail::deriv(ujm1, 1, h)(xx, yy, tt);
      return v;
    };
    r += detail::deriv(flux, j, h)(x, y, t);
  }
  return r;
}

// Curl of the momentum residual, d_x R_y - d_y R_x, computed independently by
// an outer central difference over momentum_residual_2d.
inline double momentum_residual_curl(const Fields2D& f, double x, double y, double t, double h) {
  const auto Ry = [&](double xx, double yy) { return momentum_residual_2d(f, xx, yy, t, h)[1]; };
  const auto Rx = [&](double xx, double yy) { return momentum_residual_2d(f, xx, yy, t, h)[0]; };
  return (Ry(x + h, y) - Ry(x - h, y)) / (2 * h) - (Rx(x, y + h) - Rx(x, y - h)) / (2 * h);
}

}  // namespace msflow::diagnostics
