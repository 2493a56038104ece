// Periodic 1D grid: field storage, difference operators, quadrature, and the
// cyclic tridiagonal solves used by the Helmholtz operator and the integrator.
#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

namespace msflow::grid {

template <typename Scalar>
using ArrayX = Eigen::Array<Scalar, Eigen::Dynamic, 1>;
template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

struct GridSpec {
  int n_cells = 0;
  double length = 0.0;  // domain length
  double dt = 0.0;      // time step

  double dx() const { return length / n_cells; }

  void validate() const {
    if (n_cells < 8) throw std::invalid_argument("GridSpec: n_cells must be >= 8");
    if (!(length > 0.0)) throw std::invalid_argument("GridSpec: length must be > 0");
    if (!(dt > 0.0)) throw std::invalid_argument("GridSpec: dt must be > 0");
  }

  template <typename Scalar = double>
  ArrayX<Scalar> nodes() const {
    ArrayX<Scalar> x(n_cells);
    const Scalar h = Scalar(length) / Scalar(n_cells);
    for (int j = 0; j < n_cells; ++j) x[j] = Scalar(j) * h;
    return x;
  }
};

// Cyclic index shift: roll(f, 1)[j] = f[j+1] (periodic).
template <typename Scalar>
ArrayX<Scalar> roll(const ArrayX<Scalar>& f, int k) {
  const int n = static_cast<int>(f.size());
  ArrayX<Scalar> out(n);
  const int s = ((k % n) + n) % n;
  for (int j = 0; j < n; ++j) out[j] = f[(j + s) % n];
  return out;
}

// Second-order centered difference with periodic wrap.
template <typename Scalar>
ArrayX<Scalar> central_diff(const ArrayX<Scalar>& f, Scalar dx) {
  if (f.size() < 3) throw std::invalid_argument("central_diff: need length >= 3");
  return (roll(f, 1) - roll(f, -1)) / (Scalar(2) * dx);
}

// Periodic midpoint-rule quadrature: dx * sum(f).
template <typename Scalar>
Scalar quadrature(const ArrayX<Scalar>& f, Scalar dx) {
  return dx * f.sum();
}

// Three-point periodic second difference.
template <typename Scalar>
ArrayX<Scalar> second_diff(const ArrayX<Scalar>& f, Scalar dx) {
  return (roll(f, 1) - Scalar(2) * f + roll(f, -1)) / (dx * dx);
}

// m = u - lambda^2 u_xx with the 3-point periodic second difference.
template <typename Scalar>
ArrayX<Scalar> helmholtz_apply(const ArrayX<Scalar>& u, Scalar lambda, Scalar dx) {
  if (lambda < Scalar(0)) throw std::invalid_argument("helmholtz_apply: lambda must be >= 0");
  return u - lambda * lambda * second_diff(u, dx);
}

// Solves a cyclic tridiagonal system
//   a[j] x[j-1] + b[j] x[j] + c[j] x[j+1] = r[j]   (indices periodic)
// by the Thomas algorithm plus a Sherman-Morrison rank-1 correction.
template <typename Scalar>
ArrayX<Scalar> cyclic_tridiagonal_solve(const ArrayX<Scalar>& a,
                                        const ArrayX<Scalar>& b,
                                        const ArrayX<Scalar>& c,
                                        const ArrayX<Scalar>& r) {
  const int n = static_cast<int>(b.size());
  if (n < 3) throw std::invalid_argument("cyclic_tridiagonal_solve: need n >= 3");

  auto thomas = [&](const ArrayX<Scalar>& d, const ArrayX<Scalar>& rhs) {
    // Plain tridiagonal solve with diagonal d (sub a, super c, corners dropped).
    ArrayX<Scalar> cp(n), dp(n), x(n);
    Scalar beta = d[0];
    if (beta == Scalar(0)) throw std::runtime_error("cyclic_tridiagonal_solve: zero pivot");
    cp[0] = c[0] / beta;
    dp[0] = rhs[0] / beta;
    for (int j = 1; j < n; ++j) {
      beta = d[j] - a[j] * cp[j - 1];
      if (beta == Scalar(0)) throw std::runtime_error("cyclic_tridiagonal_solve: zero pivot");
      cp[j] = c[j] / beta;
      dp[j] = (rhs[j] - a[j] * dp[j - 1]) / beta;
    }
    x[n - 1] = dp[n - 1];
    for (int j = n - 2; j >= 0; --j) x[j] = dp[j] - cp[j] * x[j + 1];
    return x;
  };

  // Sherman-Morrison: A = T + u v^T with u = (gamma, 0, ..., c[n-1]),
  // v = (1, 0, ..., a[0]/gamma); T has modified diagonal.
  const Scalar gamma = -b[0];
  ArrayX<Scalar> d = b;
  d[0] = b[0] - gamma;
  d[n - 1] = b[n - 1] - a[0] * c[n - 1] / gamma;

  ArrayX<Scalar> u = ArrayX<Scalar>::Zero(n);
  u[0] = gamma;
  u[n - 1] = c[n - 1];

  ArrayX<Scalar> y = thomas(d, r);
  ArrayX<Scalar> q = thomas(d, u);

  const Scalar vy = y[0] + (a[0] / gamma) * y[n - 1];
  const Scalar vq = q[0] + (a[0] / gamma) * q[n - 1];
  const Scalar denom = Scalar(1) + vq;
  if (denom == Scalar(0)) throw std::runtime_error("cyclic_tridiagonal_solve: singular correction");
  return y - (vy / denom) * q;
}

// Solves (I - lambda^2 D2) u = m on the periodic grid.
template <typename Scalar>
ArrayX<Scalar> helmholtz_invert(const ArrayX<Scalar>& m, Scalar lambda, Scalar dx) {
  if (lambda < Scalar(0)) throw std::invalid_argument("helmholtz_invert: lambda must be >= 0");
  if (lambda == Scalar(0)) return m;
  const int n = static_cast<int>(m.size());
  const Scalar mu = lambda * lambda / (dx * dx);
  ArrayX<Scalar> a = ArrayX<Scalar>::Constant(n, -mu);
  ArrayX<Scalar> b = ArrayX<Scalar>::Constant(n, Scalar(1) + Scalar(2) * mu);
  ArrayX<Scalar> c = ArrayX<Scalar>::Constant(n, -mu);
  return cyclic_tridiagonal_solve(a, b, c, m);
}

// Values of all dependent variables on the grid at one time level.
template <typename Scalar = double>
struct StateField {
  std::vector<std::string> names;          // one per variable, fixed order
  std::vector<ArrayX<Scalar>> values;      // arrays of length n_cells
  Scalar time = Scalar(0);

  void validate() const {
    if (names.size() != values.size())
      throw std::invalid_argument("StateField: names/values size mismatch");
    for (std::size_t k = 0; k < values.size(); ++k) {
      if (values[k].size() != values[0].size())
        throw std::invalid_argument("StateField: ragged arrays");
      if (!values[k].isFinite().all())
        throw std::invalid_argument("StateField: non-finite entry in " + names[k]);
    }
  }
};

}  // namespace msflow::grid
