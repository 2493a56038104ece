// One-step variational integrator for affine Lagrangians on the periodic grid:
// implicit midpoint in time, centered differences in space, with analytic
// Newton Jacobian, tangent (linearized) propagation, and the discrete
// two-form balance used for symplecticity testing.
//
// Per node j, with zb = (z^n + z^{n+1})/2, Dt = (z^{n+1}-z^n)/dt and Dc the
// periodic centered difference, the residual is
//   F_i(j) = K^t_{ia} (Dt z^a)_j + L^x_{a,i}(zb_j) (Dx zb^a)_j
//            - Dc( L^x_i(zb) )_j - H_i(zb_j) = 0,
// where Dx zb^a includes the chart base gradient (see Chart). For L^t linear
// in z (validated at construction) these are the discrete Euler-Lagrange
// equations of the nodal-quadrature action, so the map is variational and
// satisfies an exact per-node two-form conservation law with shared edge
// fluxes (discrete_symplecticity_residual evaluates it).
#pragma once

#include <Eigen/Sparse>
#include <optional>
#include <vector>

#include "msflow/grid.hpp"
#include "msflow/mslagrangian.hpp"

namespace msflow::integrator {

using grid::ArrayX;
using grid::GridSpec;
using grid::MatrixX;
using grid::VectorX;
using mslagrangian::AffineLagrangianSpec;

struct BoxSchemeConfig {
  double newton_tol = 1e-12;
  int newton_max_iter = 50;
  enum class JacobianMode { analytic, finite_difference };
  JacobianMode jacobian_mode = JacobianMode::analytic;

  void validate() const {
    if (!(newton_tol > 0.0)) throw std::invalid_argument("BoxSchemeConfig: newton_tol must be > 0");
    if (newton_max_iter < 1)
      throw std::invalid_argument("BoxSchemeConfig: newton_max_iter must be >= 1");
  }
};

struct NewtonDivergence : std::runtime_error {
  double final_residual;
  explicit NewtonDivergence(double r)
      : std::runtime_error("Newton did not converge; final residual " + std::to_string(r)),
        final_residual(r) {}
};

struct SingularJacobian : std::runtime_error {
  explicit SingularJacobian(const std::string& where)
      : std::runtime_error("singular Newton Jacobian (" + where + ")") {}
};

// Chart offsets for variables stored as displacements from a fixed background
// profile (the label field stores dl = l - x). base_value is added before
// coefficient evaluation; base_gradient enters the spatial derivative.
template <typename Scalar = double>
struct Chart {
  std::vector<ArrayX<Scalar>> base_value;  // per variable; empty array => 0
  VectorX<Scalar> base_gradient;           // per variable

  static Chart identity(int n_dep) {
    Chart c;
    c.base_value.resize(static_cast<std::size_t>(n_dep));
    c.base_gradient = VectorX<Scalar>::Zero(n_dep);
    return c;
  }
};

// Grid state as an n x m matrix (node-major), m = number of dependent
// variables; tangent fields use the same layout.
template <typename Scalar = double>
class VariationalIntegrator {
 public:
  using Mat = MatrixX<Scalar>;
  using SpMat = Eigen::SparseMatrix<Scalar>;

  VariationalIntegrator(AffineLagrangianSpec<Scalar> spec, GridSpec gridspec,
                        Chart<Scalar> chart, BoxSchemeConfig cfg)
      : spec_(std::move(spec)),
        grid_(gridspec),
        chart_(std::move(chart)),
        cfg_(cfg),
        n_(gridspec.n_cells),
        m_(spec_.n_dep) {
    grid_.validate();
    cfg_.validate();
    if (spec_.n_indep != 2)
      throw std::invalid_argument("VariationalIntegrator: expects 1+1D specs (n_indep == 2)");
    if (static_cast<int>(chart_.base_value.size()) != m_ || chart_.base_gradient.size() != m_)
      throw std::invalid_argument("VariationalIntegrator: chart dimension mismatch");
    validate_time_linearity();
  }

  int n_nodes() const { return n_; }
  int n_vars() const { return m_; }
  const GridSpec& gridspec() const { return grid_; }
  const AffineLagrangianSpec<Scalar>& spec() const { return spec_; }
  // Residual max-norm history of the most recent Newton solve.
  const std::vector<Scalar>& newton_history() const { return newton_history_; }

  // F(Zold, Znew), n x m.
  Mat residual(const Mat& zold, const Mat& znew, Scalar dt) const {
    const Scalar dx = Scalar(grid_.dx());
    const Mat zb = Scalar(0.5) * (zold + znew);
    Mat F(n_, m_);
    // Per-node actual states and coefficient data.
    std::vector<MatrixX<Scalar>> G1(static_cast<std::size_t>(n_));
    Mat sx(n_, m_);  // sx(j, i) = L^x_i(zb_j)
    for (int j = 0; j < n_; ++j) {
      const VectorX<Scalar> z = actual(zb, j);
      G1[static_cast<std::size_t>(j)] = spec_.coeff_grad(z)[1];
      sx.row(j) = spec_.coeff(z).row(1);
    }
    for (int j = 0; j < n_; ++j) {
      const int jp = (j + 1) % n_, jm = (j + n_ - 1) % n_;
      const VectorX<Scalar> z = actual(zb, j);
      const VectorX<Scalar> dtz = (znew.row(j) - zold.row(j)).transpose() / dt;
      const VectorX<Scalar> dxz =
          chart_.base_gradient +
          (zb.row(jp) - zb.row(jm)).transpose() / (Scalar(2) * dx);
      const VectorX<Scalar> dcs = (sx.row(jp) - sx.row(jm)).transpose() / (Scalar(2) * dx);
      F.row(j) = (kt_ * dtz + G1[static_cast<std::size_t>(j)] * dxz - dcs -
                  spec_.hamiltonian_grad(z))
                     .transpose();
    }
    return F;
  }

  // Newton solve for the next level. Throws NewtonDivergence / SingularJacobian.
  Mat step(const Mat& zold, Scalar dt) {
    Mat znew = zold;
    newton_history_.clear();
    Scalar r = Scalar(0);
    for (int it = 0; it <= cfg_.newton_max_iter; ++it) {
      const Mat F = residual(zold, znew, dt);
      r = F.array().abs().maxCoeff();
      newton_history_.push_back(r);
      if (!std::isfinite(double(r))) break;
      if (r < Scalar(cfg_.newton_tol)) return znew;
      if (it == cfg_.newton_max_iter) break;
      VectorX<Scalar> rhs(n_ * m_);
      for (int j = 0; j < n_; ++j) rhs.segment(j * m_, m_) = -F.row(j).transpose();
      const VectorX<Scalar> d = solve_linearized(zold, znew, dt, /*wrt_new=*/true, rhs);
      for (int j = 0; j < n_; ++j) znew.row(j) += d.segment(j * m_, m_).transpose();
    }
    throw NewtonDivergence(double(r));
  }

  // Propagates a tangent field through the linearized step:
  // (dF/dznew) dnew = -(dF/dzold) dold.
  Mat tangent_step(const Mat& zold, const Mat& znew, const Mat& dold, Scalar dt) {
    const SpMat jo = assemble_jacobian(zold, znew, dt, /*wrt_new=*/false);
    VectorX<Scalar> v(n_ * m_);
    for (int j = 0; j < n_; ++j) v.segment(j * m_, m_) = dold.row(j).transpose();
    const VectorX<Scalar> rhs = -(jo * v);
    const VectorX<Scalar> d = solve_linearized(zold, znew, dt, /*wrt_new=*/true, rhs);
    Mat dnew(n_, m_);
    for (int j = 0; j < n_; ++j) dnew.row(j) = d.segment(j * m_, m_).transpose();
    return dnew;
  }

  // Per-node discrete two-form balance for two tangent trajectories across one
  // step: (omega^{n+1}_j - omega^n_j)/dt + kappa_{j+1/2} - kappa_{j-1/2} with
  //   omega_j      = d2_j^T K^t d1_j          (at each time level),
  //   p_a(d)_j     = L^x_{a,i}(zb_j) dbar^i_j (dbar = time-averaged tangent),
  //   kappa_{j+1/2} = [p(d2)_j . dbar1_{j+1} - p(d1)_j . dbar2_{j+1}
  //                    + p(d2)_{j+1} . dbar1_j - p(d1)_{j+1} . dbar2_j]/(2 dx).
  // Zero up to solver tolerance on exact tangent pairs.
  ArrayX<Scalar> symplecticity_residual(const Mat& zold, const Mat& znew, const Mat& d1o,
                                        const Mat& d1n, const Mat& d2o, const Mat& d2n,
                                        Scalar dt) const {
    const Scalar dx = Scalar(grid_.dx());
    const Mat zb = Scalar(0.5) * (zold + znew);
    const Mat d1b = Scalar(0.5) * (d1o + d1n);
    const Mat d2b = Scalar(0.5) * (d2o + d2n);
    Mat p1(n_, m_), p2(n_, m_);
    for (int j = 0; j < n_; ++j) {
      const MatrixX<Scalar> G1 = spec_.coeff_grad(actual(zb, j))[1];
      p1.row(j) = (G1.transpose() * d1b.row(j).transpose()).transpose();
      p2.row(j) = (G1.transpose() * d2b.row(j).transpose()).transpose();
    }
    ArrayX<Scalar> kappa(n_), res(n_);
    for (int j = 0; j < n_; ++j) {
      const int jp = (j + 1) % n_;
      kappa[j] = (p2.row(j).dot(d1b.row(jp)) - p1.row(j).dot(d2b.row(jp)) +
                  p2.row(jp).dot(d1b.row(j)) - p1.row(jp).dot(d2b.row(j))) /
                 (Scalar(2) * dx);
    }
    for (int j = 0; j < n_; ++j) {
      const int jm = (j + n_ - 1) % n_;
      const Scalar w_new = d2n.row(j) * kt_ * d1n.row(j).transpose();
      const Scalar w_old = d2o.row(j) * kt_ * d1o.row(j).transpose();
      res[j] = (w_new - w_old) / dt + kappa[j] - kappa[jm];
    }
    return res;
  }

  // Discrete action of one time slab with the same nodal quadrature the scheme
  // is derived from: sum_j dx dt [ L^t_a(zb) Dt z^a + L^x_a(zb) Dx zb^a - H(zb) ].
  Scalar discrete_action(const Mat& zold, const Mat& znew, Scalar dt) const {
    const Scalar dx = Scalar(grid_.dx());
    const Mat zb = Scalar(0.5) * (zold + znew);
    Scalar total = Scalar(0);
    for (int j = 0; j < n_; ++j) {
      const int jp = (j + 1) % n_, jm = (j + n_ - 1) % n_;
      const VectorX<Scalar> z = actual(zb, j);
      const MatrixX<Scalar> L = spec_.coeff(z);
      const VectorX<Scalar> dtz = (znew.row(j) - zold.row(j)).transpose() / dt;
      const VectorX<Scalar> dxz =
          chart_.base_gradient + (zb.row(jp) - zb.row(jm)).transpose() / (Scalar(2) * dx);
      total += dx * dt * (L.row(0).dot(dtz) + L.row(1).dot(dxz) - spec_.hamiltonian(z));
    }
    return total;
  }

  // Exposed for cross-checking the analytic Jacobian in tests.
  SpMat assemble_jacobian(const Mat& zold, const Mat& znew, Scalar dt, bool wrt_new) const {
    if (cfg_.jacobian_mode == BoxSchemeConfig::JacobianMode::finite_difference)
      return fd_jacobian(zold, znew, dt, wrt_new).sparseView();
    return analytic_jacobian(zold, znew, dt, wrt_new);
  }

 private:
  VectorX<Scalar> actual(const Mat& z, int j) const {
    VectorX<Scalar> out = z.row(j).transpose();
    for (int a = 0; a < m_; ++a)
      if (chart_.base_value[static_cast<std::size_t>(a)].size() > 0)
        out[a] += chart_.base_value[static_cast<std::size_t>(a)][j];
    return out;
  }

  // The variational equivalence of the one-step scheme needs L^t linear in z:
  // coeff_grad[0] constant and coeff[0] affine. Checked on random states.
  void validate_time_linearity() {
    std::mt19937 rng(98765);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    VectorX<Scalar> z0 = VectorX<Scalar>::Zero(m_);
    const MatrixX<Scalar> G0 = spec_.coeff_grad(z0)[0];
    const MatrixX<Scalar> L0 = spec_.coeff(z0);
    for (int s = 0; s < 10; ++s) {
      VectorX<Scalar> z(m_);
      for (int i = 0; i < m_; ++i) z[i] = Scalar(dist(rng));
      const MatrixX<Scalar> G = spec_.coeff_grad(z)[0];
      if ((G - G0).cwiseAbs().maxCoeff() > Scalar(1e-12))
        throw std::invalid_argument(
            "VariationalIntegrator: time coefficients L^t must be linear in z");
      const MatrixX<Scalar> L = spec_.coeff(z);
      const VectorX<Scalar> predicted = L0.row(0).transpose() + G0.transpose() * z;
      if ((L.row(0).transpose() - predicted).cwiseAbs().maxCoeff() > Scalar(1e-10))
        throw std::invalid_argument(
            "VariationalIntegrator: time coefficients L^t must be affine in z");
    }
    kt_ = G0 - G0.transpose();
  }

  // Jacobian blocks (see derivation in the class comment):
  //   diag_j  = +/- K^t/dt + (T_j - Hess(H)_j)/2,
  //   up_j    = +(1/(4 dx)) [G1_j - G1_{j+1}^T],
  //   low_j   = -(1/(4 dx)) [G1_j - G1_{j-1}^T],
  // where T_j(i,p) = sum_a d^2 L^x_a/(dz^i dz^p)(zb_j) (Dx zb^a)_j, evaluated
  // by central differences of coeff_grad (step 1e-5), and the +/- on K^t/dt
  // selects d/dznew vs d/dzold (all zb-terms carry the same factor 1/2).
  SpMat analytic_jacobian(const Mat& zold, const Mat& znew, Scalar dt, bool wrt_new) const {
    const Scalar dx = Scalar(grid_.dx());
    const Scalar h = Scalar(1e-5);
    const Mat zb = Scalar(0.5) * (zold + znew);
    std::vector<MatrixX<Scalar>> G1(static_cast<std::size_t>(n_));
    for (int j = 0; j < n_; ++j) G1[static_cast<std::size_t>(j)] = spec_.coeff_grad(actual(zb, j))[1];

    std::vector<Eigen::Triplet<Scalar>> trips;
    trips.reserve(static_cast<std::size_t>(n_) * static_cast<std::size_t>(3 * m_ * m_));
    const Scalar tfac = (wrt_new ? Scalar(1) : Scalar(-1)) / dt;
    for (int j = 0; j < n_; ++j) {
      const int jp = (j + 1) % n_, jm = (j + n_ - 1) % n_;
      const VectorX<Scalar> z = actual(zb, j);
      const VectorX<Scalar> dxz =
          chart_.base_gradient + (zb.row(jp) - zb.row(jm)).transpose() / (Scalar(2) * dx);

      MatrixX<Scalar> T = MatrixX<Scalar>::Zero(m_, m_);
      MatrixX<Scalar> Hh(m_, m_);
      for (int p = 0; p < m_; ++p) {
        VectorX<Scalar> zp = z, zm = z;
        zp[p] += h;
        zm[p] -= h;
        const MatrixX<Scalar> dG = (spec_.coeff_grad(zp)[1] - spec_.coeff_grad(zm)[1]) /
                                   (Scalar(2) * h);
        T.col(p) = dG * dxz;
        Hh.col(p) =
            (spec_.hamiltonian_grad(zp) - spec_.hamiltonian_grad(zm)) / (Scalar(2) * h);
      }

      const MatrixX<Scalar> diag = tfac * kt_ + Scalar(0.5) * (T - Hh);
      const MatrixX<Scalar> up =
          (G1[static_cast<std::size_t>(j)] - G1[static_cast<std::size_t>(jp)].transpose()) /
          (Scalar(4) * dx);
      const MatrixX<Scalar> low =
          -(G1[static_cast<std::size_t>(j)] - G1[static_cast<std::size_t>(jm)].transpose()) /
          (Scalar(4) * dx);
      for (int i = 0; i < m_; ++i)
        for (int p = 0; p < m_; ++p) {
          trips.emplace_back(j * m_ + i, j * m_ + p, diag(i, p));
          trips.emplace_back(j * m_ + i, jp * m_ + p, up(i, p));
          trips.emplace_back(j * m_ + i, jm * m_ + p, low(i, p));
        }
    }
    SpMat J(n_ * m_, n_ * m_);
    J.setFromTriplets(trips.begin(), trips.end());
    return J;
  }

  Mat fd_jacobian(const Mat& zold, const Mat& znew, Scalar dt, bool wrt_new) const {
    const Scalar h = Scalar(1e-7);
    Mat J(n_ * m_, n_ * m_);
    for (int j = 0; j < n_; ++j)
      for (int p = 0; p < m_; ++p) {
        Mat zp = wrt_new ? znew : zold, zm = zp;
        zp(j, p) += h;
        zm(j, p) -= h;
        const Mat Fp = wrt_new ? residual(zold, zp, dt) : residual(zp, znew, dt);
        const Mat Fm = wrt_new ? residual(zold, zm, dt) : residual(zm, znew, dt);
        const Mat col = (Fp - Fm) / (Scalar(2) * h);
        for (int jj = 0; jj < n_; ++jj)
          for (int i = 0; i < m_; ++i) J(jj * m_ + i, j * m_ + p) = col(jj, i);
      }
    return J;
  }

  VectorX<Scalar> solve_linearized(const Mat& zold, const Mat& znew, Scalar dt, bool wrt_new,
                                   const VectorX<Scalar>& rhs) const {
    if (cfg_.jacobian_mode == BoxSchemeConfig::JacobianMode::finite_difference) {
      const Mat J = fd_jacobian(zold, znew, dt, wrt_new);
      Eigen::PartialPivLU<Mat> lu(J);
      const VectorX<Scalar> d = lu.solve(rhs);
      if (!d.allFinite()) throw SingularJacobian("dense finite-difference solve");
      return d;
    }
    const SpMat J = analytic_jacobian(zold, znew, dt, wrt_new);
    Eigen::SparseLU<SpMat> solver;
    solver.compute(J);
    if (solver.info() != Eigen::Success) throw SingularJacobian("sparse LU factorization");
    const VectorX<Scalar> d = solver.solve(rhs);
    if (solver.info() != Eigen::Success || !d.allFinite())
      throw SingularJacobian("sparse LU back-substitution");
    return d;
  }

  AffineLagrangianSpec<Scalar> spec_;
  GridSpec grid_;
  Chart<Scalar> chart_;
  BoxSchemeConfig cfg_;
  int n_, m_;
  MatrixX<Scalar> kt_;  // constant time structure matrix (L^t linear in z)
  std::vector<Scalar> newton_history_;
};

}  // namespace msflow::integrator
