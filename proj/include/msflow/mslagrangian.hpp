// Generic engine for affine Lagrangians L = L^alpha_a(z) z^a_{,alpha} - H(z):
// structure matrices, Euler-Lagrange residuals, closedness and symmetry checks,
// Noether fluxes. Index alpha runs over independent variables; by convention
// for 1+1D problems alpha = 0 is time and alpha = 1 is space.
#pragma once

#include <functional>
#include <random>
#include <stdexcept>
#include <vector>

#include "msflow/grid.hpp"

namespace msflow::mslagrangian {

using grid::ArrayX;
using grid::MatrixX;
using grid::VectorX;

template <typename Scalar = double>
struct AffineLagrangianSpec {
  int n_dep = 0;    // number of dependent variables z^a
  int n_indep = 0;  // number of independent variables (time counts as one)

  // coeff(z)(alpha, a) = L^alpha_a(z)
  std::function<MatrixX<Scalar>(const VectorX<Scalar>&)> coeff;
  // coeff_grad(z)[alpha](i, a) = d L^alpha_a / d z^i
  std::function<std::vector<MatrixX<Scalar>>(const VectorX<Scalar>&)> coeff_grad;
  std::function<Scalar(const VectorX<Scalar>&)> hamiltonian;
  std::function<VectorX<Scalar>(const VectorX<Scalar>&)> hamiltonian_grad;

  std::vector<std::string> var_names;  // registered variable ordering
};

// Cross-validates analytic gradients against central differences at random
// states; throws if the relative mismatch exceeds tol. Called at construction
// time by model modules.
template <typename Scalar>
void validate_spec(const AffineLagrangianSpec<Scalar>& spec, int n_samples = 20,
                   Scalar tol = Scalar(1e-6), unsigned seed = 12345) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  const Scalar h = Scalar(1e-5);
  for (int s = 0; s < n_samples; ++s) {
    VectorX<Scalar> z(spec.n_dep);
    for (int i = 0; i < spec.n_dep; ++i) z[i] = Scalar(dist(rng));
    const auto G = spec.coeff_grad(z);
    const auto Hg = spec.hamiltonian_grad(z);
    for (int i = 0; i < spec.n_dep; ++i) {
      VectorX<Scalar> zp = z, zm = z;
      zp[i] += h;
      zm[i] -= h;
      const MatrixX<Scalar> Lp = spec.coeff(zp), Lm = spec.coeff(zm);
      const Scalar Hp = spec.hamiltonian(zp), Hm = spec.hamiltonian(zm);
      for (int al = 0; al < spec.n_indep; ++al)
        for (int a = 0; a < spec.n_dep; ++a) {
          const Scalar fd = (Lp(al, a) - Lm(al, a)) / (Scalar(2) * h);
          const Scalar an = G[static_cast<std::size_t>(al)](i, a);
          if (std::abs(fd - an) > tol * (Scalar(1) + std::abs(an)))
            throw std::runtime_error("validate_spec: coeff_grad mismatch");
        }
      const Scalar fdH = (Hp - Hm) / (Scalar(2) * h);
      if (std::abs(fdH - Hg[i]) > tol * (Scalar(1) + std::abs(Hg[i])))
        throw std::runtime_error("validate_spec: hamiltonian_grad mismatch");
    }
  }
}

// K^alpha_ij(z) = dL^alpha_j/dz^i - dL^alpha_i/dz^j, one antisymmetric matrix
// per independent variable.
template <typename Scalar = double>
struct StructureTensor {
  std::vector<MatrixX<Scalar>> k;  // k[alpha], n_dep x n_dep
};

template <typename Scalar>
StructureTensor<Scalar> assemble_structure_matrix(const AffineLagrangianSpec<Scalar>& spec,
                                                  const VectorX<Scalar>& z) {
  if (z.size() != spec.n_dep)
    throw std::invalid_argument("assemble_structure_matrix: state dimension mismatch");
  const auto G = spec.coeff_grad(z);
  StructureTensor<Scalar> K;
  K.k.reserve(G.size());
  for (const auto& Ga : G) K.k.push_back(Ga - Ga.transpose());
  return K;
}

// r_i = K^alpha_ij z^j_{,alpha} - dH/dz^i. `dz[alpha]` are the supplied
// first derivatives of z in each independent direction.
template <typename Scalar>
VectorX<Scalar> el_residual(const AffineLagrangianSpec<Scalar>& spec, const VectorX<Scalar>& z,
                            const std::vector<VectorX<Scalar>>& dz) {
  if (static_cast<int>(dz.size()) != spec.n_indep)
    throw std::invalid_argument("el_residual: need one derivative vector per direction");
  const auto K = assemble_structure_matrix(spec, z);
  VectorX<Scalar> r = -spec.hamiltonian_grad(z);
  for (int al = 0; al < spec.n_indep; ++al) r += K.k[al] * dz[al];
  return r;
}

// Max over samples and index triples of the cyclic sum
// |dK^alpha_ij/dz^k + dK^alpha_jk/dz^i + dK^alpha_ki/dz^j|, with dK by central
// differences of step h. Zero (to O(h^2)) iff every two-form kappa^alpha is closed.
template <typename Scalar>
Scalar check_closedness(const AffineLagrangianSpec<Scalar>& spec,
                        const std::vector<VectorX<Scalar>>& z_samples, Scalar h) {
  if (!(h > Scalar(0))) throw std::invalid_argument("check_closedness: h must be > 0");
  Scalar worst = Scalar(0);
  const int m = spec.n_dep;
  for (const auto& z : z_samples) {
    // dK[k][alpha](i,j) = dK^alpha_ij/dz^k
    std::vector<std::vector<MatrixX<Scalar>>> dK(m);
    for (int k = 0; k < m; ++k) {
      VectorX<Scalar> zp = z, zm = z;
      zp[k] += h;
      zm[k] -= h;
      const auto Kp = assemble_structure_matrix(spec, zp);
      const auto Km = assemble_structure_matrix(spec, zm);
      dK[k].reserve(Kp.k.size());
      for (std::size_t al = 0; al < Kp.k.size(); ++al)
        dK[k].push_back((Kp.k[al] - Km.k[al]) / (Scalar(2) * h));
    }
    for (int al = 0; al < spec.n_indep; ++al)
      for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j)
          for (int k = 0; k < m; ++k) {
            const Scalar v = dK[k][al](i, j) + dK[i][al](j, k) + dK[j][al](k, i);
            worst = std::max(worst, std::abs(v));
          }
  }
  return worst;
}

// A space-time sample point carrying enough jet data to evaluate symmetry and
// one-form checks: state, first derivatives dz[alpha], and (optionally) second
// derivatives d2z[alpha][beta].
template <typename Scalar = double>
struct JetSample {
  VectorX<Scalar> q;                             // independent variables (t, x, ...)
  VectorX<Scalar> z;                             // state
  std::vector<VectorX<Scalar>> dz;               // dz[alpha] = z_{,alpha}
  std::vector<std::vector<VectorX<Scalar>>> d2z; // d2z[alpha][beta] = z_{,alpha beta}
};

// Symmetry generator X = Q^i(q, z, z_,alpha) d/dz^i with optional boundary
// terms B^alpha(q, z, z_,alpha) such that XL = B^alpha_{,alpha}.
template <typename Scalar = double>
struct SymmetryGenerator {
  std::function<VectorX<Scalar>(const JetSample<Scalar>&)> q_char;
  std::function<VectorX<Scalar>(const JetSample<Scalar>&)> boundary_term;  // may be null => 0
};

namespace detail {

// Total derivative D_alpha applied to a jet functional by central differences:
// advances q, z, dz along the sample's own derivative data.
template <typename Scalar, typename F>
auto total_derivative(const F& f, const JetSample<Scalar>& s, int alpha, Scalar h)
    -> decltype(f(s)) {
  JetSample<Scalar> sp = s, sm = s;
  sp.q[alpha] += h;
  sm.q[alpha] -= h;
  sp.z += h * s.dz[alpha];
  sm.z -= h * s.dz[alpha];
  if (!s.d2z.empty()) {
    for (std::size_t be = 0; be < s.dz.size(); ++be) {
      sp.dz[be] += h * s.d2z[alpha][be];
      sm.dz[be] -= h * s.d2z[alpha][be];
    }
  }
  return (f(sp) - f(sm)) / (Scalar(2) * h);
}

}  // namespace detail

// Evaluates XL - B^alpha_{,alpha} over samples; returns max |violation|.
// XL = Q^i dL/dz^i + (D_alpha Q^i) dL/dz^i_{,alpha}, with
// dL/dz^i = L^alpha_{a,i} z^a_{,alpha} - H_i and dL/dz^i_{,alpha} = L^alpha_i.
template <typename Scalar>
Scalar check_variational_symmetry(const AffineLagrangianSpec<Scalar>& spec,
                                  const SymmetryGenerator<Scalar>& gen,
                                  const std::vector<JetSample<Scalar>>& samples,
                                  Scalar h = Scalar(1e-4)) {
  Scalar worst = Scalar(0);
  for (const auto& s : samples) {
    const auto G = spec.coeff_grad(s.z);
    const auto L = spec.coeff(s.z);
    const auto Hg = spec.hamiltonian_grad(s.z);
    const VectorX<Scalar> Q = gen.q_char(s);

    VectorX<Scalar> dLdz = -Hg;
    for (int al = 0; al < spec.n_indep; ++al) dLdz += G[static_cast<std::size_t>(al)] * s.dz[al];
    Scalar xl = Q.dot(dLdz);
    for (int al = 0; al < spec.n_indep; ++al) {
      const VectorX<Scalar> DQ =
          detail::total_derivative([&](const JetSample<Scalar>& j) { return gen.q_char(j); }, s,
                                   al, h);
      xl += L.row(al).dot(DQ);
    }

    Scalar divB = Scalar(0);
    if (gen.boundary_term) {
      for (int al = 0; al < spec.n_indep; ++al) {
        const VectorX<Scalar> DB = detail::total_derivative(
            [&](const JetSample<Scalar>& j) { return gen.boundary_term(j); }, s, al, h);
        divB += DB[al];
      }
    }
    worst = std::max(worst, std::abs(xl - divB));
  }
  return worst;
}

// F^alpha = L^alpha_a Q^a - B^alpha at one jet point. On solutions of the
// Euler-Lagrange equations the divergence of F vanishes for variational
// symmetries (Noether's theorem).
template <typename Scalar>
VectorX<Scalar> noether_flux(const AffineLagrangianSpec<Scalar>& spec,
                             const SymmetryGenerator<Scalar>& gen, const JetSample<Scalar>& s) {
  const auto L = spec.coeff(s.z);
  const VectorX<Scalar> Q = gen.q_char(s);
  VectorX<Scalar> F = L * Q;
  if (gen.boundary_term) F -= gen.boundary_term(s);
  return F;
}

// Residual of the one-form quasi-conservation law contracted against a
// variation field dz: (L^alpha_a dz^a)_{,alpha} - [dL/dz^i dz^i +
// L^alpha_i dz^i_{,alpha}]. Fields are given on a 3-level time stencil over
// the periodic grid; outer derivatives are centered in both directions.
// Returns the max-norm residual over the middle level.
template <typename Scalar>
Scalar oneform_quasiconservation_residual(
    const AffineLagrangianSpec<Scalar>& spec,
    const std::vector<std::vector<ArrayX<Scalar>>>& z_levels,   // [level][var], 3 levels
    const std::vector<std::vector<ArrayX<Scalar>>>& dz_levels,  // variation field, same layout
    Scalar dx, Scalar dt) {
  if (z_levels.size() != 3 || dz_levels.size() != 3)
    throw std::invalid_argument("oneform_quasiconservation_residual: need 3 time levels");
  const int m = spec.n_dep;
  const int n = static_cast<int>(z_levels[0][0].size());

  auto zat = [&](int lev, int j) {
    VectorX<Scalar> z(m);
    for (int a = 0; a < m; ++a) z[a] = z_levels[static_cast<std::size_t>(lev)][a][(j % n + n) % n];
    return z;
  };
  auto dzat = [&](int lev, int j) {
    VectorX<Scalar> v(m);
    for (int a = 0; a < m; ++a) v[a] = dz_levels[static_cast<std::size_t>(lev)][a][(j % n + n) % n];
    return v;
  };
  // s^alpha = L^alpha_a(z) dz^a as scalar fields.
  auto s_alpha = [&](int al, int lev, int j) {
    const VectorX<Scalar> z = zat(lev, j);
    const VectorX<Scalar> v = dzat(lev, j);
    return Scalar(spec.coeff(z).row(al).dot(v));
  };

  Scalar worst = Scalar(0);
  for (int j = 0; j < n; ++j) {
    const Scalar lhs_t = (s_alpha(0, 2, j) - s_alpha(0, 0, j)) / (Scalar(2) * dt);
    const Scalar lhs_x = (s_alpha(1, 1, j + 1) - s_alpha(1, 1, j - 1)) / (Scalar(2) * dx);

    const VectorX<Scalar> z = zat(1, j);
    const VectorX<Scalar> v = dzat(1, j);
    std::vector<VectorX<Scalar>> dzq(2), dvq(2);
    dzq[0] = (zat(2, j) - zat(0, j)) / (Scalar(2) * dt);
    dzq[1] = (zat(1, j + 1) - zat(1, j - 1)) / (Scalar(2) * dx);
    dvq[0] = (dzat(2, j) - dzat(0, j)) / (Scalar(2) * dt);
    dvq[1] = (dzat(1, j + 1) - dzat(1, j - 1)) / (Scalar(2) * dx);

    const auto G = spec.coeff_grad(z);
    const auto L = spec.coeff(z);
    VectorX<Scalar> dLdz = -spec.hamiltonian_grad(z);
    for (int al = 0; al < 2; ++al) dLdz += G[static_cast<std::size_t>(al)] * dzq[al];
    Scalar rhs = dLdz.dot(v);
    for (int al = 0; al < 2; ++al) rhs += L.row(al).dot(dvq[al]);

    worst = std::max(worst, std::abs(lhs_t + lhs_x - rhs));
  }
  return worst;
}

}  // namespace msflow::mslagrangian
