// Shared independent oracles for the test suite: closed-form Hessians, a dense
// Poisson solver, and small helpers. Everything here is deliberately written
// with the most naive correct method available, independent of the library's
// own discretizations.
#pragma once

#include <cmath>
#include <random>
#include <stdexcept>
#include <vector>

#include "cma/grid.hpp"
#include "cma/hermitian.hpp"

namespace oracles {

// Closed-form complex Hessian of log(1 + |z|^2):
// [(1+|z|^2) d_jk - zbar_j z_k] / (1+|z|^2)^2.
inline cma::Herm fs_hessian(const std::array<cma::cplx, 2>& z, int n) {
  double q = 1.0;
  for (int j = 0; j < n; ++j) q += std::norm(z[j]);
  double q2 = q * q;
  if (n == 1) return cma::Herm{1, (q - std::norm(z[0])) / q2, 0, {0, 0}};
  return cma::Herm{2, (q - std::norm(z[0])) / q2, (q - std::norm(z[1])) / q2,
                   -std::conj(z[0]) * z[1] / q2};
}

// Dense Gaussian elimination with partial pivoting.
inline std::vector<double> dense_solve(std::vector<std::vector<double>> A,
                                       std::vector<double> b) {
  const std::size_t m = b.size();
  for (std::size_t k = 0; k < m; ++k) {
    std::size_t piv = k;
    for (std::size_t i = k + 1; i < m; ++i)
      if (std::abs(A[i][k]) > std::abs(A[piv][k])) piv = i;
    if (std::abs(A[piv][k]) < 1e-14) throw std::runtime_error("dense_solve: singular matrix");
    std::swap(A[k], A[piv]);
    std::swap(b[k], b[piv]);
    for (std::size_t i = k + 1; i < m; ++i) {
      double f = A[i][k] / A[k][k];
      if (f == 0.0) continue;
      for (std::size_t j = k; j < m; ++j) A[i][j] -= f * A[k][j];
      b[i] -= f * b[k];
    }
  }
  std::vector<double> x(m, 0.0);
  for (std::size_t i = m; i-- > 0;) {
    double s = b[i];
    for (std::size_t j = i + 1; j < m; ++j) s -= A[i][j] * x[j];
    x[i] = s / A[i][i];
  }
  return x;
}

// Direct Poisson solve of (1/4) Lap(phi) = g on the interior with Dirichlet
// values bc on the band, using the standard 5-point Laplacian and dense LU.
inline cma::GridFunction poisson_solve(const cma::GridFunction& g, const cma::BoundaryData& bc,
                                       const cma::DomainMask& mask) {
  if (mask.spec.n != 1) throw std::invalid_argument("poisson_solve: n = 1 only");
  const auto st = mask.spec.strides();
  const double h2 = mask.spec.h() * mask.spec.h();
  const std::size_t m = mask.interior.size();
  std::vector<std::int64_t> index(mask.spec.node_count(), -1);
  for (std::size_t k = 0; k < m; ++k) index[mask.interior[k]] = static_cast<std::int64_t>(k);

  cma::GridFunction bcv(mask.spec);
  for (std::size_t k = 0; k < mask.boundary.size(); ++k)
    bcv[mask.boundary[k]] = bc.values[k];

  std::vector<std::vector<double>> A(m, std::vector<double>(m, 0.0));
  std::vector<double> rhs(m, 0.0);
  const std::int64_t offs[4] = {st[0], -st[0], st[1], -st[1]};
  for (std::size_t k = 0; k < m; ++k) {
    std::uint32_t id = mask.interior[k];
    A[k][k] = -4.0 / (4.0 * h2);
    rhs[k] = g[id];
    for (auto off : offs) {
      std::uint32_t nb = static_cast<std::uint32_t>(id + off);
      if (index[nb] >= 0)
        A[k][static_cast<std::size_t>(index[nb])] += 1.0 / (4.0 * h2);
      else
        rhs[k] -= bcv[nb] / (4.0 * h2);
    }
  }
  auto x = dense_solve(std::move(A), std::move(rhs));
  cma::GridFunction phi(mask.spec);
  for (std::size_t k = 0; k < mask.boundary.size(); ++k)
    phi[mask.boundary[k]] = bc.values[k];
  for (std::size_t k = 0; k < m; ++k) phi[mask.interior[k]] = x[k];
  return phi;
}

// Random real polynomial of degree <= 2 in the 2n real coordinates.
struct RandomQuadratic {
  double c0 = 0.0;
  std::vector<double> lin;   // size 2n
  std::vector<double> quad;  // row-major symmetric 2n x 2n

  static RandomQuadratic draw(std::mt19937_64& rng, int dims, double scale) {
    std::uniform_real_distribution<double> u(-scale, scale);
    RandomQuadratic q;
    q.c0 = u(rng);
    q.lin.resize(dims);
    for (auto& v : q.lin) v = u(rng);
    q.quad.assign(dims * dims, 0.0);
    for (int i = 0; i < dims; ++i)
      for (int j = i; j < dims; ++j) q.quad[i * dims + j] = q.quad[j * dims + i] = u(rng);
    return q;
  }

  double eval(const std::array<cma::cplx, 2>& z, int n) const {
    double x[4] = {z[0].real(), z[0].imag(), n == 2 ? z[1].real() : 0.0,
                   n == 2 ? z[1].imag() : 0.0};
    int dims = 2 * n;
    double v = c0;
    for (int i = 0; i < dims; ++i) {
      v += lin[i] * x[i];
      for (int j = 0; j < dims; ++j) v += 0.5 * quad[i * dims + j] * x[i] * x[j];
    }
    return v;
  }
};

// Eigenvalues of a 2x2 Hermitian matrix from the characteristic polynomial,
// written without the library's closed forms.
inline std::pair<double, double> herm2_eigs(double a, double d, cma::cplx b) {
  double tr = a + d;
  double det = a * d - std::norm(b);
  double disc = std::sqrt(std::max(0.0, tr * tr - 4.0 * det));
  return {(tr - disc) / 2.0, (tr + disc) / 2.0};
}

}  // namespace oracles
