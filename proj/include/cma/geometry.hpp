#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "cma/calculus.hpp"
#include "cma/grid.hpp"
#include "cma/hermitian.hpp"

namespace cma {

// Reference forms of the rewritten equation: omega = A*H(rho-a) + H(psi1),
// theta = Fubini-Study Hessian; theta_s = omega + s*theta.
struct ReferenceForms {
  HermitianField omega;
  HermitianField theta;
  double A = 1.0;
  GridFunction psi1;
  double s = 0.0;

  Herm theta_s(std::uint32_t id) const { return omega.at(id) + theta.at(id) * s; }
  HermitianField theta_s_field() const;
};

// Right-hand-side family data: (w_E + s)/(w_F + s) * Omega_Y and the
// integrability certificate for e^{pf}.
struct DensitySpec {
  GridFunction omega_Y;  // base density, positive on interior
  GridFunction w_E;      // |sigma_E|^2_{h_E} >= 0
  GridFunction w_F;      // |sigma_F|^2_{h_F} >= 0
  double s = 0.0;
  GridFunction f;        // log-density
  double lambda = 0.0;   // multiplier in e^{f + lambda*phi}, 0 or 1
  double p = 2.0;        // integrability exponent, > 1
  double Q = 0.0;        // integrability bound
  GridFunction volume;   // ambient V-density, positive
};

struct Rational {
  long long num = 0;
  long long den = 1;
  double to_double() const { return static_cast<double>(num) / static_cast<double>(den); }
  bool operator==(const Rational& o) const { return num * o.den == o.num * den; }
};

struct KltData {
  int n = 2;
  int m = 2;
  Rational a;  // discrepancy of the cone resolution, a = n - m - 1
  bool is_klt = false;
  std::vector<Rational> a_list;  // a_i >= 0
  std::vector<Rational> b_list;  // 0 < b_j <= 1
};

struct BarrierWeight {
  GridFunction w_D;      // |sigma_D|^2_{h_D} >= 0
  double beta = 0.0;     // positivity margin in omega + H(log h_D) >= beta*theta
  HermitianField h_corr; // H(log h_D)
};

struct BlowupCheck {
  // entries of the n x n matrix [[1/2 + |u|^2, Y],[Y*, |z_i|^2 I]]
  Herm matrix;
  double lambda_min = 0.0;
  double schur_value = 0.0;  // 0.5 * |z_i|^2
  double det = 0.0;
};

// Constructs omega = A*H(rho-a) + H(psi1) and theta = H(log(1+|z|^2)),
// verifies omega PSD nodewise (lambda_min >= -1e-12). Throws with the worst
// node when A is too small for the given psi1.
ReferenceForms build_reference_forms(const DomainMask& mask, double A,
                                     const GridFunction& psi1, double s);

// nodewise (w_E + s)/(w_F + s) * Omega_Y; throws at s = 0 when w_F vanishes
GridFunction regularized_density(const DensitySpec& spec, double s, const DomainMask& mask);

KltData klt_discrepancy(int n, int m);

// matrix (from the blow-up chart positivity claim) for n = 2:
// [[1/2 + |u|^2, u zbar_i],[ubar z_i, |z_i|^2]]
BlowupCheck blowup_positivity(const cplx& z_i, const cplx& u);

// sum over interior of density^p * h^{2n}
double lp_norm_check(const GridFunction& density, double p, const DomainMask& mask);

// Verifies the Kodaira inequality omega + h_corr - beta*theta >= 0 nodewise
// and the support condition of w_D against w_E * w_F.
struct BarrierVerification {
  bool kodaira_ok = false;
  double worst_lambda = 0.0;
  bool support_ok = false;
};
BarrierVerification verify_barrier(const BarrierWeight& bw, const ReferenceForms& forms,
                                   const DensitySpec& dens, const DomainMask& mask,
                                   double support_tol = 1e-12);

}  // namespace cma
