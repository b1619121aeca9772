#include "cma/geometry.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace cma {

HermitianField ReferenceForms::theta_s_field() const {
  HermitianField f = omega;
  f.add_scaled(theta, s);
  return f;
}

ReferenceForms build_reference_forms(const DomainMask& mask, double A,
                                     const GridFunction& psi1, double s) {
  const GridSpec& spec = mask.spec;
  GridFunction rho_minus_a(spec);
  for (std::uint32_t id = 0; id < spec.node_count(); ++id)
    if (mask.active(id)) rho_minus_a[id] = fubini_study_rho(spec.point(id), spec.n) - mask.a;

  GridFunction rho_only = rho_minus_a;  // H(rho - a) = H(rho)
  HermitianField Hrho = complex_hessian(rho_only, mask);
  HermitianField Hpsi1 = complex_hessian(psi1, mask);

  ReferenceForms forms;
  forms.A = A;
  forms.s = s;
  forms.psi1 = psi1;
  forms.omega = HermitianField(spec);
  forms.omega.add_scaled(Hrho, A);
  forms.omega.add_scaled(Hpsi1, 1.0);
  forms.theta = Hrho;  // theta is the Fubini-Study form

  double worst = 0.0;
  std::uint32_t worst_id = 0;
  for (std::uint32_t id : mask.interior) {
    double lm = forms.omega.at(id).lambda_min();
    if (lm < worst) {
      worst = lm;
      worst_id = id;
    }
  }
  if (worst < -1e-12)
    throw std::runtime_error("build_reference_forms: omega not PSD at node " +
                             std::to_string(worst_id) + " (lambda_min=" +
                             std::to_string(worst) + "), increase A");
  return forms;
}

GridFunction regularized_density(const DensitySpec& spec, double s, const DomainMask& mask) {
  if (s < 0) throw std::invalid_argument("regularized_density: s must be >= 0");
  GridFunction out(mask.spec);
  for (std::uint32_t id : mask.interior) {
    double denom = spec.w_F[id] + s;
    if (denom <= 0.0)
      throw std::runtime_error("regularized_density: w_F vanishes at node " +
                               std::to_string(id) + " with s = 0; regularize");
    out[id] = (spec.w_E[id] + s) / denom * spec.omega_Y[id];
    if (!std::isfinite(out[id]) || out[id] <= 0.0)
      throw std::runtime_error("regularized_density: nonpositive or non-finite value at node " +
                               std::to_string(id));
  }
  return out;
}

KltData klt_discrepancy(int n, int m) {
  if (n < 2 || m < 2) throw std::invalid_argument("klt_discrepancy: need n >= 2 and m >= 2");
  KltData k;
  k.n = n;
  k.m = m;
  k.a = Rational{static_cast<long long>(n) - m - 1, 1};
  k.is_klt = (m < n);  // equivalent to a > -1
  return k;
}

BlowupCheck blowup_positivity(const cplx& z_i, const cplx& u) {
  BlowupCheck out;
  out.matrix = Herm{2, 0.5 + std::norm(u), std::norm(z_i), u * std::conj(z_i)};
  out.lambda_min = out.matrix.lambda_min();
  out.schur_value = 0.5 * std::norm(z_i);
  out.det = out.matrix.det();
  return out;
}

double lp_norm_check(const GridFunction& density, double p, const DomainMask& mask) {
  if (p <= 1.0) throw std::invalid_argument("lp_norm_check: p must exceed 1");
  double cell = std::pow(mask.spec.h(), 2 * mask.spec.n);
  double sum = 0.0;
  for (std::uint32_t id : mask.interior) sum += std::pow(density[id], p) * cell;
  return sum;
}

BarrierVerification verify_barrier(const BarrierWeight& bw, const ReferenceForms& forms,
                                   const DensitySpec& dens, const DomainMask& mask,
                                   double support_tol) {
  BarrierVerification out;
  out.kodaira_ok = true;
  out.support_ok = true;
  for (std::uint32_t id : mask.interior) {
    Herm M = forms.omega.at(id) + bw.h_corr.at(id) - forms.theta.at(id) * bw.beta;
    double lm = M.lambda_min();
    out.worst_lambda = std::min(out.worst_lambda, lm);
    if (lm < -1e-10) out.kodaira_ok = false;
    bool d_zero = bw.w_D[id] <= support_tol;
    bool ef_zero = dens.w_E[id] * dens.w_F[id] <= support_tol;
    if (d_zero != ef_zero) out.support_ok = false;
  }
  return out;
}

}  // namespace cma
