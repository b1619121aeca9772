#pragma once

#include <functional>
#include <string>
#include <vector>

#include "cma/calculus.hpp"
#include "cma/geometry.hpp"
#include "cma/grid.hpp"

namespace cma {

struct SolveConfig {
  double tau_res = 1e-8;       // sup-norm of log det(theta_s + H(phi)) - log g
  int max_newton = 50;
  double backtrack = 0.5;
  double min_step = 9.5367431640625e-07;  // 2^-20
  double eps_psh = 1e-10;      // reject steps with lambda_min below this
  double lin_tol = 1e-10;      // relative residual of the inner linear solve
  int lin_maxit = 0;           // 0 = choose from grid size
};

struct SolveReport {
  bool converged = false;
  double residual = 0.0;
  int iterations = 0;
  double lambda_min = 0.0;  // min ellipticity over nodes at the final iterate
  double wall_ms = 0.0;
  std::string message;
};

// Right-hand side g(x, phi) = g_fix(x) + g_exp(x) * exp(lambda * phi).
// Plain phi-independent densities use g_exp = g, lambda = 0 (or g_fix = g).
struct Rhs {
  GridFunction g_fix;
  GridFunction g_exp;
  double lambda = 0.0;

  static Rhs fixed(const GridFunction& g);
  static Rhs exponential(const GridFunction& g0, double lambda);
  double value(std::uint32_t id, double phi) const;
  double dlog_dphi(std::uint32_t id, double phi) const;
};

struct PathRecord {
  double s = 0.0;
  double t = 0.0;
  double sup_phi = 0.0;
  double inf_phi = 0.0;
  int iterations = 0;
  double residual = 0.0;
  double lambda_min = 0.0;
  double wall_ms = 0.0;
};

struct ContinuationState {
  double s = 0.0;
  double t = 0.0;
  GridFunction phi;
  std::vector<PathRecord> history;
  bool ok = false;
  std::string message;
  // s-family diagnostics
  std::vector<double> sup_phi_per_s;
  std::vector<double> cauchy_sup_diffs;  // sup|phi_{s_k} - phi_{s_{k+1}}| on w_D >= cutoff
  bool uniformity_flag = true;           // false when sup|phi_s| drifts beyond the factor
};

// Damped Newton for log det(theta_s + H(phi)) = log g(x, phi) with Dirichlet
// data bc on the band. init must satisfy bc on the band and the PSH safeguard.
std::pair<GridFunction, SolveReport> newton_solve(const ReferenceForms& forms, const Rhs& g,
                                                  const BoundaryData& bc, const GridFunction& init,
                                                  const DomainMask& mask, const SolveConfig& cfg);

struct Subsolution {
  double A = 0.0;
  GridFunction Phi;
  double margin = 0.0;  // min nodewise det excess
};

// Smallest A (doubling then bisection, relative tolerance 1e-2) such that
// Phi = A*(rho - a) satisfies det(theta_s + H(Phi)) >= density with
// theta_s + H(Phi) PSD and Phi <= 0.
Subsolution find_subsolution(const ReferenceForms& forms, const GridFunction& density,
                             const DomainMask& mask, double A_max);

struct SubsolutionCheck {
  bool ok = false;
  double margin = 0.0;
  bool det_ok = false, psd_ok = false, bc_ok = false;
};

// bc_slack absorbs the O(h) band localization of a subsolution given by an
// ambient formula vanishing on the true boundary surface.
SubsolutionCheck verify_subsolution(const ReferenceForms& forms, const GridFunction& Phi,
                                    const GridFunction& density, const DomainMask& mask,
                                    double bc_slack = 1e-12);

// Solves the t-family (1-t)*det(theta_s) + t*target with warm starts, zero
// boundary data, bisecting failed t-steps down to step 1e-4.
ContinuationState continuity_path(const ReferenceForms& forms, const Rhs& target,
                                  const DomainMask& mask, const std::vector<double>& t_schedule,
                                  const SolveConfig& cfg);

// Same t-homotopy but with boundary data ramped as t*bc; used by solves with
// nonzero Dirichlet data.
// warm (optional) seeds the path start; required strictly PSH seed when
// det(theta_s) degenerates (phi = 0 then fails the safeguard at the first step).
ContinuationState homotopy_solve(const ReferenceForms& forms, const Rhs& target,
                                 const BoundaryData& bc, const DomainMask& mask,
                                 const std::vector<double>& t_schedule, const SolveConfig& cfg,
                                 const GridFunction* warm = nullptr);

// Solves the regularized family along a decreasing s schedule, warm-starting,
// recording sup|phi_s| and the Cauchy rate restricted to {w_D >= cutoff}.
ContinuationState s_family_limit(const DomainMask& mask, const GridFunction& psi1, double A,
                                 const DensitySpec& dens, const std::vector<double>& s_schedule,
                                 const std::vector<double>& t_schedule, const SolveConfig& cfg,
                                 const GridFunction* w_D = nullptr, double wD_cutoff = 0.0,
                                 double uniformity_factor = 2.0);

struct BarrierReport {
  double sup_H = 0.0;          // sup of log tr_theta(omega') - B*phi + B*log w_D
  double sup_grad_term = 0.0;  // sup of |grad phi|^2 * w_D^N
};

BarrierReport barrier_diagnostics(const ReferenceForms& forms, const GridFunction& phi_s,
                                  const BarrierWeight& weight, double B, int N_exp,
                                  const DomainMask& mask);

// nodewise det(theta_s) as a grid function (interior)
GridFunction theta_s_det(const ReferenceForms& forms, const DomainMask& mask);

}  // namespace cma
