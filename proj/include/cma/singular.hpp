#pragma once

#include <array>
#include <string>
#include <utility>
#include <vector>

#include "cma/grid.hpp"
#include "cma/solver.hpp"

namespace cma {

struct Pole {
  std::array<cplx, 2> p{};  // location in C^n
  double s = 0.0;           // weight, > 0
};

struct PoleSpec {
  std::vector<Pole> poles;
  std::vector<double> deltas{1e-2, 1e-3, 1e-4};  // decreasing regularization
  double lambda = 0.0;                           // 0 or 1
  GridFunction f;                                // log-density
  GridFunction volume;                           // ambient density, positive
  BoundaryData psi;                              // Dirichlet data for phi
};

// Throws unless poles are pairwise distinct, at least 5h from the boundary
// band, weights positive, deltas positive decreasing.
void validate_pole_spec(const PoleSpec& spec, const DomainMask& mask);

// P_delta = sum_j s_j log(|z - p_j|^2 + delta) on active nodes.
GridFunction pole_ansatz(const PoleSpec& spec, double delta, const DomainMask& mask);

// Analytic complex Hessian of the ansatz:
// H(s log(|w|^2 + d)) = s [(|w|^2 + d) I - w wbar^T] / (|w|^2 + d)^2.
HermitianField pole_ansatz_hessian(const PoleSpec& spec, double delta, const DomainMask& mask);

struct AnnulusBand {
  double inner = 0.0, outer = 0.0;
};

// Dyadic annuli [2^{-k-1} R0, 2^{-k} R0] around the pole set with
// R0 = half the pole-to-band distance; stops when inner < min_inner_r and
// drops annuli containing no grid node.
std::vector<AnnulusBand> dyadic_annuli(const PoleSpec& spec, const DomainMask& mask,
                                       double min_inner_r);

struct AsymptoticsReport {
  std::vector<double> deltas;
  std::vector<AnnulusBand> annuli;
  std::vector<std::vector<double>> sup_dev;  // [delta][annulus] of |phi_d - P_d|
  double cross_delta_osc = 0.0;              // max over annuli of (max - min over delta)
  bool o1_flag = false;
  double osc_bound = 0.0;
  double growth_const = 0.0;
};

// Per-annulus deviation profile of the family against its ansatz; the O(1)
// flag combines bounded cross-delta oscillation with a non-exploding radial
// profile (innermost <= 2 * outermost + growth_const per delta).
AsymptoticsReport verify_asymptotics(const std::vector<GridFunction>& phi_family,
                                     const PoleSpec& spec, const DomainMask& mask,
                                     double min_inner_r, double osc_bound = 0.1,
                                     double growth_const = 5.0);

struct LogPoleResult {
  std::vector<GridFunction> phi;        // per delta
  std::vector<GridFunction> remainder;  // phi - P_delta
  std::vector<SolveReport> reports;
  AsymptoticsReport report;
  bool ok = false;
  std::string message;
};

// For each delta solves the remainder equation
//   det(H(u) + H(P_delta)) = e^{f + lambda (u + P_delta)} * volume
// with u = psi - P_delta on the band, by the t-homotopy with warm starts
// across delta, and assembles phi_delta = u + P_delta with its asymptotics.
LogPoleResult solve_log_pole(const PoleSpec& spec, const DomainMask& mask,
                             const std::vector<double>& t_schedule, const SolveConfig& cfg,
                             double min_inner_r);

// Least-squares fit of c in phi ~ c * log(|z - p|^2 + delta) + const over the
// innermost two annuli around the given pole.
double fit_pole_weight(const GridFunction& phi, double delta, const Pole& pole,
                       const PoleSpec& spec, const DomainMask& mask, double min_inner_r);

// Weight recovery by delta-differencing, which cancels the bounded remainder:
// c = (phi_{d1} - phi_{d2}) / (log(|w|^2+d1) - log(|w|^2+d2)) averaged over
// the innermost two annuli.
double recover_pole_weight(const GridFunction& phi1, double d1, const GridFunction& phi2,
                           double d2, const Pole& pole, const PoleSpec& spec,
                           const DomainMask& mask, double min_inner_r);

// Supremum of the integrability exponents p for a density behaving like
// |z|^{2(lambda*s + n - 1)} near a pole: infinity when the exponent is
// nonnegative, n / |exponent| otherwise, and 0 when no p > 1 is admissible.
double admissible_density_exponent(double s, double lambda, int n);

}  // namespace cma
