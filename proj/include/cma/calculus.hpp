#pragma once

#include <vector>

#include "cma/grid.hpp"
#include "cma/hermitian.hpp"

namespace cma {

// Convention: d/dz = (d/dx - i d/dy)/2, H_jk = d^2 phi / dz_j dz_bar_k, and the
// Monge-Ampere density of phi is det(H). Normalization factors between
// det(H) * Lebesgue and (i ddbar phi)^n are absorbed into supplied densities.

struct PshViolation {
  std::uint32_t node;
  double lambda_min;
};

struct PshReport {
  std::vector<PshViolation> violations;
  double worst = 0.0;  // most negative eigenvalue seen (0 if none)
  bool ok() const { return violations.empty(); }
};

// Centered second-order differences: 3-point pure, 4-point cross. Defined on
// interior nodes; every stencil neighbor of an interior node is active by
// construction of the mask (band width covers the diagonal reach).
HermitianField complex_hessian(const GridFunction& phi, const DomainMask& mask);

// nodewise det(H_ref + H(phi)) on interior nodes
GridFunction ma_density(const HermitianField& H_ref, const GridFunction& phi,
                        const DomainMask& mask);

PshReport psh_check(const HermitianField& H_ref, const GridFunction& phi,
                    const DomainMask& mask, double tol);

// sum over region of det of the PSD projection of (H_ref + H(phi)) * h^{2n}
double ma_mass(const HermitianField& H_ref, const GridFunction& phi,
               const DomainMask& mask, const std::vector<std::uint32_t>& region);
// same, from a precomputed total Hessian field
double ma_mass_field(const HermitianField& H_total, const DomainMask& mask,
                     const std::vector<std::uint32_t>& region);

// nodewise tr(H_total^{-1} H(eta)): derivative of log det at H_total in
// direction eta. Throws if H_total is singular/non-PD at some interior node.
GridFunction linearized_apply(const HermitianField& H_total, const GridFunction& eta,
                              const DomainMask& mask);

}  // namespace cma
