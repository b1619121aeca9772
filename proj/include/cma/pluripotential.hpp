#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "cma/calculus.hpp"
#include "cma/grid.hpp"
#include "cma/hermitian.hpp"

namespace cma {

enum class CapacityMethod { envelope, bruteforce };

// Throws unless K is nonempty and every node of K is interior with all stencil
// neighbors interior (one-node buffer from the boundary band).
void validate_capacity_query(const std::vector<std::uint32_t>& K, const DomainMask& mask);

struct ExtremalResult {
  GridFunction ustar;
  double capacity = 0.0;
  double support_defect = 0.0;  // mass where ustar < -1e-6, beyond one ring of K
  int sweeps = 0;
};

// Discrete relative extremal function of (K, domain) w.r.t. theta: the largest
// u in [-1,0] with u = -1 on K, u = 0 on the band, satisfying the four-point
// submean inequality along every stencil complex line
//   u(x) <= 1/4 [u(x+he)+u(x-he)+u(x+ihe)+u(x-ihe)] + h^2 theta_{e ebar}(x).
// Computed by monotone Gauss-Seidel sweeps with alternating orders.
ExtremalResult extremal_function(const std::vector<std::uint32_t>& K, const HermitianField& theta,
                                 const DomainMask& mask, double sweep_tol = 1e-9,
                                 int max_sweeps = 100000);

// Monge-Ampere capacity of K: mass of the extremal function on K, or (tiny
// grids, interior <= 30 nodes) a direct maximization over the discrete
// admissible class by projected coordinate ascent from 64 random starts.
double capacity(const std::vector<std::uint32_t>& K, const HermitianField& theta,
                const DomainMask& mask, CapacityMethod method = CapacityMethod::envelope,
                std::uint64_t seed = 1234);

struct ComparisonReport {
  bool preconditions_ok = false;
  std::string note;
  double lhs = 0.0;   // mass of v on {u < v}
  double rhs = 0.0;   // mass of u on {u < v}
  double slack = 0.0;
  double tol = 0.0;
  std::size_t set_size = 0;
  bool pass = false;
};

// Comparison principle check: mass of the larger potential on {u < v} does not
// exceed the mass of the smaller one, up to the quadrature tolerance
// tol = 50 h^2 |{u<v}| h^{2n}.
ComparisonReport check_comparison(const GridFunction& u, const GridFunction& v,
                                  const HermitianField& theta, const DomainMask& mask);

struct SublevelStats {
  std::vector<double> levels;
  std::vector<std::vector<std::uint32_t>> sets;  // U(l) = {phi < -l}
  std::vector<double> a;  // capacity of U(l)
  std::vector<double> b;  // mass of phi on U(l)
  std::vector<double> F;  // a^{1/n}
  std::vector<bool> skipped;  // level set touched the boundary band buffer
  int n = 1;
  double h = 0.0;
};

SublevelStats sublevel_stats(const GridFunction& phi, const HermitianField& theta_s,
                             const std::vector<double>& levels, const DomainMask& mask);

struct KolodziejReport {
  struct Entry {
    double l = 0.0, t = 0.0;
    double lhs = 0.0;  // t^n a(l+t)
    double rhs = 0.0;  // b(l) + tol
    bool ok = false;
  };
  std::vector<Entry> entries;
  bool all_ok = true;
  double C_fit = 0.0;           // smallest C with b(l) <= C a(l)^2 over sampled levels
  double decay_exponent = 0.0;  // fitted p in a(l+1) ~ l^{-p}
  bool monotone_decay = true;
};

KolodziejReport check_kolodziej_inequalities(const SublevelStats& stats, double t, double C_vol);

struct DeGiorgiCertificate {
  double A = 0.0, alpha = 0.0;
  bool hypothesis_verified = false;
  double witness_l = 0.0, witness_r = 0.0;  // violating pair when not verified
  bool has_l0 = false;
  double l0 = 0.0;  // smallest sampled l with F(l)^alpha <= 1/(2A)
  double S = 0.0;   // 2 + l0
  bool vanishes_beyond_S = false;
  double first_zero_level = 0.0;
  bool has_zero = false;
};

// Scans all sampled pairs (l, l+r), r in (0,1], for r F(l+r) <= A F(l)^{1+alpha}
// and reads off the vanishing threshold S = 2 + l0.
DeGiorgiCertificate degiorgi_bound(const std::vector<std::pair<double, double>>& F_samples,
                                   double A, double alpha);

struct C0Certificate {
  bool certified = false;
  double S = 0.0;
  bool bound_holds = false;  // inf phi >= -S - 10 h^2
  double inf_phi = 0.0;
  DeGiorgiCertificate dg;
};

C0Certificate c0_certificate(const SublevelStats& stats, double A_fit, const GridFunction& phi,
                             const DomainMask& mask, double alpha = 1.0);

struct CapacityConvergence {
  std::vector<double> s;
  std::vector<double> cap_s;
  double cap_omega = 0.0;
  bool monotone = true;   // nonincreasing along the given schedule
  double final_gap = 0.0;
};

// Capacity of K for omega + s*theta along the schedule against the s = 0 value.
CapacityConvergence capacity_convergence(const std::vector<std::uint32_t>& K,
                                         const HermitianField& omega, const HermitianField& theta,
                                         const std::vector<double>& s_schedule,
                                         const DomainMask& mask);

}  // namespace cma
