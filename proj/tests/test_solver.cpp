#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "cma/calculus.hpp"
#include "cma/solver.hpp"
#include "oracles.hpp"

using namespace cma;

namespace {

DomainMask disc1(int N = 33) {
  return build_domain(GridSpec(1, N, 1.5), fubini_study_rho, std::log(2.0));
}
DomainMask ball2(int N = 17) {
  return build_domain(GridSpec(2, N, 1.2), fubini_study_rho, std::log(1.8));
}

GridFunction sample(const DomainMask& mask,
                    const std::function<double(const std::array<cplx, 2>&)>& f) {
  GridFunction g(mask.spec);
  for (std::uint32_t id = 0; id < mask.spec.node_count(); ++id)
    if (mask.active(id)) g[id] = f(mask.spec.point(id));
  return g;
}

BoundaryData boundary_of(const GridFunction& f, const DomainMask& mask) {
  BoundaryData bd;
  for (std::uint32_t id : mask.boundary) bd.values.push_back(f[id]);
  return bd;
}

double sup_diff(const GridFunction& a, const GridFunction& b, const DomainMask& mask) {
  double s = 0.0;
  for (std::uint32_t id : mask.interior) s = std::max(s, std::abs(a[id] - b[id]));
  return s;
}

}  // namespace

TEST_CASE("flat solve: reference density and zero data give the zero potential") {
  for (int n : {1, 2}) {
    DomainMask mask = n == 1 ? disc1() : ball2();
    ReferenceForms forms = build_reference_forms(mask, 2.0, GridFunction(mask.spec), 0.1);
    Rhs g = Rhs::fixed(theta_s_det(forms, mask));
    BoundaryData bc;
    bc.values.assign(mask.boundary.size(), 0.0);
    auto [phi, rep] = newton_solve(forms, g, bc, GridFunction(mask.spec), mask, SolveConfig{});
    CHECK(rep.converged);
    CHECK(rep.iterations <= 3);
    double sup = 0.0;
    for (std::uint32_t id : mask.interior) sup = std::max(sup, std::abs(phi[id]));
    CHECK(sup <= 1e-8);
  }
}

TEST_CASE("newton recovers a manufactured discrete-exact solution") {
  for (int n : {1, 2}) {
    DomainMask mask = n == 1 ? disc1() : ball2();
    ReferenceForms forms = build_reference_forms(mask, 2.0, GridFunction(mask.spec), 0.0);
    GridFunction star = sample(mask, [n](const std::array<cplx, 2>& z) {
      double v = 0.7 * std::norm(z[0]) + 0.2 * (z[0] * z[0]).real();
      if (n == 2) v += 0.5 * std::norm(z[1]) + 0.3 * (z[0] * std::conj(z[1])).real();
      return v;
    });
    HermitianField Hs = complex_hessian(star, mask);
    GridFunction g(mask.spec);
    for (std::uint32_t id : mask.interior) g[id] = (forms.theta_s(id) + Hs.at(id)).det();

    // start away from the solution but inside the admissible cone
    GridFunction init = star;
    for (std::uint32_t id : mask.interior)
      init[id] += 0.05 * (std::norm(mask.spec.point(id)[0]) - 1.0);

    auto [phi, rep] =
        newton_solve(forms, Rhs::fixed(g), boundary_of(star, mask), init, mask, SolveConfig{});
    CHECK(rep.converged);
    CHECK(sup_diff(phi, star, mask) <= 1e-7);
  }
}

TEST_CASE("exponential right-hand side: e^{phi} coupling") {
  DomainMask mask = disc1();
  ReferenceForms forms = build_reference_forms(mask, 2.0, GridFunction(mask.spec), 0.0);
  GridFunction star = sample(mask, [](const std::array<cplx, 2>& z) {
    return 0.5 * (std::norm(z[0]) - 1.0);
  });
  HermitianField Hs = complex_hessian(star, mask);
  GridFunction g0(mask.spec);
  for (std::uint32_t id : mask.interior)
    g0[id] = (forms.theta_s(id) + Hs.at(id)).det() * std::exp(-star[id]);

  ContinuationState st = homotopy_solve(forms, Rhs::exponential(g0, 1.0),
                                        boundary_of(star, mask), mask, {0.0, 0.5, 1.0},
                                        SolveConfig{});
  REQUIRE(st.ok);
  CHECK(sup_diff(st.phi, star, mask) <= 1e-7);
}

TEST_CASE("psh safeguard rejects an inadmissible start") {
  DomainMask mask = disc1();
  ReferenceForms forms = build_reference_forms(mask, 0.1, GridFunction(mask.spec), 0.0);
  GridFunction bad = sample(mask, [](const std::array<cplx, 2>& z) { return -std::norm(z[0]); });
  BoundaryData bc = boundary_of(bad, mask);
  Rhs g = Rhs::fixed(GridFunction(mask.spec, 1.0));
  auto [phi, rep] = newton_solve(forms, g, bc, bad, mask, SolveConfig{});
  CHECK(!rep.converged);
  CHECK(rep.message.find("safeguard") != std::string::npos);
}

TEST_CASE("poisson cross-check: n=1 solves match a direct dense solve") {
  DomainMask mask = disc1();
  ReferenceForms forms;
  forms.omega = HermitianField(mask.spec);
  forms.theta = HermitianField(mask.spec);
  forms.psi1 = GridFunction(mask.spec);
  forms.A = 0.0;
  forms.s = 0.0;

  std::mt19937_64 rng(42);
  for (int trial = 0; trial < 10; ++trial) {
    auto qg = oracles::RandomQuadratic::draw(rng, 2, 0.3);
    auto qb = oracles::RandomQuadratic::draw(rng, 2, 0.2);
    GridFunction g = sample(mask, [&](const std::array<cplx, 2>& z) {
      return std::exp(qg.eval(z, 1));
    });
    GridFunction psi = sample(mask, [&](const std::array<cplx, 2>& z) { return qb.eval(z, 1); });
    BoundaryData bc = boundary_of(psi, mask);

    Subsolution sub = find_subsolution(forms, g, mask, 1 << 20);
    ContinuationState st = homotopy_solve(forms, Rhs::fixed(g), bc, mask,
                                          {0.0, 0.25, 0.5, 0.75, 1.0}, SolveConfig{}, &sub.Phi);
    REQUIRE(st.ok);
    GridFunction direct = oracles::poisson_solve(g, bc, mask);
    CHECK(sup_diff(st.phi, direct, mask) <= 1e-6);
  }
}

TEST_CASE("subsolution search matches a power-of-two scan") {
  DomainMask mask = disc1();
  ReferenceForms forms = build_reference_forms(mask, 2.0, GridFunction(mask.spec), 0.0);
  GridFunction dens(mask.spec, 2.0);

  Subsolution sub = find_subsolution(forms, dens, mask, 1 << 20);
  CHECK(sub.margin >= 0.0);

  // brute-force scan over A = 2^0 .. 2^10 using only public pieces
  GridFunction rho_minus_a = sample(mask, [&](const std::array<cplx, 2>& z) {
    return fubini_study_rho(z, 1) - mask.a;
  });
  double best_pow = -1.0;
  for (int k = 0; k <= 10; ++k) {
    double A = std::pow(2.0, k);
    GridFunction Phi(mask.spec);
    for (std::uint32_t id = 0; id < mask.spec.node_count(); ++id)
      if (mask.active(id)) Phi[id] = A * rho_minus_a[id];
    SubsolutionCheck chk = verify_subsolution(forms, Phi, dens, mask, A * mask.band * 1.001);
    if (chk.ok) {
      best_pow = A;
      break;
    }
  }
  REQUIRE(best_pow > 0.0);
  CHECK(sub.A <= best_pow * 1.01);
  CHECK(best_pow <= 2.0 * sub.A * 1.01);  // scan granularity is a factor of 2

  SubsolutionCheck chk = verify_subsolution(forms, sub.Phi, dens, mask, sub.A * mask.band * 1.001);
  CHECK(chk.ok);
  CHECK(chk.margin >= 0.0);
  // the strict 1e-12 boundary tolerance rejects the band localization
  CHECK(!verify_subsolution(forms, sub.Phi, dens, mask).bc_ok);

  GridFunction neg(mask.spec, -1.0);
  CHECK_THROWS_AS(find_subsolution(forms, neg, mask, 1 << 20), std::invalid_argument);
  CHECK_THROWS_AS(find_subsolution(forms, GridFunction(mask.spec, 1e9), mask, 4.0),
                  std::runtime_error);
}

TEST_CASE("continuity path endpoint agrees with a direct solve") {
  DomainMask mask = disc1();
  ReferenceForms forms = build_reference_forms(mask, 2.0, GridFunction(mask.spec), 0.1);
  GridFunction g = sample(mask, [](const std::array<cplx, 2>& z) { return 0.5 + std::norm(z[0]); });
  Rhs target = Rhs::fixed(g);

  ContinuationState st =
      continuity_path(forms, target, mask, {0.0, 0.25, 0.5, 0.75, 1.0}, SolveConfig{});
  REQUIRE(st.ok);
  CHECK(st.t == 1.0);
  CHECK(st.history.size() >= 5);

  BoundaryData bc;
  bc.values.assign(mask.boundary.size(), 0.0);
  auto [direct, rep] = newton_solve(forms, target, bc, GridFunction(mask.spec), mask, SolveConfig{});
  REQUIRE(rep.converged);
  CHECK(sup_diff(st.phi, direct, mask) <= 2e-8);

  CHECK_THROWS_AS(continuity_path(forms, target, mask, {0.5, 1.0}, SolveConfig{}),
                  std::invalid_argument);
}

TEST_CASE("homotopy with ramped boundary data recovers a manufactured solution") {
  DomainMask mask = disc1();
  ReferenceForms forms = build_reference_forms(mask, 2.0, GridFunction(mask.spec), 0.0);
  GridFunction star = sample(mask, [](const std::array<cplx, 2>& z) {
    return 0.3 * std::norm(z[0]) + 0.1 * z[0].real();
  });
  HermitianField Hs = complex_hessian(star, mask);
  GridFunction g(mask.spec);
  for (std::uint32_t id : mask.interior) g[id] = (forms.theta_s(id) + Hs.at(id)).det();

  ContinuationState st = homotopy_solve(forms, Rhs::fixed(g), boundary_of(star, mask), mask,
                                        {0.0, 0.5, 1.0}, SolveConfig{});
  REQUIRE(st.ok);
  CHECK(sup_diff(st.phi, star, mask) <= 1e-7);
}

TEST_CASE("s-family limit diagnostics") {
  DomainMask mask = disc1();
  DensitySpec dens;
  dens.omega_Y = GridFunction(mask.spec, 1.0);
  dens.w_E = GridFunction(mask.spec, 1.0);
  dens.w_F = GridFunction(mask.spec, 1.0);
  dens.f = GridFunction(mask.spec);
  dens.lambda = 0.0;
  dens.volume = GridFunction(mask.spec, 1.0);

  ContinuationState st =
      s_family_limit(mask, GridFunction(mask.spec), 2.0, dens, {0.5, 0.1}, {0.0, 0.5, 1.0},
                     SolveConfig{});
  REQUIRE(st.ok);
  CHECK(st.sup_phi_per_s.size() == 2);
  CHECK(st.cauchy_sup_diffs.size() == 1);
  CHECK(st.s == 0.1);

  CHECK_THROWS_AS(s_family_limit(mask, GridFunction(mask.spec), 2.0, dens, {0.1, 0.5},
                                 {0.0, 1.0}, SolveConfig{}),
                  std::invalid_argument);
  CHECK_THROWS_AS(s_family_limit(mask, GridFunction(mask.spec), 2.0, dens, {}, {0.0, 1.0},
                                 SolveConfig{}),
                  std::invalid_argument);
}

TEST_CASE("barrier diagnostics") {
  DomainMask mask = disc1();
  ReferenceForms forms = build_reference_forms(mask, 2.0, GridFunction(mask.spec), 0.1);
  GridFunction phi = sample(mask, [](const std::array<cplx, 2>& z) {
    return 0.2 * (std::norm(z[0]) - 1.0);
  });
  BarrierWeight bw;
  bw.w_D = sample(mask, [](const std::array<cplx, 2>& z) { return std::norm(z[0]); });
  bw.beta = 0.5;
  bw.h_corr = HermitianField(mask.spec);

  BarrierReport rep = barrier_diagnostics(forms, phi, bw, 3.0, 2, mask);
  CHECK(std::isfinite(rep.sup_H));
  CHECK(rep.sup_grad_term >= 0.0);
  CHECK(std::isfinite(rep.sup_grad_term));

  CHECK_THROWS_AS(barrier_diagnostics(forms, phi, bw, 2.0, 2, mask), std::invalid_argument);
  CHECK_THROWS_AS(barrier_diagnostics(forms, phi, bw, 3.0, 0, mask), std::invalid_argument);
}
