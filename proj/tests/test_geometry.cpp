#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "cma/expr.hpp"
#include "cma/geometry.hpp"
#include "cma/grid.hpp"
#include "oracles.hpp"

using namespace cma;

namespace {

DomainMask disc1() { return build_domain(GridSpec(1, 33, 1.5), fubini_study_rho, std::log(2.0)); }

GridFunction sample(const DomainMask& mask,
                    const std::function<double(const std::array<cplx, 2>&)>& f) {
  GridFunction g(mask.spec);
  for (std::uint32_t id = 0; id < mask.spec.node_count(); ++id)
    if (mask.active(id)) g[id] = f(mask.spec.point(id));
  return g;
}

}  // namespace

TEST_CASE("expression grammar") {
  std::array<cplx, 2> z{cplx(0.5, 0.25), cplx(-1.0, 2.0)};
  CHECK(Expr::parse("1+2*3").eval_real(z) == doctest::Approx(7.0));
  CHECK(Expr::parse("(1+2)*3").eval_real(z) == doctest::Approx(9.0));
  CHECK(Expr::parse("2^3^2").eval_real(z) == doctest::Approx(512.0));  // right assoc
  CHECK(Expr::parse("-2^2").eval_real(z) == doctest::Approx(4.0));  // unary binds tighter
  CHECK(Expr::parse("abs2(z1)").eval_real(z) == doctest::Approx(std::norm(z[0])));
  CHECK(Expr::parse("z1*zbar1").eval_real(z) == doctest::Approx(std::norm(z[0])));
  CHECK(Expr::parse("abs2(z2)+1").eval_real(z) == doctest::Approx(std::norm(z[1]) + 1));
  CHECK(Expr::parse("log(exp(2))").eval_real(z) == doctest::Approx(2.0));
  CHECK(Expr::parse("sqrt(abs2(z1))").eval_real(z) == doctest::Approx(std::abs(z[0])));
  CHECK(Expr::parse(" 1 / 4 ").eval_real(z) == doctest::Approx(0.25));

  CHECK(Expr::parse("z1").eval(z) == z[0]);
  CHECK(Expr::parse("zbar2").eval(z) == std::conj(z[1]));

  CHECK_THROWS_AS(Expr::parse("1+"), std::invalid_argument);
  CHECK_THROWS_AS(Expr::parse("foo(1)"), std::invalid_argument);
  CHECK_THROWS_AS(Expr::parse("(1"), std::invalid_argument);
  CHECK_THROWS_AS(Expr::parse("1 2"), std::invalid_argument);
  CHECK_THROWS_AS(Expr::parse("z1").eval_real(z), std::runtime_error);  // imaginary value
}

TEST_CASE("reference forms: construction and positivity check") {
  DomainMask mask = disc1();
  GridFunction psi1(mask.spec);
  ReferenceForms forms = build_reference_forms(mask, 2.0, psi1, 0.1);

  // theta is the discrete Fubini-Study Hessian
  double h = mask.spec.h();
  for (std::uint32_t id : mask.interior) {
    Herm exact = oracles::fs_hessian(mask.spec.point(id), 1);
    CHECK(std::abs(forms.theta.at(id).d0 - exact.d0) <= 5 * h * h);
    // omega = A * theta when psi1 = 0; theta_s = (A + s) * theta
    CHECK(forms.omega.at(id).d0 == doctest::Approx(2.0 * forms.theta.at(id).d0));
    CHECK(forms.theta_s(id).d0 == doctest::Approx(2.1 * forms.theta.at(id).d0));
  }
  CHECK(forms.theta_s_field().at(mask.interior[0]).d0 ==
        doctest::Approx(forms.theta_s(mask.interior[0]).d0));

  // strongly concave psi1 with tiny A cannot give a PSD omega
  GridFunction bad = sample(mask, [](const std::array<cplx, 2>& z) { return -5.0 * std::norm(z[0]); });
  CHECK_THROWS_AS(build_reference_forms(mask, 1e-6, bad, 0.0), std::runtime_error);
}

TEST_CASE("regularized density family") {
  DomainMask mask = disc1();
  DensitySpec d;
  d.omega_Y = GridFunction(mask.spec, 2.0);
  d.w_E = sample(mask, [](const std::array<cplx, 2>& z) { return std::norm(z[0]); });
  d.w_F = GridFunction(mask.spec, 1.0);

  GridFunction g = regularized_density(d, 0.5, mask);
  for (std::uint32_t id : mask.interior) {
    double expect = (std::norm(mask.spec.point(id)[0]) + 0.5) / 1.5 * 2.0;
    CHECK(g[id] == doctest::Approx(expect).epsilon(1e-12));
  }

  // s = 0 with vanishing w_F is rejected; negative s rejected
  DensitySpec dz = d;
  dz.w_F = sample(mask, [](const std::array<cplx, 2>& z) { return std::norm(z[0]); });
  CHECK_THROWS_AS(regularized_density(dz, 0.0, mask), std::runtime_error);
  CHECK_THROWS_AS(regularized_density(d, -0.1, mask), std::invalid_argument);
  CHECK_NOTHROW(regularized_density(dz, 0.01, mask));
}

TEST_CASE("klt discrepancy table") {
  struct Row {
    int n, m;
    long long a;
    bool klt;
  };
  for (auto [n, m, a, klt] : {Row{3, 2, 0, true}, Row{4, 2, 1, true}, Row{4, 3, 0, true},
                              Row{2, 2, -1, false}, Row{3, 3, -1, false}}) {
    KltData k = klt_discrepancy(n, m);
    CHECK(k.a.num == a);
    CHECK(k.a.den == 1);
    CHECK(k.is_klt == klt);
  }
  CHECK_THROWS_AS(klt_discrepancy(1, 2), std::invalid_argument);
  CHECK_THROWS_AS(klt_discrepancy(3, 1), std::invalid_argument);
}

TEST_CASE("blow-up chart positivity matrix") {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  for (int i = 0; i < 10000; ++i) {
    cplx z(u(rng), u(rng)), w(u(rng), u(rng));
    BlowupCheck c = blowup_positivity(z, w);
    CHECK(c.lambda_min >= -1e-12);
    // Schur identity: det = |z_i|^2 / 2
    CHECK(c.det == doctest::Approx(c.schur_value).epsilon(1e-12));
    CHECK(c.schur_value == doctest::Approx(0.5 * std::norm(z)).epsilon(1e-12));
  }
  // eigenvalue oracle on a fixed instance
  BlowupCheck c = blowup_positivity(cplx(1, 0), cplx(0, 1));
  auto [lo, hi] = oracles::herm2_eigs(c.matrix.d0, c.matrix.d1, c.matrix.off);
  CHECK(c.lambda_min == doctest::Approx(lo).epsilon(1e-12));
  CHECK(c.det == doctest::Approx(lo * hi).epsilon(1e-12));
}

TEST_CASE("lp norm quadrature") {
  DomainMask mask = disc1();
  GridFunction one(mask.spec, 1.0);
  double cell = std::pow(mask.spec.h(), 2);
  CHECK(lp_norm_check(one, 1.5, mask) ==
        doctest::Approx(mask.interior.size() * cell).epsilon(1e-12));
  CHECK_THROWS_AS(lp_norm_check(one, 1.0, mask), std::invalid_argument);

  // |z|^{-1} is L^{1.5} on the disc; the singular node is floored at grid
  // scale, contributing O(h^{1/2})
  double h = mask.spec.h();
  GridFunction d = sample(mask, [&](const std::array<cplx, 2>& z) {
    return 1.0 / std::max(0.5 * h, std::abs(z[0]));
  });
  double val = lp_norm_check(d, 1.5, mask);
  // exact integral of |z|^{-1.5} over the unit disc is 2*pi/0.5 = 4*pi
  CHECK(val > 2.0 * 3.14159265358979);
  CHECK(val < 8.0 * 3.14159265358979);
}

TEST_CASE("barrier verification") {
  DomainMask mask = disc1();
  ReferenceForms forms = build_reference_forms(mask, 2.0, GridFunction(mask.spec), 0.0);

  DensitySpec dens;
  dens.w_E = GridFunction(mask.spec, 1.0);
  dens.w_F = sample(mask, [](const std::array<cplx, 2>& z) { return std::norm(z[0]); });

  BarrierWeight bw;
  bw.w_D = dens.w_F;  // same zero set as w_E * w_F
  bw.beta = 0.5;
  bw.h_corr = HermitianField(mask.spec);

  BarrierVerification v = verify_barrier(bw, forms, dens, mask);
  CHECK(v.kodaira_ok);  // omega = 2 theta >= 0.5 theta
  CHECK(v.support_ok);

  BarrierWeight too_positive = bw;
  too_positive.beta = 50.0;
  BarrierVerification v2 = verify_barrier(too_positive, forms, dens, mask);
  // omega - 50 theta is negative somewhere
  CHECK(!v2.kodaira_ok);
  CHECK(v2.worst_lambda < 0.0);

  BarrierWeight wrong_support = bw;
  wrong_support.w_D = GridFunction(mask.spec, 1.0);
  CHECK(!verify_barrier(wrong_support, forms, dens, mask).support_ok);
}
