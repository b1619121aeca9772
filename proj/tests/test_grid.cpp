#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <set>

#include "cma/grid.hpp"

using namespace cma;

TEST_CASE("grid spec validation") {
  CHECK_THROWS_AS(GridSpec(3, 33, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(GridSpec(1, 32, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(GridSpec(1, 3, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(GridSpec(1, 33, 0.0), std::invalid_argument);
  CHECK_NOTHROW(GridSpec(2, 17, 1.5));
}

TEST_CASE("pack/unpack roundtrip and point coordinates") {
  GridSpec spec(2, 9, 1.0);
  CHECK(spec.node_count() == 9u * 9 * 9 * 9);
  CHECK(spec.h() == doctest::Approx(0.25));

  for (std::uint32_t id : {0u, 1u, 80u, 6560u, 1234u}) {
    auto mi = spec.unpack(id);
    CHECK(spec.pack(mi) == id);
  }
  // x1 is the slowest axis
  auto st = spec.strides();
  CHECK(st[0] == 9 * 9 * 9);
  CHECK(st[3] == 1);

  std::array<int, 4> mi{4, 4, 4, 4};  // center
  auto z = spec.point(spec.pack(mi));
  CHECK(z[0] == cplx(0, 0));
  CHECK(z[1] == cplx(0, 0));
  mi = {5, 4, 4, 3};
  z = spec.point(spec.pack(mi));
  CHECK(z[0].real() == doctest::Approx(0.25));
  CHECK(z[1].imag() == doctest::Approx(-0.25));
}

TEST_CASE("stencil offsets cover axes and diagonal pairs") {
  GridSpec s1(1, 9, 1.0);
  CHECK(stencil_offsets(s1).size() == 8);  // 2*2 axis + 4*C(2,2)
  GridSpec s2(2, 9, 1.0);
  auto offs = stencil_offsets(s2);
  CHECK(offs.size() == 32);  // 2*4 axis + 4*C(4,2)
  std::set<std::int64_t> uniq(offs.begin(), offs.end());
  CHECK(uniq.size() == offs.size());
  CHECK(uniq.count(0) == 0);
}

TEST_CASE("fubini-study potential") {
  CHECK(fubini_study_rho({cplx(0, 0), cplx(0, 0)}, 2) == 0.0);
  CHECK(fubini_study_rho({cplx(1, 0), cplx(0, 0)}, 1) == doctest::Approx(std::log(2.0)));
  CHECK(fubini_study_rho({cplx(1, 0), cplx(0, 1)}, 2) == doctest::Approx(std::log(3.0)));
}

TEST_CASE("domain build: sublevel set with one-node band") {
  GridSpec spec(1, 33, 1.5);
  double a = std::log(1.0 + 1.0);  // unit disc
  DomainMask mask = build_domain(spec, fubini_study_rho, a);

  CHECK(!mask.interior.empty());
  CHECK(!mask.boundary.empty());

  // every stencil neighbor of an interior node is active
  auto offs = stencil_offsets(spec);
  for (std::uint32_t id : mask.interior)
    for (auto off : offs) CHECK(mask.active(static_cast<std::uint32_t>(id + off)));

  // interior nodes lie strictly below a - band; boundary nodes do not
  for (std::uint32_t id : mask.interior)
    CHECK(fubini_study_rho(spec.point(id), 1) < mask.a - mask.band);
  for (std::uint32_t id : mask.boundary)
    CHECK(fubini_study_rho(spec.point(id), 1) >= mask.a - mask.band);

  // the band is one node thick: every boundary node touches an interior node
  for (std::uint32_t id : mask.boundary) {
    bool touches = false;
    for (auto off : offs)
      touches |= mask.is_interior(static_cast<std::uint32_t>(id + off));
    CHECK(touches);
  }
}

TEST_CASE("domain build failure modes") {
  GridSpec spec(1, 33, 1.5);
  CHECK_THROWS_WITH_AS(build_domain(spec, fubini_study_rho, 1e-6), "build_domain: empty interior",
                       std::runtime_error);
  GridSpec tight(1, 33, 0.9);  // unit disc does not fit
  CHECK_THROWS_AS(build_domain(tight, fubini_study_rho, std::log(2.0)), std::runtime_error);
}

TEST_CASE("quintic cutoff") {
  CHECK(quintic_cutoff(-1.0) == 0.0);
  CHECK(quintic_cutoff(0.0) == 0.0);
  CHECK(quintic_cutoff(1.0) == 1.0);
  CHECK(quintic_cutoff(2.0) == 1.0);
  CHECK(quintic_cutoff(0.5) == doctest::Approx(0.5));
  // monotone on [0,1]
  double prev = 0.0;
  for (int i = 1; i <= 100; ++i) {
    double v = quintic_cutoff(i / 100.0);
    CHECK(v >= prev);
    prev = v;
  }
  // C^1 at the endpoints: one-sided slopes vanish
  double eps = 1e-5;
  CHECK(quintic_cutoff(eps) / eps == doctest::Approx(0.0).epsilon(1e-8));
  CHECK((1.0 - quintic_cutoff(1.0 - eps)) / eps == doctest::Approx(0.0).epsilon(1e-8));
}

TEST_CASE("boundary sampling and collar extension") {
  GridSpec spec(1, 33, 1.5);
  DomainMask mask = build_domain(spec, fubini_study_rho, std::log(2.0));
  auto psi = [](const std::array<cplx, 2>& z, int) { return z[0].real() + 2.0; };
  BoundaryData bd = sample_boundary(mask, psi);
  REQUIRE(bd.values.size() == mask.boundary.size());

  GridFunction psi1 = extend_boundary_data(bd, mask, fubini_study_rho, psi, 0.3);
  for (std::size_t k = 0; k < mask.boundary.size(); ++k)
    CHECK(psi1[mask.boundary[k]] == bd.values[k]);
  // vanishes well inside the collar
  std::uint32_t center = spec.pack({16, 16, 0, 0});
  CHECK(psi1[center] == 0.0);
  // collar wider than the domain is rejected
  CHECK_THROWS_AS(extend_boundary_data(bd, mask, fubini_study_rho, psi, 10.0),
                  std::runtime_error);
  CHECK_THROWS_AS(extend_boundary_data(bd, mask, fubini_study_rho, psi, 0.0),
                  std::invalid_argument);
}

TEST_CASE("field file roundtrip is bit exact") {
  GridSpec spec(1, 17, 1.2);
  DomainMask mask = build_domain(spec, fubini_study_rho, std::log(1.8));
  GridFunction f(spec);
  for (std::uint32_t id = 0; id < spec.node_count(); ++id)
    if (mask.active(id)) f[id] = std::sin(0.1 * id) * 1e3 + 1.0 / 3.0;

  auto tmp = std::filesystem::temp_directory_path() / "cma_field_test.field";
  save_field(tmp.string(), f, &mask);
  DomainMask mask2;
  GridFunction g = load_field(tmp.string(), &mask2);
  REQUIRE(g.spec == spec);
  for (std::uint32_t id = 0; id < spec.node_count(); ++id) CHECK(g[id] == f[id]);
  CHECK(mask2.interior == mask.interior);
  CHECK(mask2.boundary == mask.boundary);
  std::filesystem::remove(tmp);

  CHECK_THROWS_AS(load_field("/nonexistent/path.field"), std::runtime_error);
}
