#include "cma/calculus.hpp"

#include <cmath>
#include <stdexcept>

namespace cma {

namespace {

struct Stencil {
  std::array<std::int64_t, 4> s;  // axis strides
  double inv_h2;
  double inv_4h2;
};

inline double pure2(const std::vector<double>& v, std::uint32_t id, std::int64_t s,
                    double inv_h2) {
  return (v[id + s] - 2.0 * v[id] + v[id - s]) * inv_h2;
}

inline double cross2(const std::vector<double>& v, std::uint32_t id, std::int64_t sa,
                     std::int64_t sb, double inv_4h2) {
  return (v[id + sa + sb] - v[id + sa - sb] - v[id - sa + sb] + v[id - sa - sb]) * inv_4h2;
}

}  // namespace

HermitianField complex_hessian(const GridFunction& phi, const DomainMask& mask) {
  const GridSpec& spec = mask.spec;
  const double h = spec.h();
  Stencil st{spec.strides(), 1.0 / (h * h), 0.25 / (h * h)};
  const auto& v = phi.v;

  HermitianField H(spec);
  if (spec.n == 1) {
    const std::int64_t sx = st.s[0], sy = st.s[1];
    for (std::uint32_t id : mask.interior)
      H.d0[id] = 0.25 * (pure2(v, id, sx, st.inv_h2) + pure2(v, id, sy, st.inv_h2));
  } else {
    const std::int64_t sx1 = st.s[0], sy1 = st.s[1], sx2 = st.s[2], sy2 = st.s[3];
    for (std::uint32_t id : mask.interior) {
      H.d0[id] = 0.25 * (pure2(v, id, sx1, st.inv_h2) + pure2(v, id, sy1, st.inv_h2));
      H.d1[id] = 0.25 * (pure2(v, id, sx2, st.inv_h2) + pure2(v, id, sy2, st.inv_h2));
      double re = cross2(v, id, sx1, sx2, st.inv_4h2) + cross2(v, id, sy1, sy2, st.inv_4h2);
      double im = cross2(v, id, sx1, sy2, st.inv_4h2) - cross2(v, id, sy1, sx2, st.inv_4h2);
      H.offre[id] = 0.25 * re;
      H.offim[id] = 0.25 * im;
    }
  }
  return H;
}

GridFunction ma_density(const HermitianField& H_ref, const GridFunction& phi,
                        const DomainMask& mask) {
  HermitianField H = complex_hessian(phi, mask);
  GridFunction out(mask.spec);
  for (std::uint32_t id : mask.interior) out[id] = (H_ref.at(id) + H.at(id)).det();
  return out;
}

PshReport psh_check(const HermitianField& H_ref, const GridFunction& phi,
                    const DomainMask& mask, double tol) {
  HermitianField H = complex_hessian(phi, mask);
  PshReport rep;
  for (std::uint32_t id : mask.interior) {
    double lm = (H_ref.at(id) + H.at(id)).lambda_min();
    if (lm < -tol) {
      rep.violations.push_back({id, lm});
      rep.worst = std::min(rep.worst, lm);
    }
  }
  return rep;
}

double ma_mass_field(const HermitianField& H_total, const DomainMask& mask,
                     const std::vector<std::uint32_t>& region) {
  const double h = mask.spec.h();
  double cell = std::pow(h, 2 * mask.spec.n);
  double m = 0.0;
  for (std::uint32_t id : region) {
    if (!mask.is_interior(id)) throw std::invalid_argument("ma_mass: region node outside interior");
    m += H_total.at(id).det_psd() * cell;
  }
  return m;
}

double ma_mass(const HermitianField& H_ref, const GridFunction& phi,
               const DomainMask& mask, const std::vector<std::uint32_t>& region) {
  HermitianField H = complex_hessian(phi, mask);
  H.add_scaled(H_ref, 1.0);
  return ma_mass_field(H, mask, region);
}

GridFunction linearized_apply(const HermitianField& H_total, const GridFunction& eta,
                              const DomainMask& mask) {
  HermitianField H = complex_hessian(eta, mask);
  GridFunction out(mask.spec);
  for (std::uint32_t id : mask.interior) {
    Herm M = H_total.at(id);
    double lm = M.lambda_min();
    if (!(lm > 0.0) || M.det() <= 0.0)
      throw std::runtime_error("linearized_apply: singular node " + std::to_string(id) +
                               " lambda_min=" + std::to_string(lm));
    out[id] = M.inv_weighted_trace(H.at(id));
  }
  return out;
}

}  // namespace cma
