#include "cma/singular.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace cma {

namespace {

double pole_distance(const std::array<cplx, 2>& z, const Pole& pole, int n) {
  double d2 = std::norm(z[0] - pole.p[0]);
  if (n == 2) d2 += std::norm(z[1] - pole.p[1]);
  return std::sqrt(d2);
}

double nearest_pole_distance(const std::array<cplx, 2>& z, const PoleSpec& spec, int n) {
  double d = std::numeric_limits<double>::infinity();
  for (const auto& pole : spec.poles) d = std::min(d, pole_distance(z, pole, n));
  return d;
}

double band_distance(const Pole& pole, const DomainMask& mask) {
  double d = std::numeric_limits<double>::infinity();
  for (std::uint32_t id : mask.boundary)
    d = std::min(d, pole_distance(mask.spec.point(id), pole, mask.spec.n));
  return d;
}

}  // namespace

void validate_pole_spec(const PoleSpec& spec, const DomainMask& mask) {
  if (spec.poles.empty()) throw std::invalid_argument("pole spec: no poles");
  const int n = mask.spec.n;
  const double h = mask.spec.h();
  for (std::size_t i = 0; i < spec.poles.size(); ++i) {
    if (spec.poles[i].s < 0.0) throw std::invalid_argument("pole spec: negative weight");
    if (band_distance(spec.poles[i], mask) < 5.0 * h)
      throw std::invalid_argument("pole spec: pole closer than 5h to the boundary band");
    for (std::size_t j = i + 1; j < spec.poles.size(); ++j)
      if (pole_distance(spec.poles[i].p, spec.poles[j], n) < 1e-12)
        throw std::invalid_argument("pole spec: coincident poles");
  }
  if (spec.deltas.size() < 1) throw std::invalid_argument("pole spec: empty delta schedule");
  for (std::size_t k = 0; k < spec.deltas.size(); ++k) {
    if (spec.deltas[k] <= 0.0) throw std::invalid_argument("pole spec: delta must be positive");
    if (k > 0 && spec.deltas[k] >= spec.deltas[k - 1])
      throw std::invalid_argument("pole spec: delta schedule must decrease");
  }
  if (spec.lambda != 0.0 && spec.lambda != 1.0)
    throw std::invalid_argument("pole spec: lambda must be 0 or 1");
}

GridFunction pole_ansatz(const PoleSpec& spec, double delta, const DomainMask& mask) {
  GridFunction P(mask.spec);
  const int n = mask.spec.n;
  for (std::uint32_t id = 0; id < mask.spec.node_count(); ++id) {
    if (!mask.active(id)) continue;
    auto z = mask.spec.point(id);
    double acc = 0.0;
    for (const auto& pole : spec.poles) {
      double w2 = std::norm(z[0] - pole.p[0]);
      if (n == 2) w2 += std::norm(z[1] - pole.p[1]);
      acc += pole.s * std::log(w2 + delta);
    }
    P[id] = acc;
  }
  return P;
}

HermitianField pole_ansatz_hessian(const PoleSpec& spec, double delta, const DomainMask& mask) {
  HermitianField H(mask.spec);
  const int n = mask.spec.n;
  for (std::uint32_t id : mask.interior) {
    auto z = mask.spec.point(id);
    Herm acc = Herm::zero(n);
    for (const auto& pole : spec.poles) {
      cplx w0 = z[0] - pole.p[0];
      cplx w1 = n == 2 ? z[1] - pole.p[1] : cplx(0, 0);
      double q = std::norm(w0) + std::norm(w1) + delta;
      double c = pole.s / (q * q);
      Herm t{n, c * (q - std::norm(w0)), n == 2 ? c * (q - std::norm(w1)) : 0.0,
             n == 2 ? -c * std::conj(w0) * w1 : cplx(0, 0)};
      acc = acc + t;
    }
    H.set(id, acc);
  }
  return H;
}

std::vector<AnnulusBand> dyadic_annuli(const PoleSpec& spec, const DomainMask& mask,
                                       double min_inner_r) {
  double d = std::numeric_limits<double>::infinity();
  for (const auto& pole : spec.poles) d = std::min(d, band_distance(pole, mask));
  double R0 = 0.5 * d;
  const int n = mask.spec.n;
  std::vector<AnnulusBand> out;
  for (int k = 0;; ++k) {
    AnnulusBand band;
    band.outer = R0 * std::pow(0.5, k);
    band.inner = 0.5 * band.outer;
    if (band.inner < min_inner_r) break;
    // keep only annuli that actually contain grid nodes; an empty annulus
    // would silently report a zero deviation
    bool populated = false;
    for (std::uint32_t id : mask.interior) {
      double r = nearest_pole_distance(mask.spec.point(id), spec, n);
      if (r >= band.inner && r <= band.outer) {
        populated = true;
        break;
      }
    }
    if (populated) out.push_back(band);
  }
  if (out.empty())
    throw std::runtime_error("dyadic_annuli: no annulus resolvable at this grid resolution");
  return out;
}

AsymptoticsReport verify_asymptotics(const std::vector<GridFunction>& phi_family,
                                     const PoleSpec& spec, const DomainMask& mask,
                                     double min_inner_r, double osc_bound, double growth_const) {
  if (phi_family.size() < 2)
    throw std::invalid_argument("verify_asymptotics: need at least two delta values");
  if (phi_family.size() != spec.deltas.size())
    throw std::invalid_argument("verify_asymptotics: family size does not match delta schedule");

  AsymptoticsReport rep;
  rep.deltas = spec.deltas;
  rep.annuli = dyadic_annuli(spec, mask, min_inner_r);
  rep.osc_bound = osc_bound;
  rep.growth_const = growth_const;

  const int n = mask.spec.n;
  for (std::size_t di = 0; di < spec.deltas.size(); ++di) {
    GridFunction P = pole_ansatz(spec, spec.deltas[di], mask);
    std::vector<double> sups(rep.annuli.size(), 0.0);
    for (std::uint32_t id : mask.interior) {
      double r = nearest_pole_distance(mask.spec.point(id), spec, n);
      for (std::size_t k = 0; k < rep.annuli.size(); ++k)
        if (r >= rep.annuli[k].inner && r <= rep.annuli[k].outer) {
          sups[k] = std::max(sups[k], std::abs(phi_family[di][id] - P[id]));
          break;
        }
    }
    rep.sup_dev.push_back(std::move(sups));
  }

  rep.cross_delta_osc = 0.0;
  for (std::size_t k = 0; k < rep.annuli.size(); ++k) {
    double mx = -std::numeric_limits<double>::infinity();
    double mn = std::numeric_limits<double>::infinity();
    for (std::size_t di = 0; di < rep.sup_dev.size(); ++di) {
      mx = std::max(mx, rep.sup_dev[di][k]);
      mn = std::min(mn, rep.sup_dev[di][k]);
    }
    rep.cross_delta_osc = std::max(rep.cross_delta_osc, mx - mn);
  }

  bool non_exploding = true;
  for (const auto& sups : rep.sup_dev)
    if (sups.back() > 2.0 * sups.front() + growth_const) non_exploding = false;
  rep.o1_flag = rep.cross_delta_osc <= osc_bound && non_exploding;
  return rep;
}

LogPoleResult solve_log_pole(const PoleSpec& spec, const DomainMask& mask,
                             const std::vector<double>& t_schedule, const SolveConfig& cfg,
                             double min_inner_r) {
  validate_pole_spec(spec, mask);
  LogPoleResult out;

  GridFunction prev_u;
  bool have_prev = false;
  for (double delta : spec.deltas) {
    GridFunction P = pole_ansatz(spec, delta, mask);

    ReferenceForms forms;
    forms.omega = pole_ansatz_hessian(spec, delta, mask);
    forms.theta = HermitianField(mask.spec);
    forms.psi1 = GridFunction(mask.spec);
    forms.A = 0.0;
    forms.s = 0.0;

    GridFunction g0(mask.spec);
    for (std::uint32_t id : mask.interior)
      g0[id] = std::exp(spec.f[id] + spec.lambda * P[id]) * spec.volume[id];
    Rhs rhs = Rhs::exponential(g0, spec.lambda);

    BoundaryData bc;
    bc.values.resize(mask.boundary.size());
    for (std::size_t k = 0; k < mask.boundary.size(); ++k)
      bc.values[k] = spec.psi.values[k] - P[mask.boundary[k]];

    GridFunction u;
    SolveReport rep;
    bool solved = false;
    if (have_prev) {
      auto [u_try, r] = newton_solve(forms, rhs, bc, prev_u, mask, cfg);
      if (r.converged) {
        u = std::move(u_try);
        rep = r;
        solved = true;
      }
    }
    if (!solved) {
      // strictly PSH seed; needed when the ansatz Hessian degenerates (s = 0)
      Subsolution sub = find_subsolution(forms, g0, mask, 1048576.0);
      ContinuationState st = homotopy_solve(forms, rhs, bc, mask, t_schedule, cfg, &sub.Phi);
      if (!st.ok) {
        out.ok = false;
        out.message = "solve_log_pole: failed at delta=" + std::to_string(delta) + "; " +
                      st.message;
        return out;
      }
      u = st.phi;
      rep.converged = true;
      if (!st.history.empty()) {
        rep.iterations = st.history.back().iterations;
        rep.residual = st.history.back().residual;
        rep.lambda_min = st.history.back().lambda_min;
      }
    }

    prev_u = u;
    have_prev = true;
    GridFunction phi(mask.spec);
    for (std::uint32_t id = 0; id < mask.spec.node_count(); ++id)
      if (mask.active(id)) phi[id] = u[id] + P[id];
    out.remainder.push_back(std::move(u));
    out.phi.push_back(std::move(phi));
    out.reports.push_back(rep);
  }

  if (out.phi.size() >= 2) out.report = verify_asymptotics(out.phi, spec, mask, min_inner_r);
  out.ok = true;
  return out;
}

namespace {

// nodes of the innermost two annuli whose nearest pole is the given one
std::vector<std::uint32_t> fit_region(const Pole& pole, const PoleSpec& spec,
                                      const DomainMask& mask, double min_inner_r) {
  auto annuli = dyadic_annuli(spec, mask, min_inner_r);
  double outer = annuli[annuli.size() >= 2 ? annuli.size() - 2 : 0].outer;
  double inner = annuli.back().inner;
  std::vector<std::uint32_t> nodes;
  const int n = mask.spec.n;
  for (std::uint32_t id : mask.interior) {
    auto z = mask.spec.point(id);
    double r = pole_distance(z, pole, n);
    if (r < inner || r > outer) continue;
    if (nearest_pole_distance(z, spec, n) < r - 1e-15) continue;
    nodes.push_back(id);
  }
  if (nodes.size() < 4)
    throw std::runtime_error("pole weight fit: too few nodes in the innermost annuli");
  return nodes;
}

}  // namespace

double fit_pole_weight(const GridFunction& phi, double delta, const Pole& pole,
                       const PoleSpec& spec, const DomainMask& mask, double min_inner_r) {
  auto nodes = fit_region(pole, spec, mask, min_inner_r);
  const int n = mask.spec.n;
  double mt = 0, mp = 0;
  std::vector<double> ts(nodes.size()), ps(nodes.size());
  for (std::size_t k = 0; k < nodes.size(); ++k) {
    double r = pole_distance(mask.spec.point(nodes[k]), pole, n);
    ts[k] = std::log(r * r + delta);
    ps[k] = phi[nodes[k]];
    mt += ts[k];
    mp += ps[k];
  }
  mt /= nodes.size();
  mp /= nodes.size();
  double num = 0, den = 0;
  for (std::size_t k = 0; k < nodes.size(); ++k) {
    num += (ts[k] - mt) * (ps[k] - mp);
    den += (ts[k] - mt) * (ts[k] - mt);
  }
  if (den == 0.0) throw std::runtime_error("pole weight fit: degenerate abscissa");
  return num / den;
}

double recover_pole_weight(const GridFunction& phi1, double d1, const GridFunction& phi2,
                           double d2, const Pole& pole, const PoleSpec& spec,
                           const DomainMask& mask, double min_inner_r) {
  auto nodes = fit_region(pole, spec, mask, min_inner_r);
  const int n = mask.spec.n;
  double num = 0, den = 0;
  for (std::uint32_t id : nodes) {
    double r = pole_distance(mask.spec.point(id), pole, n);
    double dt = std::log(r * r + d1) - std::log(r * r + d2);
    num += (phi1[id] - phi2[id]) * dt;
    den += dt * dt;
  }
  if (den == 0.0) throw std::runtime_error("pole weight recovery: degenerate abscissa");
  return num / den;
}

double admissible_density_exponent(double s, double lambda, int n) {
  double e = lambda * s + n - 1;
  if (e >= 0.0) return std::numeric_limits<double>::infinity();
  double sup_p = n / (-e);  // |z|^{2pe} integrable near 0 in C^n iff p < n/(-e)
  return sup_p > 1.0 ? sup_p : 0.0;
}

}  // namespace cma
