#include "cma/solver.hpp"

#include "cma/calculus.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace cma {

namespace {

using clock_t_ = std::chrono::steady_clock;

double ms_since(clock_t_::time_point t0) {
  return std::chrono::duration<double, std::milli>(clock_t_::now() - t0).count();
}

double dot_interior(const DomainMask& mask, const std::vector<double>& a,
                    const std::vector<double>& b) {
  double s = 0.0;
  for (std::uint32_t id : mask.interior) s += a[id] * b[id];
  return s;
}

double sup_interior(const DomainMask& mask, const std::vector<double>& a) {
  double s = 0.0;
  for (std::uint32_t id : mask.interior) s = std::max(s, std::abs(a[id]));
  return s;
}

// Frozen-coefficient linearized operator: tr(M^{-1} H(.)) - c(x) * (.), with
// per-node inverse entries cached.
struct LinOp {
  const DomainMask& mask;
  std::array<std::int64_t, 4> st;
  double inv_h2, inv_4h2;
  int n;
  // inverse entries of M: for n=1 iv0 = 1/M; for n=2 the full inverse
  std::vector<double> iv0, iv1, ivre, ivim;
  std::vector<double> c0;    // zeroth-order coefficient (>= 0)
  std::vector<double> diag;  // Jacobi diagonal

  LinOp(const DomainMask& m, const HermitianField& M, const std::vector<double>& c)
      : mask(m), st(m.spec.strides()), n(m.spec.n), c0(c) {
    double h = m.spec.h();
    inv_h2 = 1.0 / (h * h);
    inv_4h2 = 0.25 * inv_h2;
    std::size_t total = m.spec.node_count();
    iv0.assign(total, 0.0);
    diag.assign(total, 1.0);
    if (n == 2) {
      iv1.assign(total, 0.0);
      ivre.assign(total, 0.0);
      ivim.assign(total, 0.0);
    }
    for (std::uint32_t id : m.interior) {
      Herm inv = M.at(id).inverse();
      iv0[id] = inv.d0;
      double tr = inv.d0;
      if (n == 2) {
        iv1[id] = inv.d1;
        ivre[id] = inv.off.real();
        ivim[id] = inv.off.imag();
        tr += inv.d1;
      }
      diag[id] = -tr * inv_h2 - c0[id];
    }
  }

  void apply(const std::vector<double>& x, std::vector<double>& out) const {
    if (n == 1) {
      const std::int64_t sx = st[0], sy = st[1];
      for (std::uint32_t id : mask.interior) {
        double lap = (x[id + sx] + x[id - sx] + x[id + sy] + x[id - sy] - 4.0 * x[id]) * inv_h2;
        out[id] = iv0[id] * 0.25 * lap - c0[id] * x[id];
      }
    } else {
      const std::int64_t sx1 = st[0], sy1 = st[1], sx2 = st[2], sy2 = st[3];
      for (std::uint32_t id : mask.interior) {
        double h00 = 0.25 * ((x[id + sx1] - 2 * x[id] + x[id - sx1]) +
                             (x[id + sy1] - 2 * x[id] + x[id - sy1])) * inv_h2;
        double h11 = 0.25 * ((x[id + sx2] - 2 * x[id] + x[id - sx2]) +
                             (x[id + sy2] - 2 * x[id] + x[id - sy2])) * inv_h2;
        double cxx = (x[id + sx1 + sx2] - x[id + sx1 - sx2] - x[id - sx1 + sx2] + x[id - sx1 - sx2]);
        double cyy = (x[id + sy1 + sy2] - x[id + sy1 - sy2] - x[id - sy1 + sy2] + x[id - sy1 - sy2]);
        double cxy = (x[id + sx1 + sy2] - x[id + sx1 - sy2] - x[id - sx1 + sy2] + x[id - sx1 - sy2]);
        double cyx = (x[id + sy1 + sx2] - x[id + sy1 - sx2] - x[id - sy1 + sx2] + x[id - sy1 - sx2]);
        double hre = 0.25 * (cxx + cyy) * inv_4h2;
        double him = 0.25 * (cxy - cyx) * inv_4h2;
        out[id] = iv0[id] * h00 + iv1[id] * h11 + 2.0 * (ivre[id] * hre + ivim[id] * him) -
                  c0[id] * x[id];
      }
    }
  }
};

// Preconditioned BiCGStab; x and b are full-grid vectors, zero off interior.
bool bicgstab(const LinOp& A, const std::vector<double>& b, std::vector<double>& x,
              double rel_tol, int maxit) {
  const DomainMask& mask = A.mask;
  std::size_t total = b.size();
  std::vector<double> r(total, 0.0), rhat, p(total, 0.0), v(total, 0.0), s(total, 0.0),
      t(total, 0.0), phat(total, 0.0), shat(total, 0.0);

  A.apply(x, r);
  for (std::uint32_t id : mask.interior) r[id] = b[id] - r[id];
  rhat = r;
  double bnorm = std::sqrt(dot_interior(mask, b, b));
  if (bnorm == 0.0) {
    std::fill(x.begin(), x.end(), 0.0);
    return true;
  }
  double tol = rel_tol * bnorm;
  double rho = 1.0, alpha = 1.0, omega = 1.0;

  double rnorm = std::sqrt(dot_interior(mask, r, r));
  if (rnorm <= tol) return true;

  for (int it = 0; it < maxit; ++it) {
    double rho1 = dot_interior(mask, rhat, r);
    if (rho1 == 0.0) return rnorm <= tol * 1e3;
    if (it == 0) {
      p = r;
    } else {
      double beta = (rho1 / rho) * (alpha / omega);
      for (std::uint32_t id : mask.interior) p[id] = r[id] + beta * (p[id] - omega * v[id]);
    }
    rho = rho1;
    for (std::uint32_t id : mask.interior) phat[id] = p[id] / A.diag[id];
    A.apply(phat, v);
    double rv = dot_interior(mask, rhat, v);
    if (rv == 0.0) return false;
    alpha = rho1 / rv;
    for (std::uint32_t id : mask.interior) s[id] = r[id] - alpha * v[id];
    double snorm = std::sqrt(dot_interior(mask, s, s));
    if (snorm <= tol) {
      for (std::uint32_t id : mask.interior) x[id] += alpha * phat[id];
      return true;
    }
    for (std::uint32_t id : mask.interior) shat[id] = s[id] / A.diag[id];
    A.apply(shat, t);
    double tt = dot_interior(mask, t, t);
    if (tt == 0.0) return false;
    omega = dot_interior(mask, t, s) / tt;
    for (std::uint32_t id : mask.interior) {
      x[id] += alpha * phat[id] + omega * shat[id];
      r[id] = s[id] - omega * t[id];
    }
    rnorm = std::sqrt(dot_interior(mask, r, r));
    if (rnorm <= tol) return true;
    if (omega == 0.0) return false;
  }
  return rnorm <= tol * 1e3;  // accept a mildly inexact step; damping guards it
}

struct ResidualEval {
  double sup_res = 0.0;
  double lambda_min = std::numeric_limits<double>::infinity();
  bool pd = true;
};

ResidualEval eval_residual(const HermitianField& T, const GridFunction& phi, const Rhs& g,
                           const DomainMask& mask, HermitianField& M_out,
                           std::vector<double>& res_out) {
  HermitianField H = complex_hessian(phi, mask);
  H.add_scaled(T, 1.0);
  M_out = std::move(H);
  ResidualEval ev;
  for (std::uint32_t id : mask.interior) {
    Herm M = M_out.at(id);
    double lm = M.lambda_min();
    ev.lambda_min = std::min(ev.lambda_min, lm);
    double det = M.det();
    if (det <= 0.0 || lm <= 0.0) {
      ev.pd = false;
      res_out[id] = 0.0;
      continue;
    }
    double gv = g.value(id, phi[id]);
    res_out[id] = std::log(det) - std::log(gv);
    ev.sup_res = std::max(ev.sup_res, std::abs(res_out[id]));
  }
  return ev;
}

}  // namespace

Rhs Rhs::fixed(const GridFunction& g) {
  Rhs r;
  r.g_fix = g;
  r.g_exp = GridFunction(g.spec);
  r.lambda = 0.0;
  return r;
}

Rhs Rhs::exponential(const GridFunction& g0, double lambda) {
  Rhs r;
  r.g_fix = GridFunction(g0.spec);
  r.g_exp = g0;
  r.lambda = lambda;
  return r;
}

double Rhs::value(std::uint32_t id, double phi) const {
  return g_fix[id] + g_exp[id] * std::exp(lambda * phi);
}

double Rhs::dlog_dphi(std::uint32_t id, double phi) const {
  if (lambda == 0.0) return 0.0;
  double e = g_exp[id] * std::exp(lambda * phi);
  return lambda * e / (g_fix[id] + e);
}

GridFunction theta_s_det(const ReferenceForms& forms, const DomainMask& mask) {
  GridFunction out(mask.spec);
  for (std::uint32_t id : mask.interior) out[id] = forms.theta_s(id).det();
  return out;
}

std::pair<GridFunction, SolveReport> newton_solve(const ReferenceForms& forms, const Rhs& g,
                                                  const BoundaryData& bc, const GridFunction& init,
                                                  const DomainMask& mask, const SolveConfig& cfg) {
  auto t0 = clock_t_::now();
  const std::size_t total = mask.spec.node_count();
  HermitianField T = forms.theta_s_field();

  GridFunction phi = init;
  for (std::size_t k = 0; k < mask.boundary.size(); ++k) phi[mask.boundary[k]] = bc.values[k];

  SolveReport rep;
  HermitianField M(mask.spec);
  std::vector<double> res(total, 0.0);
  ResidualEval ev = eval_residual(T, phi, g, mask, M, res);
  if (!ev.pd || ev.lambda_min < cfg.eps_psh) {
    rep.message = "newton_solve: initial iterate violates the PSH safeguard (lambda_min=" +
                  std::to_string(ev.lambda_min) + "); provide a subsolution-based init";
    rep.lambda_min = ev.lambda_min;
    rep.residual = ev.sup_res;
    rep.wall_ms = ms_since(t0);
    return {phi, rep};
  }

  int maxlin = cfg.lin_maxit > 0
                   ? cfg.lin_maxit
                   : std::max(500, 12 * mask.spec.N * (mask.spec.n == 2 ? 4 : 1));

  std::vector<double> rhs_vec(total, 0.0), delta(total, 0.0), cdiag(total, 0.0);
  GridFunction trial(mask.spec);

  for (int iter = 0; iter <= cfg.max_newton; ++iter) {
    rep.residual = ev.sup_res;
    rep.lambda_min = ev.lambda_min;
    rep.iterations = iter;
    if (ev.sup_res <= cfg.tau_res) {
      rep.converged = true;
      break;
    }
    if (iter == cfg.max_newton) {
      rep.message = "newton_solve: no convergence in max iterations";
      break;
    }

    for (std::uint32_t id : mask.interior) {
      cdiag[id] = g.dlog_dphi(id, phi[id]);
      rhs_vec[id] = -res[id];
    }
    LinOp A(mask, M, cdiag);
    std::fill(delta.begin(), delta.end(), 0.0);
    bicgstab(A, rhs_vec, delta, cfg.lin_tol, maxlin);

    double alpha = 1.0;
    bool accepted = false;
    HermitianField Mt(mask.spec);
    std::vector<double> rest(total, 0.0);
    while (alpha >= cfg.min_step) {
      trial.v = phi.v;
      for (std::uint32_t id : mask.interior) trial[id] += alpha * delta[id];
      ResidualEval evt = eval_residual(T, trial, g, mask, Mt, rest);
      if (evt.pd && evt.lambda_min >= cfg.eps_psh && evt.sup_res < ev.sup_res) {
        phi.v = trial.v;
        ev = evt;
        M = std::move(Mt);
        Mt = HermitianField(mask.spec);
        res = rest;
        accepted = true;
        break;
      }
      alpha *= cfg.backtrack;
    }
    if (!accepted) {
      rep.message = "newton_solve: damping stalled (PSH safeguard or non-decreasing residual)";
      rep.residual = ev.sup_res;
      rep.lambda_min = ev.lambda_min;
      break;
    }
  }
  rep.wall_ms = ms_since(t0);
  return {phi, rep};
}

Subsolution find_subsolution(const ReferenceForms& forms, const GridFunction& density,
                             const DomainMask& mask, double A_max) {
  for (std::uint32_t id : mask.interior)
    if (density[id] <= 0.0)
      throw std::invalid_argument("find_subsolution: density must be positive on interior");

  GridFunction rho_minus_a(mask.spec);
  for (std::uint32_t id = 0; id < mask.spec.node_count(); ++id)
    if (mask.active(id))
      rho_minus_a[id] = fubini_study_rho(mask.spec.point(id), mask.spec.n) - mask.a;
  HermitianField Hrho = complex_hessian(rho_minus_a, mask);

  auto margin_at = [&](double A) {
    double margin = std::numeric_limits<double>::infinity();
    for (std::uint32_t id : mask.interior) {
      Herm M = forms.theta_s(id) + Hrho.at(id) * A;
      if (M.lambda_min() < 0.0) return -std::numeric_limits<double>::infinity();
      margin = std::min(margin, M.det() - density[id]);
    }
    return margin;
  };

  double A_hi = 1.0;
  while (margin_at(A_hi) < 0.0) {
    A_hi *= 2.0;
    if (A_hi > A_max)
      throw std::runtime_error("find_subsolution: no admissible A below A_max");
  }
  double A_lo = A_hi == 1.0 ? 0.0 : A_hi / 2.0;
  while (A_hi - A_lo > 1e-2 * A_hi) {
    double mid = 0.5 * (A_lo + A_hi);
    if (margin_at(mid) >= 0.0)
      A_hi = mid;
    else
      A_lo = mid;
  }

  Subsolution sub;
  sub.A = A_hi;
  sub.Phi = GridFunction(mask.spec);
  for (std::uint32_t id = 0; id < mask.spec.node_count(); ++id)
    if (mask.active(id)) sub.Phi[id] = sub.A * rho_minus_a[id];
  sub.margin = margin_at(sub.A);
  return sub;
}

SubsolutionCheck verify_subsolution(const ReferenceForms& forms, const GridFunction& Phi,
                                    const GridFunction& density, const DomainMask& mask,
                                    double bc_slack) {
  SubsolutionCheck out;
  HermitianField H = complex_hessian(Phi, mask);
  out.det_ok = true;
  out.psd_ok = true;
  out.margin = std::numeric_limits<double>::infinity();
  for (std::uint32_t id : mask.interior) {
    Herm M = forms.theta_s(id) + H.at(id);
    if (M.lambda_min() < 0.0) out.psd_ok = false;
    double excess = M.det() - density[id];
    out.margin = std::min(out.margin, excess);
    if (excess < 0.0) out.det_ok = false;
  }
  out.bc_ok = true;
  for (std::uint32_t id : mask.boundary)
    if (std::abs(Phi[id]) > bc_slack) out.bc_ok = false;
  out.ok = out.det_ok && out.psd_ok && out.bc_ok;
  return out;
}

ContinuationState homotopy_solve(const ReferenceForms& forms, const Rhs& target,
                                 const BoundaryData& bc, const DomainMask& mask,
                                 const std::vector<double>& t_schedule, const SolveConfig& cfg,
                                 const GridFunction* warm) {
  if (t_schedule.empty() || t_schedule.front() != 0.0)
    throw std::invalid_argument("homotopy: t schedule must start at 0");

  // A warm seed is absorbed as a change of variables v = phi - seed: the
  // reference form gains the seed's Hessian, the exponential density picks up
  // e^{lambda seed}, and the boundary data shifts by the seed's band values.
  // The path then starts from the exact t = 0 solution v = 0 with no jump at
  // the band, and stays inside the safeguard whenever the seed is strictly
  // admissible.
  ReferenceForms eff = forms;
  Rhs target_eff = target;
  BoundaryData bc_eff = bc;
  if (warm) {
    eff.omega.add_scaled(complex_hessian(*warm, mask), 1.0);
    for (std::uint32_t id : mask.interior)
      target_eff.g_exp[id] *= std::exp(target.lambda * (*warm)[id]);
    for (std::size_t k = 0; k < mask.boundary.size(); ++k)
      bc_eff.values[k] -= (*warm)[mask.boundary[k]];
  }

  ContinuationState st;
  st.phi = GridFunction(mask.spec);
  GridFunction det_ref = theta_s_det(eff, mask);

  // harmonic lift of bc for warm starts under boundary ramping
  GridFunction lift(mask.spec);
  bool has_bc = false;
  for (double v : bc_eff.values) has_bc |= (v != 0.0);
  if (has_bc) {
    for (std::size_t k = 0; k < mask.boundary.size(); ++k)
      lift[mask.boundary[k]] = bc_eff.values[k];
    // Jacobi-preconditioned CG on the (2n)-dim Laplacian
    const auto strides = mask.spec.strides();
    int d = mask.spec.dims();
    auto lap = [&](const std::vector<double>& x, std::vector<double>& out) {
      for (std::uint32_t id : mask.interior) {
        double acc = -2.0 * d * x[id];
        for (int a = 0; a < d; ++a) acc += x[id + strides[a]] + x[id - strides[a]];
        out[id] = acc;
      }
    };
    std::size_t total = mask.spec.node_count();
    std::vector<double> b(total, 0.0), r(total, 0.0), p(total, 0.0), Ap(total, 0.0);
    lap(lift.v, r);
    for (std::uint32_t id : mask.interior) r[id] = -r[id];
    double rr = dot_interior(mask, r, r), rr0 = rr;
    p = r;
    std::vector<double> x(total, 0.0);
    for (int it = 0; it < 20000 && rr > 1e-16 * std::max(1.0, rr0); ++it) {
      lap(p, Ap);
      for (std::uint32_t id : mask.interior) Ap[id] = -Ap[id];  // make SPD
      double alpha = rr / dot_interior(mask, p, Ap);
      for (std::uint32_t id : mask.interior) {
        x[id] += alpha * p[id];
        r[id] -= alpha * Ap[id];
      }
      double rr1 = dot_interior(mask, r, r);
      double beta = rr1 / rr;
      rr = rr1;
      for (std::uint32_t id : mask.interior) p[id] = r[id] + beta * p[id];
    }
    for (std::uint32_t id : mask.interior) lift[id] = x[id];
  }

  double t_prev = 0.0;
  std::vector<double> targets(t_schedule.begin() + 1, t_schedule.end());
  std::reverse(targets.begin(), targets.end());  // use as a stack

  // t = 0 instance: RHS det of the (seed-shifted) reference, zero boundary,
  // solved exactly by v = 0
  {
    PathRecord rec;
    rec.t = 0.0;
    rec.s = forms.s;
    st.history.push_back(rec);
  }

  while (!targets.empty()) {
    double t_try = targets.back();
    double dt = t_try - t_prev;

    Rhs g_t;
    g_t.lambda = target.lambda;
    g_t.g_fix = GridFunction(mask.spec);
    g_t.g_exp = GridFunction(mask.spec);
    for (std::uint32_t id : mask.interior) {
      g_t.g_fix[id] = (1.0 - t_try) * det_ref[id] + t_try * target_eff.g_fix[id];
      g_t.g_exp[id] = t_try * target_eff.g_exp[id];
    }
    BoundaryData bc_t;
    bc_t.values.resize(bc_eff.values.size());
    for (std::size_t k = 0; k < bc_eff.values.size(); ++k)
      bc_t.values[k] = t_try * bc_eff.values[k];

    GridFunction init = st.phi;
    if (has_bc)
      for (std::uint32_t id : mask.interior) init[id] += dt * lift[id];

    auto [phi_t, rep] = newton_solve(eff, g_t, bc_t, init, mask, cfg);
    if (rep.converged) {
      targets.pop_back();
      t_prev = t_try;
      st.phi = phi_t;
      st.t = t_try;
      PathRecord rec;
      rec.s = forms.s;
      rec.t = t_try;
      rec.iterations = rep.iterations;
      rec.residual = rep.residual;
      rec.lambda_min = rep.lambda_min;
      rec.wall_ms = rep.wall_ms;
      rec.sup_phi = 0.0;
      rec.inf_phi = 0.0;
      for (std::uint32_t id : mask.interior) {
        double val = st.phi[id] + (warm ? (*warm)[id] : 0.0);
        rec.sup_phi = std::max(rec.sup_phi, std::abs(val));
        rec.inf_phi = std::min(rec.inf_phi, val);
      }
      st.history.push_back(rec);
    } else {
      if (dt <= 1e-4) {
        st.ok = false;
        st.message = "continuity path: Newton failed at t=" + std::to_string(t_try) +
                     " with minimal step; " + rep.message;
        if (warm)
          for (std::uint32_t id = 0; id < mask.spec.node_count(); ++id)
            if (mask.active(id)) st.phi[id] += (*warm)[id];
        return st;
      }
      targets.push_back(t_prev + 0.5 * dt);
    }
  }
  st.ok = true;
  if (warm)
    for (std::uint32_t id = 0; id < mask.spec.node_count(); ++id)
      if (mask.active(id)) st.phi[id] += (*warm)[id];
  return st;
}

ContinuationState continuity_path(const ReferenceForms& forms, const Rhs& target,
                                  const DomainMask& mask, const std::vector<double>& t_schedule,
                                  const SolveConfig& cfg) {
  BoundaryData zero;
  zero.values.assign(mask.boundary.size(), 0.0);
  return homotopy_solve(forms, target, zero, mask, t_schedule, cfg);
}

ContinuationState s_family_limit(const DomainMask& mask, const GridFunction& psi1, double A,
                                 const DensitySpec& dens, const std::vector<double>& s_schedule,
                                 const std::vector<double>& t_schedule, const SolveConfig& cfg,
                                 const GridFunction* w_D, double wD_cutoff,
                                 double uniformity_factor) {
  if (s_schedule.empty()) throw std::invalid_argument("s_family_limit: empty schedule");
  for (std::size_t i = 1; i < s_schedule.size(); ++i)
    if (s_schedule[i] >= s_schedule[i - 1])
      throw std::invalid_argument("s_family_limit: schedule must decrease");

  ContinuationState st;
  GridFunction prev_phi;
  bool have_prev = false;
  BoundaryData zero;
  zero.values.assign(mask.boundary.size(), 0.0);

  for (double s : s_schedule) {
    ReferenceForms forms = build_reference_forms(mask, A, psi1, s);
    GridFunction reg = regularized_density(dens, s, mask);
    GridFunction g0(mask.spec);
    for (std::uint32_t id : mask.interior) g0[id] = reg[id] * std::exp(dens.f[id]);
    Rhs rhs = Rhs::exponential(g0, dens.lambda);

    ContinuationState sub;
    if (have_prev) {
      auto [phi, rep] = newton_solve(forms, rhs, zero, prev_phi, mask, cfg);
      if (rep.converged) {
        sub.ok = true;
        sub.phi = phi;
        PathRecord rec;
        rec.s = s;
        rec.t = 1.0;
        rec.iterations = rep.iterations;
        rec.residual = rep.residual;
        rec.lambda_min = rep.lambda_min;
        rec.wall_ms = rep.wall_ms;
        sub.history.push_back(rec);
      } else {
        sub = continuity_path(forms, rhs, mask, t_schedule, cfg);
      }
    } else {
      sub = continuity_path(forms, rhs, mask, t_schedule, cfg);
    }
    if (!sub.ok) {
      st.ok = false;
      st.message = "s_family_limit: solve failed at s=" + std::to_string(s) + "; " + sub.message;
      return st;
    }

    double sup = 0.0;
    for (std::uint32_t id : mask.interior) sup = std::max(sup, std::abs(sub.phi[id]));
    st.sup_phi_per_s.push_back(sup);

    if (have_prev) {
      double diff = 0.0;
      for (std::uint32_t id : mask.interior) {
        if (w_D && (*w_D)[id] < wD_cutoff) continue;
        diff = std::max(diff, std::abs(sub.phi[id] - prev_phi[id]));
      }
      st.cauchy_sup_diffs.push_back(diff);
    }

    for (auto& rec : sub.history) {
      rec.s = s;
      st.history.push_back(rec);
    }
    prev_phi = sub.phi;
    have_prev = true;
    st.phi = sub.phi;
    st.s = s;
    st.t = 1.0;
  }

  double mx = *std::max_element(st.sup_phi_per_s.begin(), st.sup_phi_per_s.end());
  double mn = *std::min_element(st.sup_phi_per_s.begin(), st.sup_phi_per_s.end());
  st.uniformity_flag = (mn == 0.0) ? (mx == 0.0) : (mx / mn <= uniformity_factor);
  st.ok = true;
  return st;
}

BarrierReport barrier_diagnostics(const ReferenceForms& forms, const GridFunction& phi_s,
                                  const BarrierWeight& weight, double B, int N_exp,
                                  const DomainMask& mask) {
  if (B <= 2.0) throw std::invalid_argument("barrier_diagnostics: need B > 2");
  if (N_exp < 1) throw std::invalid_argument("barrier_diagnostics: need N_exp >= 1");
  BarrierReport out;
  out.sup_H = -std::numeric_limits<double>::infinity();
  HermitianField Hphi = complex_hessian(phi_s, mask);
  const auto strides = mask.spec.strides();
  const double inv_2h = 0.5 / mask.spec.h();
  for (std::uint32_t id : mask.interior) {
    Herm omega_p = forms.theta_s(id) + Hphi.at(id);
    double tr = forms.theta.at(id).inv_weighted_trace(omega_p);
    double grad2 = 0.0;
    for (int d = 0; d < mask.spec.dims(); ++d) {
      double g = (phi_s[id + strides[d]] - phi_s[id - strides[d]]) * inv_2h;
      grad2 += g * g;
    }
    out.sup_grad_term = std::max(out.sup_grad_term, grad2 * std::pow(weight.w_D[id], N_exp));
    if (weight.w_D[id] > 0.0 && tr > 0.0)
      out.sup_H = std::max(out.sup_H,
                           std::log(tr) - B * phi_s[id] + B * std::log(weight.w_D[id]));
  }
  return out;
}

}  // namespace cma
