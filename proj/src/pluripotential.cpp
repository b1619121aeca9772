#include "cma/pluripotential.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

namespace cma {

namespace {

// A complex line through the grid: step offsets for +h*e and +h*(i*e).
struct LineDir {
  cplx e0, e1;
  std::int64_t off_re = 0, off_im = 0;
};

std::int64_t step_offset(const GridSpec& spec, const cplx& c0, const cplx& c1) {
  auto st = spec.strides();
  auto comp = [](double v) {
    long r = std::lround(v);
    return r;
  };
  std::int64_t off = comp(c0.real()) * st[0] + comp(c0.imag()) * st[1];
  if (spec.n == 2) off += comp(c1.real()) * st[2] + comp(c1.imag()) * st[3];
  return off;
}

std::vector<LineDir> line_directions(const GridSpec& spec) {
  const cplx I(0, 1);
  std::vector<std::pair<cplx, cplx>> dirs;
  if (spec.n == 1) {
    dirs = {{{1, 0}, {0, 0}}, {{1, 1}, {0, 0}}};
  } else {
    dirs = {{{1, 0}, {0, 0}}, {{0, 0}, {1, 0}}, {{1, 0}, {1, 0}},
            {{1, 0}, {-1, 0}}, {{1, 0}, {0, 1}}, {{1, 0}, {0, -1}}};
  }
  std::vector<LineDir> out;
  for (auto& [e0, e1] : dirs) {
    LineDir d;
    d.e0 = e0;
    d.e1 = e1;
    d.off_re = step_offset(spec, e0, e1);
    d.off_im = step_offset(spec, I * e0, I * e1);
    out.push_back(d);
  }
  return out;
}

double mass_on(const HermitianField& theta, const GridFunction& u, const DomainMask& mask,
               const std::vector<std::uint32_t>& region) {
  if (region.empty()) return 0.0;
  return ma_mass(theta, u, mask, region);
}

}  // namespace

void validate_capacity_query(const std::vector<std::uint32_t>& K, const DomainMask& mask) {
  if (K.empty()) throw std::invalid_argument("capacity query: K is empty");
  auto offsets = stencil_offsets(mask.spec);
  for (std::uint32_t id : K) {
    if (!mask.is_interior(id))
      throw std::invalid_argument("capacity query: K contains a non-interior node");
    for (std::int64_t off : offsets)
      if (!mask.is_interior(static_cast<std::uint32_t>(id + off)))
        throw std::invalid_argument(
            "capacity query: K lacks the one-node interior buffer from the band");
  }
}

ExtremalResult extremal_function(const std::vector<std::uint32_t>& K, const HermitianField& theta,
                                 const DomainMask& mask, double sweep_tol, int max_sweeps) {
  if (K.empty()) throw std::invalid_argument("extremal_function: K is empty");
  for (std::uint32_t id : K)
    if (!mask.is_interior(id))
      throw std::invalid_argument("extremal_function: K contains a non-interior node");
  const GridSpec& spec = mask.spec;
  const double h2 = spec.h() * spec.h();
  auto dirs = line_directions(spec);

  std::vector<char> in_K(spec.node_count(), 0);
  for (std::uint32_t id : K) in_K[id] = 1;
  std::vector<std::uint32_t> free_nodes;
  for (std::uint32_t id : mask.interior)
    if (!in_K[id]) free_nodes.push_back(id);

  ExtremalResult res;
  res.ustar = GridFunction(spec);
  GridFunction& u = res.ustar;
  for (std::uint32_t id : K) u[id] = -1.0;

  auto relax = [&](std::uint32_t id) {
    double bound = 0.0;
    for (const auto& d : dirs) {
      double avg = 0.25 * (u[id + d.off_re] + u[id - d.off_re] + u[id + d.off_im] +
                           u[id - d.off_im]);
      double b = avg + h2 * theta.at(id).form(d.e0, d.e1);
      bound = std::min(bound, b);
    }
    return std::clamp(bound, -1.0, 0.0);
  };

  bool converged = false;
  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    double change = 0.0;
    if (sweep % 2 == 0) {
      for (std::uint32_t id : free_nodes) {
        double v = relax(id);
        change = std::max(change, std::abs(v - u[id]));
        u[id] = v;
      }
    } else {
      for (auto it = free_nodes.rbegin(); it != free_nodes.rend(); ++it) {
        double v = relax(*it);
        change = std::max(change, std::abs(v - u[*it]));
        u[*it] = v;
      }
    }
    res.sweeps = sweep + 1;
    if (change <= sweep_tol) {
      converged = true;
      break;
    }
  }
  if (!converged) throw std::runtime_error("extremal_function: sweeping did not converge");

  res.capacity = mass_on(theta, u, mask, K);
  // the equilibrium mass concentrates on the rim of K; the discrete kink sits
  // on the nodes one step outside K, so the defect is measured beyond that ring
  std::vector<char> near_K = in_K;
  auto offsets = stencil_offsets(spec);
  for (std::uint32_t id : K)
    for (std::int64_t off : offsets) near_K[static_cast<std::uint32_t>(id + off)] = 1;
  std::vector<std::uint32_t> defect_region;
  for (std::uint32_t id : mask.interior)
    if (!near_K[id] && u[id] < -1e-6) defect_region.push_back(id);
  res.support_defect = mass_on(theta, u, mask, defect_region);
  return res;
}

namespace {

double bruteforce_capacity(const std::vector<std::uint32_t>& K, const HermitianField& theta,
                           const DomainMask& mask, std::uint64_t seed) {
  validate_capacity_query(K, mask);
  if (mask.interior.size() > 30)
    throw std::invalid_argument("capacity: bruteforce limited to interiors of at most 30 nodes");
  const GridSpec& spec = mask.spec;
  const double h2 = spec.h() * spec.h();
  auto dirs = line_directions(spec);

  // Largest admissible function below u: Gauss-Seidel descent onto the
  // four-point submean constraints (for n = 1 these are exactly positivity of
  // theta + Hessian). The constraint set is closed under pointwise max, so the
  // projection is well defined and monotone.
  auto project = [&](GridFunction u) {
    for (;;) {
      double change = 0.0;
      for (std::uint32_t id : mask.interior) {
        double bound = 0.0;
        for (const auto& d : dirs) {
          double avg = 0.25 * (u[id + d.off_re] + u[id - d.off_re] + u[id + d.off_im] +
                               u[id - d.off_im]);
          bound = std::min(bound, avg + h2 * theta.at(id).form(d.e0, d.e1));
        }
        double v = std::min(u[id], bound);  // bound >= -1 whenever neighbors are
        change = std::max(change, u[id] - v);
        u[id] = v;
      }
      if (change <= 1e-13) break;
    }
    return u;
  };
  auto objective = [&](const GridFunction& u) { return mass_on(theta, u, mask, K); };

  // Projected coordinate ascent: perturb one node, re-impose admissibility from
  // above, keep the move only if the mass on K improves.
  auto ascend = [&](GridFunction u) {
    u = project(std::move(u));
    double best = objective(u);
    double step = 0.25;
    while (step > 1e-3) {
      bool improved = false;
      for (std::uint32_t id : mask.interior) {
        for (double d : {-step, step}) {
          double cand_val = std::clamp(u[id] + d, -1.0, 0.0);
          if (cand_val == u[id]) continue;
          GridFunction cand = u;
          cand[id] = cand_val;
          cand = project(std::move(cand));
          double val = objective(cand);
          if (val > best + 1e-15) {
            best = val;
            u = std::move(cand);
            improved = true;
          }
        }
      }
      if (!improved) step *= 0.5;
    }
    return best;
  };

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> level(-0.99, -0.01);
  double best = ascend(extremal_function(K, theta, mask).ustar);
  for (int start = 0; start < 64; ++start) {
    GridFunction u(mask.spec);
    double c = level(rng);
    for (std::uint32_t id : mask.interior) u[id] = c;
    best = std::max(best, ascend(std::move(u)));
  }
  return best;
}

}  // namespace

double capacity(const std::vector<std::uint32_t>& K, const HermitianField& theta,
                const DomainMask& mask, CapacityMethod method, std::uint64_t seed) {
  validate_capacity_query(K, mask);
  if (method == CapacityMethod::envelope) return extremal_function(K, theta, mask).capacity;
  return bruteforce_capacity(K, theta, mask, seed);
}

ComparisonReport check_comparison(const GridFunction& u, const GridFunction& v,
                                  const HermitianField& theta, const DomainMask& mask) {
  ComparisonReport rep;
  double psh_tol = 10.0 * mask.spec.h();
  PshReport pu = psh_check(theta, u, mask, psh_tol);
  PshReport pv = psh_check(theta, v, mask, psh_tol);
  if (!pu.ok() || !pv.ok()) {
    rep.note = "precondition failed: potential not grid-PSH (worst lambda_min " +
               std::to_string(std::min(pu.worst, pv.worst)) + ")";
    return rep;
  }
  for (std::uint32_t id : mask.boundary)
    if (u[id] < v[id] - 1e-12) {
      rep.note = "precondition failed: boundary ordering u >= v violated";
      return rep;
    }
  rep.preconditions_ok = true;

  std::vector<std::uint32_t> set;
  for (std::uint32_t id : mask.interior)
    if (u[id] < v[id]) set.push_back(id);
  rep.set_size = set.size();
  rep.lhs = mass_on(theta, v, mask, set);
  rep.rhs = mass_on(theta, u, mask, set);
  rep.slack = rep.rhs - rep.lhs;
  double h = mask.spec.h();
  rep.tol = 50.0 * h * h * static_cast<double>(set.size()) * std::pow(h, 2 * mask.spec.n);
  rep.pass = rep.slack >= -rep.tol;
  return rep;
}

SublevelStats sublevel_stats(const GridFunction& phi, const HermitianField& theta_s,
                             const std::vector<double>& levels, const DomainMask& mask) {
  for (std::size_t i = 1; i < levels.size(); ++i)
    if (levels[i] <= levels[i - 1])
      throw std::invalid_argument("sublevel_stats: levels must increase");

  SublevelStats st;
  st.levels = levels;
  st.n = mask.spec.n;
  st.h = mask.spec.h();
  for (double l : levels) {
    std::vector<std::uint32_t> set;
    for (std::uint32_t id : mask.interior)
      if (phi[id] < -l) set.push_back(id);
    bool skip = false;
    double a = 0.0, b = 0.0;
    if (!set.empty()) {
      try {
        validate_capacity_query(set, mask);
      } catch (const std::invalid_argument&) {
        skip = true;
      }
      if (!skip) {
        a = capacity(set, theta_s, mask);
        b = mass_on(theta_s, phi, mask, set);
      }
    }
    st.sets.push_back(std::move(set));
    st.skipped.push_back(skip);
    st.a.push_back(a);
    st.b.push_back(b);
    st.F.push_back(std::pow(a, 1.0 / st.n));
  }
  return st;
}

KolodziejReport check_kolodziej_inequalities(const SublevelStats& stats, double t, double) {
  if (t <= 0.0 || t >= 1.0)
    throw std::invalid_argument("check_kolodziej_inequalities: need t in (0,1)");
  KolodziejReport rep;
  const double cell = std::pow(stats.h, 2 * stats.n);

  for (std::size_t i = 0; i < stats.levels.size(); ++i) {
    if (stats.skipped[i]) continue;
    double target = stats.levels[i] + t;
    for (std::size_t j = i + 1; j < stats.levels.size(); ++j) {
      if (stats.skipped[j] || std::abs(stats.levels[j] - target) > 1e-9) continue;
      KolodziejReport::Entry e;
      e.l = stats.levels[i];
      e.t = t;
      e.lhs = std::pow(t, stats.n) * stats.a[j];
      double tol = 50.0 * stats.h * stats.h * static_cast<double>(stats.sets[i].size()) * cell;
      e.rhs = stats.b[i] + tol;
      e.ok = e.lhs <= e.rhs;
      rep.all_ok = rep.all_ok && e.ok;
      rep.entries.push_back(e);
      break;
    }
  }

  rep.C_fit = 0.0;
  for (std::size_t i = 0; i < stats.levels.size(); ++i)
    if (!stats.skipped[i] && stats.a[i] > 0.0)
      rep.C_fit = std::max(rep.C_fit, stats.b[i] / (stats.a[i] * stats.a[i]));

  // least-squares slope of log a(l+1) against log l
  std::vector<double> xs, ys;
  for (std::size_t i = 0; i < stats.levels.size(); ++i) {
    double l = stats.levels[i];
    if (l <= 0.0) continue;
    double target = l + 1.0;
    for (std::size_t j = i + 1; j < stats.levels.size(); ++j)
      if (!stats.skipped[j] && std::abs(stats.levels[j] - target) <= 1e-9 && stats.a[j] > 0.0) {
        xs.push_back(std::log(l));
        ys.push_back(std::log(stats.a[j]));
        break;
      }
  }
  if (xs.size() >= 2) {
    double mx = 0, my = 0;
    for (std::size_t k = 0; k < xs.size(); ++k) {
      mx += xs[k];
      my += ys[k];
    }
    mx /= xs.size();
    my /= ys.size();
    double num = 0, den = 0;
    for (std::size_t k = 0; k < xs.size(); ++k) {
      num += (xs[k] - mx) * (ys[k] - my);
      den += (xs[k] - mx) * (xs[k] - mx);
    }
    if (den > 0) rep.decay_exponent = -num / den;
  }

  double prev = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < stats.levels.size(); ++i) {
    if (stats.skipped[i]) continue;
    if (stats.a[i] > prev + 1e-12) rep.monotone_decay = false;
    prev = stats.a[i];
  }
  return rep;
}

DeGiorgiCertificate degiorgi_bound(const std::vector<std::pair<double, double>>& F_samples,
                                   double A, double alpha) {
  if (A <= 0.0 || alpha <= 0.0)
    throw std::invalid_argument("degiorgi_bound: need A > 0 and alpha > 0");
  std::vector<std::pair<double, double>> s = F_samples;
  std::sort(s.begin(), s.end());

  DeGiorgiCertificate cert;
  cert.A = A;
  cert.alpha = alpha;
  cert.hypothesis_verified = true;
  for (std::size_t i = 0; i < s.size() && cert.hypothesis_verified; ++i)
    for (std::size_t j = i + 1; j < s.size(); ++j) {
      double r = s[j].first - s[i].first;
      if (r <= 0.0 || r > 1.0) continue;
      if (r * s[j].second > A * std::pow(s[i].second, 1.0 + alpha) + 1e-12) {
        cert.hypothesis_verified = false;
        cert.witness_l = s[i].first;
        cert.witness_r = r;
        break;
      }
    }

  for (auto& [l, F] : s)
    if (std::pow(F, alpha) <= 1.0 / (2.0 * A)) {
      cert.has_l0 = true;
      cert.l0 = l;
      break;
    }
  cert.S = cert.has_l0 ? 2.0 + cert.l0 : std::numeric_limits<double>::infinity();

  cert.vanishes_beyond_S = cert.has_l0;
  for (auto& [l, F] : s) {
    if (!cert.has_zero && F <= 0.0) {
      cert.has_zero = true;
      cert.first_zero_level = l;
    }
    if (cert.has_l0 && l >= cert.S && F > 0.0) cert.vanishes_beyond_S = false;
  }
  return cert;
}

C0Certificate c0_certificate(const SublevelStats& stats, double A_fit, const GridFunction& phi,
                             const DomainMask& mask, double alpha) {
  std::vector<std::pair<double, double>> samples;
  for (std::size_t i = 0; i < stats.levels.size(); ++i)
    if (!stats.skipped[i]) samples.emplace_back(stats.levels[i], stats.F[i]);

  C0Certificate out;
  out.dg = degiorgi_bound(samples, A_fit, alpha);
  out.S = out.dg.S;
  out.certified = out.dg.hypothesis_verified && out.dg.has_l0 && out.dg.vanishes_beyond_S;

  out.inf_phi = 0.0;
  for (std::uint32_t id : mask.interior) out.inf_phi = std::min(out.inf_phi, phi[id]);
  double h = mask.spec.h();
  out.bound_holds = out.certified && out.inf_phi >= -out.S - 10.0 * h * h;
  return out;
}

CapacityConvergence capacity_convergence(const std::vector<std::uint32_t>& K,
                                         const HermitianField& omega, const HermitianField& theta,
                                         const std::vector<double>& s_schedule,
                                         const DomainMask& mask) {
  CapacityConvergence out;
  out.cap_omega = capacity(K, omega, mask);
  double prev = std::numeric_limits<double>::infinity();
  for (double s : s_schedule) {
    HermitianField ts = omega;
    ts.add_scaled(theta, s);
    double c = capacity(K, ts, mask);
    out.s.push_back(s);
    out.cap_s.push_back(c);
    if (c > prev + 1e-9) out.monotone = false;
    prev = c;
  }
  out.final_gap = out.cap_s.empty() ? 0.0 : std::abs(out.cap_s.back() - out.cap_omega);
  return out;
}

}  // namespace cma
