#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <vector>

#include "cma/grid.hpp"

namespace cma {

// Hermitian n x n matrix for n <= 2, by value. For n == 1 only d0 is used.
// Eigenvalues and projections use the closed-form 2x2 formulas.
struct Herm {
  int n = 1;
  double d0 = 0.0, d1 = 0.0;
  cplx off{0.0, 0.0};

  static Herm zero(int n) { return Herm{n, 0, 0, {0, 0}}; }
  static Herm identity(int n) { return Herm{n, 1, n > 1 ? 1.0 : 0.0, {0, 0}}; }
  static Herm scaled_identity(int n, double c) { return Herm{n, c, n > 1 ? c : 0.0, {0, 0}}; }

  Herm operator+(const Herm& o) const { return Herm{n, d0 + o.d0, d1 + o.d1, off + o.off}; }
  Herm operator-(const Herm& o) const { return Herm{n, d0 - o.d0, d1 - o.d1, off - o.off}; }
  Herm operator*(double c) const { return Herm{n, c * d0, c * d1, c * off}; }

  double trace() const { return n == 1 ? d0 : d0 + d1; }

  double det() const {
    if (n == 1) return d0;
    return d0 * d1 - std::norm(off);
  }

  double lambda_min() const {
    if (n == 1) return d0;
    double m = 0.5 * (d0 + d1);
    double r = std::sqrt(0.25 * (d0 - d1) * (d0 - d1) + std::norm(off));
    return m - r;
  }

  double lambda_max() const {
    if (n == 1) return d0;
    double m = 0.5 * (d0 + d1);
    double r = std::sqrt(0.25 * (d0 - d1) * (d0 - d1) + std::norm(off));
    return m + r;
  }

  // determinant of the PSD projection (eigenvalues clamped at 0)
  double det_psd() const {
    if (n == 1) return std::max(0.0, d0);
    return std::max(0.0, lambda_min()) * std::max(0.0, lambda_max());
  }

  Herm inverse() const {
    double d = det();
    if (n == 1) return Herm{1, 1.0 / d0, 0, {0, 0}};
    return Herm{2, d1 / d, d0 / d, -off / d};
  }

  // tr(this^{-1} * S); both Hermitian, this must be nonsingular
  double inv_weighted_trace(const Herm& S) const {
    if (n == 1) return S.d0 / d0;
    double d = det();
    return (d1 * S.d0 + d0 * S.d1 - 2.0 * (off.real() * S.off.real() + off.imag() * S.off.imag())) / d;
  }

  // Hermitian form sum_{j,k} e_j conj(e_k) H_jk, real for Hermitian H
  double form(const cplx& e0, const cplx& e1) const {
    if (n == 1) return d0 * std::norm(e0);
    return d0 * std::norm(e0) + d1 * std::norm(e1) + 2.0 * (e0 * std::conj(e1) * off).real();
  }
};

// Per-node Hermitian matrices, structure-of-arrays over the full grid.
struct HermitianField {
  GridSpec spec;
  std::vector<double> d0, d1, offre, offim;

  HermitianField() = default;
  explicit HermitianField(const GridSpec& s) : spec(s) {
    d0.assign(s.node_count(), 0.0);
    if (s.n == 2) {
      d1.assign(s.node_count(), 0.0);
      offre.assign(s.node_count(), 0.0);
      offim.assign(s.node_count(), 0.0);
    }
  }

  Herm at(std::uint32_t id) const {
    if (spec.n == 1) return Herm{1, d0[id], 0, {0, 0}};
    return Herm{2, d0[id], d1[id], {offre[id], offim[id]}};
  }

  void set(std::uint32_t id, const Herm& m) {
    d0[id] = m.d0;
    if (spec.n == 2) {
      d1[id] = m.d1;
      offre[id] = m.off.real();
      offim[id] = m.off.imag();
    }
  }

  HermitianField& add_scaled(const HermitianField& o, double c) {
    for (std::size_t i = 0; i < d0.size(); ++i) d0[i] += c * o.d0[i];
    if (spec.n == 2)
      for (std::size_t i = 0; i < d1.size(); ++i) {
        d1[i] += c * o.d1[i];
        offre[i] += c * o.offre[i];
        offim[i] += c * o.offim[i];
      }
    return *this;
  }
};

}  // namespace cma
