#pragma once

#include <array>
#include <complex>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace cma {

using cplx = std::complex<double>;

// Uniform Cartesian grid over [-L,L]^{2n}, viewed as C^n with z_j = x_j + i y_j.
// Node order is row-major with axis order x1,y1,...,xn,yn (x1 slowest).
struct GridSpec {
  int n = 1;       // complex dimension, 1 or 2
  int N = 33;      // nodes per axis, odd, >= 5
  double L = 1.5;  // half width of the box

  GridSpec() = default;
  GridSpec(int n_, int N_, double L_);

  int dims() const { return 2 * n; }
  double h() const { return 2.0 * L / (N - 1); }
  std::size_t node_count() const;

  // strides for node id arithmetic; stride[d] = N^{dims-1-d}
  std::array<std::int64_t, 4> strides() const;

  double coord(int axis_index_along, int i) const { return -L + h() * i; }
  std::array<int, 4> unpack(std::uint32_t id) const;
  std::uint32_t pack(const std::array<int, 4>& mi) const;
  // complex coordinates of a node
  std::array<cplx, 2> point(std::uint32_t id) const;

  bool operator==(const GridSpec& o) const {
    return n == o.n && N == o.N && L == o.L;
  }
};

enum class NodeLabel : std::uint8_t { Exterior = 0, Interior = 1, Boundary = 2 };

// Node classification for the sublevel domain {rho < a}. The boundary is a
// one-node band: the non-interior stencil neighbors of interior nodes.
struct DomainMask {
  GridSpec spec;
  double a = 0.0;
  double band = 0.0;  // shell width in rho units
  std::vector<NodeLabel> label;
  std::vector<std::uint32_t> interior;
  std::vector<std::uint32_t> boundary;

  bool active(std::uint32_t id) const { return label[id] != NodeLabel::Exterior; }
  bool is_interior(std::uint32_t id) const { return label[id] == NodeLabel::Interior; }
  bool is_boundary(std::uint32_t id) const { return label[id] == NodeLabel::Boundary; }
};

// Scalar field on a grid. Values are stored for every node; only
// interior+boundary entries are meaningful, exterior stays zero.
struct GridFunction {
  GridSpec spec;
  std::vector<double> v;

  GridFunction() = default;
  explicit GridFunction(const GridSpec& s, double fill = 0.0)
      : spec(s), v(s.node_count(), fill) {}

  double& operator[](std::uint32_t id) { return v[id]; }
  double operator[](std::uint32_t id) const { return v[id]; }
};

// Dirichlet values on the boundary band, parallel to mask.boundary.
struct BoundaryData {
  std::vector<double> values;
};

// The stencil offsets used throughout: +-1 along each real axis and the
// +-1,+-1 diagonal pairs across any two distinct real axes.
std::vector<std::int64_t> stencil_offsets(const GridSpec& spec);

double fubini_study_rho(const std::array<cplx, 2>& z, int n);

// Builds the mask for {rho < a}. Throws std::runtime_error on empty interior
// or when the domain touches the box edge.
DomainMask build_domain(const GridSpec& spec,
                        const std::function<double(const std::array<cplx, 2>&, int)>& rho,
                        double a);

// Evaluates an ambient extension of psi on the boundary band.
BoundaryData sample_boundary(const DomainMask& mask,
                             const std::function<double(const std::array<cplx, 2>&, int)>& psi);

// Extension psi1 of boundary data: agrees with psi on the band, vanishes for
// rho < a - collar_width, blended by the C^2 quintic cutoff in rho.
GridFunction extend_boundary_data(const BoundaryData& psi, const DomainMask& mask,
                                  const std::function<double(const std::array<cplx, 2>&, int)>& rho,
                                  const std::function<double(const std::array<cplx, 2>&, int)>& psi_ambient,
                                  double collar_width);

// quintic C^2 cutoff: 0 at t<=0, 1 at t>=1
double quintic_cutoff(double t);

// Field file I/O: one-line JSON header {n,N,L,labels_included} followed by raw
// little-endian doubles in node order, then one label byte per node when
// labels_included.
void save_field(const std::string& path, const GridFunction& f, const DomainMask* mask = nullptr);
GridFunction load_field(const std::string& path, DomainMask* mask_out = nullptr);

}  // namespace cma
