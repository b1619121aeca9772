#include "cma/grid.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>

#include <json.hpp>

namespace cma {

GridSpec::GridSpec(int n_, int N_, double L_) : n(n_), N(N_), L(L_) {
  if (n < 1 || n > 2) throw std::invalid_argument("GridSpec: n must be 1 or 2");
  if (N < 5 || N % 2 == 0) throw std::invalid_argument("GridSpec: N must be odd and >= 5");
  if (L <= 0) throw std::invalid_argument("GridSpec: L must be positive");
}

std::size_t GridSpec::node_count() const {
  std::size_t c = 1;
  for (int d = 0; d < dims(); ++d) c *= static_cast<std::size_t>(N);
  return c;
}

std::array<std::int64_t, 4> GridSpec::strides() const {
  std::array<std::int64_t, 4> s{0, 0, 0, 0};
  std::int64_t acc = 1;
  for (int d = dims() - 1; d >= 0; --d) {
    s[d] = acc;
    acc *= N;
  }
  return s;
}

std::array<int, 4> GridSpec::unpack(std::uint32_t id) const {
  std::array<int, 4> mi{0, 0, 0, 0};
  auto s = strides();
  std::int64_t rest = id;
  for (int d = 0; d < dims(); ++d) {
    mi[d] = static_cast<int>(rest / s[d]);
    rest %= s[d];
  }
  return mi;
}

std::uint32_t GridSpec::pack(const std::array<int, 4>& mi) const {
  auto s = strides();
  std::int64_t id = 0;
  for (int d = 0; d < dims(); ++d) id += s[d] * mi[d];
  return static_cast<std::uint32_t>(id);
}

std::array<cplx, 2> GridSpec::point(std::uint32_t id) const {
  auto mi = unpack(id);
  std::array<cplx, 2> z{cplx(0, 0), cplx(0, 0)};
  for (int j = 0; j < n; ++j)
    z[j] = cplx(coord(2 * j, mi[2 * j]), coord(2 * j + 1, mi[2 * j + 1]));
  return z;
}

std::vector<std::int64_t> stencil_offsets(const GridSpec& spec) {
  auto s = spec.strides();
  std::vector<std::int64_t> out;
  int d = spec.dims();
  for (int a = 0; a < d; ++a) {
    out.push_back(s[a]);
    out.push_back(-s[a]);
  }
  for (int a = 0; a < d; ++a)
    for (int b = a + 1; b < d; ++b) {
      out.push_back(s[a] + s[b]);
      out.push_back(s[a] - s[b]);
      out.push_back(-s[a] + s[b]);
      out.push_back(-s[a] - s[b]);
    }
  return out;
}

double fubini_study_rho(const std::array<cplx, 2>& z, int n) {
  double r2 = 0.0;
  for (int j = 0; j < n; ++j) r2 += std::norm(z[j]);
  return std::log1p(r2);
}

DomainMask build_domain(const GridSpec& spec,
                        const std::function<double(const std::array<cplx, 2>&, int)>& rho,
                        double a) {
  const std::size_t total = spec.node_count();
  const double h = spec.h();

  std::vector<double> rv(total);
  double lip = 0.0;
  for (std::uint32_t id = 0; id < total; ++id) rv[id] = rho(spec.point(id), spec.n);
  // Lipschitz estimate of rho from axis-adjacent node differences
  auto strides = spec.strides();
  auto mi_edge = [&](std::uint32_t id, int d) {
    return spec.unpack(id)[d] == spec.N - 1;
  };
  for (std::uint32_t id = 0; id < total; ++id)
    for (int d = 0; d < spec.dims(); ++d)
      if (!mi_edge(id, d)) lip = std::max(lip, std::abs(rv[id + strides[d]] - rv[id]) / h);

  DomainMask mask;
  mask.spec = spec;
  mask.a = a;
  // Shell wide enough that every stencil neighbor of an interior node stays in
  // {rho < a}; the farthest stencil point is at distance h*sqrt(2).
  mask.band = 1.6 * lip * h;
  mask.label.assign(total, NodeLabel::Exterior);

  for (std::uint32_t id = 0; id < total; ++id)
    if (rv[id] < a - mask.band) {
      mask.label[id] = NodeLabel::Interior;
      mask.interior.push_back(id);
    }
  if (mask.interior.empty()) throw std::runtime_error("build_domain: empty interior");

  auto offs = stencil_offsets(spec);
  for (std::uint32_t id : mask.interior) {
    auto mi = spec.unpack(id);
    for (int d = 0; d < spec.dims(); ++d)
      if (mi[d] == 0 || mi[d] == spec.N - 1)
        throw std::runtime_error("build_domain: domain touches the box edge (increase L)");
    for (auto off : offs) {
      std::uint32_t nb = static_cast<std::uint32_t>(static_cast<std::int64_t>(id) + off);
      if (mask.label[nb] == NodeLabel::Exterior) mask.label[nb] = NodeLabel::Boundary;
    }
  }
  for (std::uint32_t id = 0; id < total; ++id)
    if (mask.label[id] == NodeLabel::Boundary) {
      mask.boundary.push_back(id);
      auto mi = spec.unpack(id);
      for (int d = 0; d < spec.dims(); ++d)
        if (mi[d] == 0 || mi[d] == spec.N - 1)
          throw std::runtime_error("build_domain: domain touches the box edge (increase L)");
    }
  return mask;
}

BoundaryData sample_boundary(const DomainMask& mask,
                             const std::function<double(const std::array<cplx, 2>&, int)>& psi) {
  BoundaryData bd;
  bd.values.reserve(mask.boundary.size());
  for (std::uint32_t id : mask.boundary) bd.values.push_back(psi(mask.spec.point(id), mask.spec.n));
  return bd;
}

double quintic_cutoff(double t) {
  if (t <= 0.0) return 0.0;
  if (t >= 1.0) return 1.0;
  return t * t * t * (10.0 + t * (-15.0 + 6.0 * t));
}

GridFunction extend_boundary_data(const BoundaryData& psi, const DomainMask& mask,
                                  const std::function<double(const std::array<cplx, 2>&, int)>& rho,
                                  const std::function<double(const std::array<cplx, 2>&, int)>& psi_ambient,
                                  double collar_width) {
  if (collar_width <= 0) throw std::invalid_argument("extend_boundary_data: collar_width must be positive");
  if (psi.values.size() != mask.boundary.size())
    throw std::invalid_argument("extend_boundary_data: boundary data size mismatch");
  // collar must not reach the domain center (smallest rho among interior nodes)
  double rho_min = std::numeric_limits<double>::infinity();
  for (std::uint32_t id : mask.interior)
    rho_min = std::min(rho_min, rho(mask.spec.point(id), mask.spec.n));
  if (rho_min >= mask.a - collar_width)
    throw std::runtime_error("extend_boundary_data: collar too wide, reaches center");

  GridFunction psi1(mask.spec);
  for (std::uint32_t id : mask.interior) {
    double r = rho(mask.spec.point(id), mask.spec.n);
    double t = (r - (mask.a - collar_width)) / collar_width;
    psi1[id] = quintic_cutoff(t) * psi_ambient(mask.spec.point(id), mask.spec.n);
  }
  for (std::size_t k = 0; k < mask.boundary.size(); ++k) psi1[mask.boundary[k]] = psi.values[k];
  return psi1;
}

void save_field(const std::string& path, const GridFunction& f, const DomainMask* mask) {
  nlohmann::json hdr;
  hdr["n"] = f.spec.n;
  hdr["N"] = f.spec.N;
  hdr["L"] = f.spec.L;
  hdr["labels_included"] = (mask != nullptr);
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("save_field: cannot open " + path);
  os << hdr.dump() << "\n";
  os.write(reinterpret_cast<const char*>(f.v.data()),
           static_cast<std::streamsize>(f.v.size() * sizeof(double)));
  if (mask)
    os.write(reinterpret_cast<const char*>(mask->label.data()),
             static_cast<std::streamsize>(mask->label.size()));
}

GridFunction load_field(const std::string& path, DomainMask* mask_out) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("load_field: cannot open " + path);
  std::string line;
  std::getline(is, line);
  auto hdr = nlohmann::json::parse(line);
  GridSpec spec(hdr.at("n").get<int>(), hdr.at("N").get<int>(), hdr.at("L").get<double>());
  GridFunction f(spec);
  is.read(reinterpret_cast<char*>(f.v.data()),
          static_cast<std::streamsize>(f.v.size() * sizeof(double)));
  if (!is) throw std::runtime_error("load_field: truncated data in " + path);
  bool labels = hdr.at("labels_included").get<bool>();
  if (labels && mask_out) {
    mask_out->spec = spec;
    mask_out->label.resize(spec.node_count());
    is.read(reinterpret_cast<char*>(mask_out->label.data()),
            static_cast<std::streamsize>(mask_out->label.size()));
    if (!is) throw std::runtime_error("load_field: truncated labels in " + path);
    mask_out->interior.clear();
    mask_out->boundary.clear();
    for (std::uint32_t id = 0; id < mask_out->label.size(); ++id) {
      if (mask_out->label[id] == NodeLabel::Interior) mask_out->interior.push_back(id);
      if (mask_out->label[id] == NodeLabel::Boundary) mask_out->boundary.push_back(id);
    }
  }
  return f;
}

}  // namespace cma
