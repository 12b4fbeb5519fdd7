#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <functional>
#include <span>
#include <stdexcept>
#include <vector>

#include "taf/grid.hpp"

namespace taf {

/// Sampled periodic field on a TorusGrid. `order` is the tensor order over
/// the planar direction set {e_x, e_y}: 0 = scalar, 1 = 2-vector,
/// 2 = 2x2 matrix, n = order-n tensor with 2^n components stored densely.
/// Component c encodes the index word bitwise: bit m of c selects the
/// (m+1)-th tensor slot, 0 -> cos-direction, 1 -> sin-direction, so for a
/// matrix the layout is [xx, yx, xy, yy]. Point index is x-fastest.
struct RealField {
  TorusGrid grid;
  int order = 0;
  std::vector<double> data;

  RealField() = default;
  RealField(const TorusGrid& g, int ord) : grid(g), order(ord) {
    if (ord < 0 || ord > 4) throw std::invalid_argument("RealField: unsupported tensor order");
    data.assign(component_count() * grid.point_count(), 0.0);
  }

  std::size_t component_count() const { return std::size_t{1} << order; }
  std::size_t point_count() const { return grid.point_count(); }

  std::span<double> comp(std::size_t c) {
    return {data.data() + c * point_count(), point_count()};
  }
  std::span<const double> comp(std::size_t c) const {
    return {data.data() + c * point_count(), point_count()};
  }

  double& at(std::size_t c, std::size_t p) { return data[c * point_count() + p]; }
  double at(std::size_t c, std::size_t p) const { return data[c * point_count() + p]; }

  bool finite() const {
    for (double v : data)
      if (!std::isfinite(v)) return false;
    return true;
  }
};

/// Fourier-coefficient view of a RealField, same layout over components.
/// Convention: forward transform is the plain unnormalized DFT
/// c_k = sum_j f_j exp(-i k.x_j); the inverse carries the 1/N factor.
/// A constant field c therefore has c_0 = c * point_count().
struct SpectralField {
  TorusGrid grid;
  int order = 0;
  std::vector<std::complex<double>> data;

  SpectralField() = default;
  SpectralField(const TorusGrid& g, int ord) : grid(g), order(ord) {
    data.assign(component_count() * grid.point_count(), {0.0, 0.0});
  }

  std::size_t component_count() const { return std::size_t{1} << order; }
  std::size_t point_count() const { return grid.point_count(); }

  std::span<std::complex<double>> comp(std::size_t c) {
    return {data.data() + c * point_count(), point_count()};
  }
  std::span<const std::complex<double>> comp(std::size_t c) const {
    return {data.data() + c * point_count(), point_count()};
  }
};

/// Sample a scalar field from a callable f(x, y) or f(x, y, theta).
inline RealField sample_scalar(const TorusGrid& g,
                               const std::function<double(double, double, double)>& f) {
  RealField out(g, 0);
  const int nz = (g.dims == 3) ? g.n[2] : 1;
  for (int iz = 0; iz < nz; ++iz)
    for (int iy = 0; iy < g.n[1]; ++iy)
      for (int ix = 0; ix < g.n[0]; ++ix)
        out.data[g.index(ix, iy, iz)] =
            f(g.coord(0, ix), g.coord(1, iy), g.dims == 3 ? g.coord(2, iz) : 0.0);
  return out;
}

inline RealField constant_field(const TorusGrid& g, double value, int order = 0) {
  RealField out(g, order);
  if (order == 0) {
    for (double& v : out.data) v = value;
  } else {
    for (std::size_t p = 0; p < out.point_count(); ++p) out.at(0, p) = value;
  }
  return out;
}

inline void check_same_grid(const TorusGrid& a, const TorusGrid& b, const char* where) {
  if (a != b) throw std::invalid_argument(std::string(where) + ": grid mismatch");
}

}  // namespace taf
