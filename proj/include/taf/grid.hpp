#pragma once

#include <array>
#include <cstddef>
#include <stdexcept>
#include <string>

namespace taf {

inline constexpr double kTwoPi = 6.28318530717958647692528676655900577;

/// Uniform collocation grid on a periodic box with side 2*pi per axis.
/// dims == 2 is the spatial domain (x, y); dims == 3 appends the angle
/// axis theta, giving the space-angle domain. Axis sizes must be even
/// and at least 4 so that dealiasing and Nyquist handling are well defined.
struct TorusGrid {
  int dims = 2;
  std::array<int, 3> n = {4, 4, 1};

  static TorusGrid omega(int nx, int ny) {
    TorusGrid g;
    g.dims = 2;
    g.n = {nx, ny, 1};
    g.validate();
    return g;
  }

  static TorusGrid upsilon(int nx, int ny, int ntheta) {
    TorusGrid g;
    g.dims = 3;
    g.n = {nx, ny, ntheta};
    g.validate();
    return g;
  }

  void validate() const {
    if (dims != 2 && dims != 3)
      throw std::invalid_argument("TorusGrid: dims must be 2 or 3");
    for (int a = 0; a < dims; ++a) {
      if (n[a] < 4 || n[a] % 2 != 0)
        throw std::invalid_argument("TorusGrid: axis size " + std::to_string(n[a]) +
                                    " must be even and >= 4");
    }
  }

  int axis_size(int axis) const {
    if (axis < 0 || axis >= dims)
      throw std::invalid_argument("TorusGrid: axis " + std::to_string(axis) +
                                  " out of range for dims=" + std::to_string(dims));
    return n[axis];
  }

  double spacing(int axis) const { return kTwoPi / axis_size(axis); }

  /// Coordinate of grid node i along an axis, in [0, 2*pi).
  double coord(int axis, int i) const { return spacing(axis) * i; }

  std::size_t point_count() const {
    std::size_t c = 1;
    for (int a = 0; a < dims; ++a) c *= static_cast<std::size_t>(n[a]);
    return c;
  }

  /// Quadrature weight of one node (rectangle rule, exact for band-limited
  /// integrands of matching bandwidth).
  double cell_volume() const {
    double v = 1.0;
    for (int a = 0; a < dims; ++a) v *= spacing(a);
    return v;
  }

  /// Flattened index, x-fastest: ix + nx*(iy + ny*itheta).
  std::size_t index(int ix, int iy, int itheta = 0) const {
    return static_cast<std::size_t>(ix) +
           static_cast<std::size_t>(n[0]) *
               (static_cast<std::size_t>(iy) + static_cast<std::size_t>(n[1]) * itheta);
  }

  bool operator==(const TorusGrid& o) const { return dims == o.dims && n == o.n; }
  bool operator!=(const TorusGrid& o) const { return !(*this == o); }
};

/// Signed wavenumber of FFT bin i for axis size n: 0..n/2-1 then -n/2..-1.
/// The unsigned Nyquist bin i == n/2 reports +n/2.
inline int wavenumber(int n, int i) { return (i <= n / 2) ? i : i - n; }

}  // namespace taf
