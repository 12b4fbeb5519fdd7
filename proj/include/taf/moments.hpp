#pragma once

#include <stdexcept>
#include <vector>

#include "taf/field.hpp"

namespace taf {

/// Angle-averaged quantities of a distribution f(x, y, theta): the order-n
/// directional moments with kernel e(theta) (x) ... (x) e(theta),
/// e(theta) = (cos theta, sin theta), the matching source moments with the
/// twice theta-differentiated kernel, and the entropy functional.
///
/// Theta quadrature is the uniform rectangle rule, which is exact for the
/// trigonometric-polynomial kernels as long as f is band-limited in theta.

/// pi^n(x) = integral f(x,theta) e(theta)^(x n) dtheta on the spatial grid.
/// n = 0 is the density rho, n = 1 the polarisation p, n = 2 the matrix P.
RealField moment_tensor(const RealField& f, int order);

/// Same with kernel d^2/dtheta^2 [e(theta)^(x n)]. Order 0 has an
/// identically vanishing kernel and returns the zero field.
RealField moment_source(const RealField& f, int order);

struct MomentSet {
  RealField rho;                 // order 0
  RealField p;                   // order 1
  RealField P;                   // order 2
  std::vector<RealField> pi;     // pi[n] = order-n moment, n <= max_order
  int max_order = 3;
};

MomentSet compute_moments(const RealField& f, int max_order = 3);

/// Thrown when the occupancy bound rho <= 1 is violated beyond the floor.
struct EntropyDomainError : std::runtime_error {
  double violating_fraction;
  EntropyDomainError(const std::string& msg, double frac)
      : std::runtime_error(msg), violating_fraction(frac) {}
};

/// E[f] = int f log f dx dtheta + int (1 - rho) log(1 - rho) dx, the
/// Lyapunov functional of the drift-free flow (its first variation is
/// log f - log(1 - rho)). x log x is continuously extended by 0 at 0 and
/// arguments in (-eps_floor, 0) are clamped to 0 before the log.
double entropy(const RealField& f, double eps_floor = 1e-12);

}  // namespace taf
