#include "taf/moments.hpp"

#include <cmath>
#include <complex>

#include "taf/spectral.hpp"

namespace taf {

namespace {

// Rows of the kernel table: K[c][l] = prod_m e_{bit_m(c)}(theta_l).
std::vector<std::vector<double>> kernel_table(int ntheta, int order) {
  const std::size_t ncomp = std::size_t{1} << order;
  std::vector<std::vector<double>> table(ncomp, std::vector<double>(ntheta, 1.0));
  for (std::size_t c = 0; c < ncomp; ++c) {
    for (int l = 0; l < ntheta; ++l) {
      const double th = kTwoPi * l / ntheta;
      double v = 1.0;
      for (int m = 0; m < order; ++m) v *= ((c >> m) & 1) ? std::sin(th) : std::cos(th);
      table[c][l] = v;
    }
  }
  return table;
}

// Exact second theta-derivative of each kernel row by a direct 1-D DFT;
// the rows are trigonometric polynomials of degree <= order << ntheta, so
// the spectral derivative reproduces the analytic one to roundoff.
std::vector<std::vector<double>> kernel_table_d2(int ntheta, int order) {
  auto table = kernel_table(ntheta, order);
  for (auto& row : table) {
    std::vector<std::complex<double>> coef(ntheta, {0.0, 0.0});
    for (int k = 0; k < ntheta; ++k)
      for (int l = 0; l < ntheta; ++l)
        coef[k] += row[l] * std::polar(1.0, -kTwoPi * k * l / ntheta);
    for (int k = 0; k < ntheta; ++k) {
      const int kk = wavenumber(ntheta, k);
      coef[k] *= (k == ntheta / 2) ? 0.0 : -static_cast<double>(kk) * kk;
    }
    for (int l = 0; l < ntheta; ++l) {
      std::complex<double> v{0.0, 0.0};
      for (int k = 0; k < ntheta; ++k) v += coef[k] * std::polar(1.0, kTwoPi * k * l / ntheta);
      row[l] = v.real() / ntheta;
    }
  }
  return table;
}

RealField contract_theta(const RealField& f, const std::vector<std::vector<double>>& table,
                         int order) {
  if (f.grid.dims != 3 || f.order != 0)
    throw std::invalid_argument("moment: f must be a scalar field on the 3-D grid");
  const TorusGrid& g = f.grid;
  TorusGrid omega = TorusGrid::omega(g.n[0], g.n[1]);
  RealField out(omega, order);
  const double dtheta = g.spacing(2);
  const std::size_t plane = static_cast<std::size_t>(g.n[0]) * g.n[1];
  for (std::size_t c = 0; c < out.component_count(); ++c) {
    for (int l = 0; l < g.n[2]; ++l) {
      const double w = table[c][l] * dtheta;
      const double* src = f.data.data() + plane * l;
      double* dst = out.data.data() + c * plane;
      for (std::size_t p = 0; p < plane; ++p) dst[p] += w * src[p];
    }
  }
  return out;
}

}  // namespace

RealField moment_tensor(const RealField& f, int order) {
  if (order < 0) throw std::invalid_argument("moment_tensor: order must be >= 0");
  return contract_theta(f, kernel_table(f.grid.n[2], order), order);
}

RealField moment_source(const RealField& f, int order) {
  if (order < 0) throw std::invalid_argument("moment_source: order must be >= 0");
  if (order == 0) {
    // Kernel d^2/dtheta^2 (1) vanishes identically.
    if (f.grid.dims != 3) throw std::invalid_argument("moment_source: f must be 3-D");
    return RealField(TorusGrid::omega(f.grid.n[0], f.grid.n[1]), 0);
  }
  return contract_theta(f, kernel_table_d2(f.grid.n[2], order), order);
}

MomentSet compute_moments(const RealField& f, int max_order) {
  if (max_order < 2) throw std::invalid_argument("compute_moments: max_order must be >= 2");
  MomentSet m;
  m.max_order = max_order;
  m.pi.reserve(max_order + 1);
  for (int n = 0; n <= max_order; ++n) m.pi.push_back(moment_tensor(f, n));
  m.rho = m.pi[0];
  m.p = m.pi[1];
  m.P = m.pi[2];
  return m;
}

double entropy(const RealField& f, double eps_floor) {
  if (f.grid.dims != 3 || f.order != 0)
    throw std::invalid_argument("entropy: f must be a scalar field on the 3-D grid");

  auto xlogx = [eps_floor](double x, const char* what) {
    if (x <= 0.0) {
      if (x < -eps_floor)
        throw std::invalid_argument(std::string("entropy: ") + what +
                                    " below -eps_floor; integrand undefined");
      return 0.0;
    }
    return x * std::log(x);
  };

  double acc_f = 0.0;
  for (double v : f.data) acc_f += xlogx(v, "f");

  RealField rho = moment_tensor(f, 0);
  std::size_t violations = 0;
  double acc_rho = 0.0;
  for (double r : rho.data) {
    const double u = 1.0 - r;
    if (u < -eps_floor) {
      ++violations;
      continue;
    }
    acc_rho += xlogx(u, "1-rho");
  }
  if (violations > 0) {
    const double frac = static_cast<double>(violations) / rho.data.size();
    throw EntropyDomainError(
        "entropy: rho exceeds 1 + eps_floor on " + std::to_string(violations) + " of " +
            std::to_string(rho.data.size()) + " points",
        frac);
  }
  return acc_f * f.grid.cell_volume() + acc_rho * rho.grid.cell_volume();
}

}  // namespace taf
