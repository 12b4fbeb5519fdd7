#include "taf/evolution.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "taf/spectral.hpp"

namespace taf {

namespace {

std::vector<double> theta_samples(const TorusGrid& g, double (*fn)(double)) {
  std::vector<double> v(g.n[2]);
  for (int l = 0; l < g.n[2]; ++l) v[l] = fn(g.coord(2, l));
  return v;
}

// c = a (Omega scalar, broadcast over theta) * b (Upsilon field), componentwise.
RealField lifted_multiply(const RealField& a, const RealField& b) {
  const TorusGrid& g = b.grid;
  RealField out(g, b.order);
  const std::size_t plane = static_cast<std::size_t>(g.n[0]) * g.n[1];
  for (std::size_t c = 0; c < out.component_count(); ++c)
    for (int l = 0; l < g.n[2]; ++l) {
      const double* ap = a.data.data();
      const double* bp = b.data.data() + c * b.point_count() + plane * l;
      double* op = out.data.data() + c * out.point_count() + plane * l;
      for (std::size_t p = 0; p < plane; ++p) op[p] = ap[p] * bp[p];
    }
  return out;
}

RealField pointwise_multiply(const RealField& a, const RealField& b) {
  RealField out(b.grid, b.order);
  for (std::size_t c = 0; c < out.component_count(); ++c)
    for (std::size_t p = 0; p < b.point_count(); ++p) out.at(c, p) = a.data[p] * b.at(c, p);
  return out;
}

RealField multiply_by_theta_table(const RealField& f, const std::vector<double>& table) {
  const TorusGrid& g = f.grid;
  RealField out(g, 0);
  const std::size_t plane = static_cast<std::size_t>(g.n[0]) * g.n[1];
  for (int l = 0; l < g.n[2]; ++l) {
    const double w = table[l];
    const double* src = f.data.data() + plane * l;
    double* dst = out.data.data() + plane * l;
    for (std::size_t p = 0; p < plane; ++p) dst[p] = w * src[p];
  }
  return out;
}

// acc += d/d(axis) of X, i.e. ik_axis * X with the Nyquist bin annihilated.
void add_derivative(SpectralField& acc, const SpectralField& X, int axis) {
  const TorusGrid& g = X.grid;
  const int n = g.axis_size(axis);
  std::size_t stride = 1;
  for (int a = 0; a < axis; ++a) stride *= g.axis_size(a);
  const std::size_t npts = g.point_count();
  for (std::size_t c = 0; c < X.component_count(); ++c) {
    const std::complex<double>* xp = X.data.data() + c * npts;
    std::complex<double>* ap = acc.data.data() + c * npts;
    for (std::size_t p = 0; p < npts; ++p) {
      const int i = static_cast<int>((p / stride) % n);
      if (i == n / 2) continue;
      const double k = wavenumber(n, i);
      ap[p] += std::complex<double>(0.0, k) * xp[p];
    }
  }
}

// acc += multiplier(k) * X for a diagonal real multiplier.
template <typename Fn>
void add_diagonal(SpectralField& acc, const SpectralField& X, Fn multiplier) {
  const TorusGrid& g = X.grid;
  const std::size_t npts = g.point_count();
  for (std::size_t c = 0; c < X.component_count(); ++c) {
    const std::complex<double>* xp = X.data.data() + c * npts;
    std::complex<double>* ap = acc.data.data() + c * npts;
    for (std::size_t p = 0; p < npts; ++p) {
      std::size_t rem = p;
      std::array<int, 3> k = {0, 0, 0};
      std::array<bool, 3> nyq = {false, false, false};
      for (int a = 0; a < g.dims; ++a) {
        const int i = static_cast<int>(rem % g.n[a]);
        rem /= g.n[a];
        k[a] = wavenumber(g.n[a], i);
        nyq[a] = (i == g.n[a] / 2);
      }
      ap[p] += multiplier(k, nyq) * xp[p];
    }
  }
}

SpectralField maybe_dealias(SpectralField F, bool dealiasing) {
  if (dealiasing) dealias_inplace(F);
  return F;
}

// Gradient components of a spectral field along spatial axes, as samples.
std::array<RealField, 2> spatial_gradient(const SpectralField& F) {
  return {inverse(derivative(F, 0, 1)), inverse(derivative(F, 1, 1))};
}

// Shared assembly for rhs_f and for the stepper's explicit part. With
// include_laplacian the result is the full right-hand side; without it the
// full space-angle Laplacian is left out (it is integrated exactly by the
// stepper), which for the divergence form replaces the flux coefficient
// (1-rho) by -rho and drops the d2/dtheta2 term.
SpectralField assemble_f_rhs(const RealField& f, const MomentSet& m, Form form,
                             const TermToggles& terms, bool dealiasing,
                             bool include_laplacian) {
  const TorusGrid& g = f.grid;
  SpectralField acc(g, 0);
  SpectralField F = transform(f);

  RealField u(m.rho.grid, 0);
  for (std::size_t p = 0; p < u.point_count(); ++p) u.data[p] = 1.0 - m.rho.data[p];

  if (terms.drift) {
    // -div((1-rho) f e(theta)): the quadratic factor is dealiased first,
    // then the bandwidth-one angular factor is applied; the second product
    // cannot alias.
    SpectralField G = maybe_dealias(transform(lifted_multiply(u, f)), dealiasing);
    RealField gt = inverse(G);
    SpectralField D1 = maybe_dealias(
        transform(multiply_by_theta_table(gt, theta_samples(g, std::cos))), dealiasing);
    SpectralField D2 = maybe_dealias(
        transform(multiply_by_theta_table(gt, theta_samples(g, std::sin))), dealiasing);
    for (auto& v : D1.data) v = -v;
    for (auto& v : D2.data) v = -v;
    add_derivative(acc, D1, 0);
    add_derivative(acc, D2, 1);
  }

  auto neg_spatial_k2 = [](const std::array<int, 3>& k, const std::array<bool, 3>& nyq) {
    double s = 0.0;
    if (!nyq[0]) s -= static_cast<double>(k[0]) * k[0];
    if (!nyq[1]) s -= static_cast<double>(k[1]) * k[1];
    return s;
  };

  if (terms.cross_diffusion) {
    RealField coeff = u;
    if (!include_laplacian)
      for (std::size_t p = 0; p < coeff.point_count(); ++p) coeff.data[p] = -m.rho.data[p];

    if (form == Form::divergence) {
      auto [fx, fy] = spatial_gradient(F);
      SpectralField R = transform(m.rho);
      RealField rx = inverse(derivative(R, 0, 1));
      RealField ry = inverse(derivative(R, 1, 1));
      RealField c1 = lifted_multiply(coeff, fx);
      RealField c2 = lifted_multiply(coeff, fy);
      RealField d1 = lifted_multiply(rx, f);
      RealField d2 = lifted_multiply(ry, f);
      for (std::size_t p = 0; p < c1.point_count(); ++p) {
        c1.data[p] += d1.data[p];
        c2.data[p] += d2.data[p];
      }
      add_derivative(acc, maybe_dealias(transform(c1), dealiasing), 0);
      add_derivative(acc, maybe_dealias(transform(c2), dealiasing), 1);
    } else {
      SpectralField LF(g, 0);
      add_diagonal(LF, F, neg_spatial_k2);
      RealField lap_f = inverse(LF);
      SpectralField LR(m.rho.grid, 0);
      add_diagonal(LR, transform(m.rho), neg_spatial_k2);
      RealField lap_rho = inverse(LR);
      RealField t1 = lifted_multiply(coeff, lap_f);
      RealField t2 = lifted_multiply(lap_rho, f);
      for (std::size_t p = 0; p < t1.point_count(); ++p) t1.data[p] += t2.data[p];
      SpectralField T1 = maybe_dealias(transform(t1), dealiasing);
      for (std::size_t i = 0; i < acc.data.size(); ++i) acc.data[i] += T1.data[i];
    }
  } else if (include_laplacian) {
    // Pure-heat reduction keeps the bare spatial Laplacian.
    add_diagonal(acc, F, neg_spatial_k2);
  }

  if (include_laplacian) {
    add_diagonal(acc, F, [](const std::array<int, 3>& k, const std::array<bool, 3>& nyq) {
      return nyq[2] ? 0.0 : -static_cast<double>(k[2]) * k[2];
    });
  }

  return acc;
}

}  // namespace

ModelState::ModelState(RealField f, double time, long step, int max_moment_order)
    : f_(std::move(f)), time_(time), step_(step), max_moment_order_(max_moment_order) {
  if (f_.grid.dims != 3 || f_.order != 0)
    throw std::invalid_argument("ModelState: f must be a scalar field on the 3-D grid");
}

void ModelState::set_f(RealField f, double time, long step) {
  f_ = std::move(f);
  time_ = time;
  step_ = step;
  cache_.reset();
}

const MomentSet& ModelState::moments() const {
  if (!cache_) cache_ = std::make_shared<const MomentSet>(compute_moments(f_, max_moment_order_));
  return *cache_;
}

double ModelState::mass() const { return integral(f_); }

RealField rhs_f(const ModelState& state, Form form, const TermToggles& terms, bool dealiasing) {
  return inverse(assemble_f_rhs(state.f(), state.moments(), form, terms, dealiasing, true));
}

namespace {

// Shared assembly for the moment hierarchy: for a tensor field T of order n
// with flux tensor S of order n+1 (last slot contracted by the divergence),
//   dT/dt = -div((1-rho) S) + div((1-rho) grad T + T (x) grad rho) + source.
// For n = 0 the diffusive flux collapses to grad rho exactly, so this also
// assembles the density equation.
RealField tensor_rhs(const MomentSet& m, const RealField& tensor, const RealField& flux_tensor,
                     const RealField& source, bool dealiasing) {
  const TorusGrid& g = tensor.grid;
  RealField u(g, 0);
  for (std::size_t p = 0; p < u.point_count(); ++p) u.data[p] = 1.0 - m.rho.data[p];

  SpectralField R = transform(m.rho);
  RealField rx = inverse(derivative(R, 0, 1));
  RealField ry = inverse(derivative(R, 1, 1));

  RealField out(g, tensor.order);
  const std::size_t npts = g.point_count();
  const std::size_t ncomp = tensor.component_count();

  SpectralField T = transform(tensor);

  for (std::size_t c = 0; c < ncomp; ++c) {
    SpectralField acc(g, 0);
    // Per-component views as scalar fields.
    RealField tc(g, 0);
    std::copy_n(tensor.data.data() + c * npts, npts, tc.data.data());
    SpectralField TC(g, 0);
    std::copy_n(T.data.data() + c * npts, npts, TC.data.data());

    for (int axis = 0; axis < 2; ++axis) {
      // drift flux component: (1-rho) * S_{c, axis}
      RealField sc(g, 0);
      std::copy_n(flux_tensor.data.data() + (c + (static_cast<std::size_t>(axis) << tensor.order)) * npts,
                  npts, sc.data.data());
      RealField drift = dealiasing ? dealiased_product(u, sc) : pointwise_multiply(u, sc);

      // diffusive flux component: (1-rho) dT_c/dx_axis + T_c drho/dx_axis
      RealField grad_tc = inverse(derivative(TC, axis, 1));
      RealField diff_a = dealiasing ? dealiased_product(u, grad_tc)
                                    : pointwise_multiply(u, grad_tc);
      const RealField& raxis = (axis == 0) ? rx : ry;
      RealField diff_b = dealiasing ? dealiased_product(tc, raxis)
                                    : pointwise_multiply(tc, raxis);

      RealField flux(g, 0);
      for (std::size_t p = 0; p < npts; ++p)
        flux.data[p] = -drift.data[p] + diff_a.data[p] + diff_b.data[p];
      add_derivative(acc, transform(flux), axis);
    }

    RealField acc_real = inverse(acc);
    for (std::size_t p = 0; p < npts; ++p)
      out.at(c, p) = acc_real.data[p] + source.at(c, p);
  }
  return out;
}

}  // namespace

RealField rhs_rho(const MomentSet& m, bool dealiasing) {
  RealField zero_source(m.rho.grid, 0);
  return tensor_rhs(m, m.rho, m.p, zero_source, dealiasing);
}

RealField rhs_p(const ModelState& state, bool dealiasing) {
  const MomentSet& m = state.moments();
  // The order-1 source moment is exactly -p, which supplies the damping
  // term of the polarisation equation.
  RealField source = moment_source(state.f(), 1);
  return tensor_rhs(m, m.p, m.P, source, dealiasing);
}

RealField rhs_tensor(const ModelState& state, int n, bool dealiasing) {
  const MomentSet& m = state.moments();
  if (n < 0) throw std::invalid_argument("rhs_tensor: order must be >= 0");
  if (n + 1 > m.max_order)
    throw std::invalid_argument("rhs_tensor: order " + std::to_string(n) +
                                " needs moment " + std::to_string(n + 1) +
                                " beyond configured max " + std::to_string(m.max_order));
  RealField source = moment_source(state.f(), n);
  return tensor_rhs(m, m.pi[n], m.pi[n + 1], source, dealiasing);
}

RealField rhs_v(const ModelState& state, const HFunction& h, double epsilon, bool dealiasing) {
  if (epsilon < 0.0) throw std::invalid_argument("rhs_v: epsilon must be >= 0");
  if (!h.certificate.valid)
    throw std::invalid_argument("rhs_v: h failed its admissibility certificate: " +
                                h.certificate.violation);
  const MomentSet& m = state.moments();
  const TorusGrid& g = m.rho.grid;
  const std::size_t npts = g.point_count();

  RealField u(g, 0), v(g, 0), a(g, 0), b(g, 0), cfield(g, 0);
  for (std::size_t p = 0; p < npts; ++p) {
    const double up = 1.0 - m.rho.data[p];
    const double s = up + epsilon;
    if (s <= 0.0)
      throw BarrierDomainError("rhs_v: u + epsilon <= 0 at flat index " + std::to_string(p), p);
    const double h1 = h.dh(s), h2 = h.d2h(s);
    u.data[p] = up;
    v.data[p] = h.h(s);
    a.data[p] = up * h1;            // flux coefficient of div(p u h')
    b.data[p] = up * h2 / h1;       // advection coefficient
    cfield.data[p] = h2 / (h1 * h1);  // defect coefficient (positive)
  }

  SpectralField V = transform(v);
  RealField vx = inverse(derivative(V, 0, 1));
  RealField vy = inverse(derivative(V, 1, 1));

  auto mulp = [&](const RealField& s, const RealField& t) {
    return dealiasing ? dealiased_product(s, t) : pointwise_multiply(s, t);
  };

  // div(p u h'(u+eps))
  SpectralField acc(g, 0);
  RealField p1(g, 0), p2(g, 0);
  std::copy_n(m.p.data.data(), npts, p1.data.data());
  std::copy_n(m.p.data.data() + npts, npts, p2.data.data());
  add_derivative(acc, transform(mulp(a, p1)), 0);
  add_derivative(acc, transform(mulp(a, p2)), 1);

  // + Lap v
  add_diagonal(acc, V, [](const std::array<int, 3>& k, const std::array<bool, 3>& nyq) {
    double s = 0.0;
    if (!nyq[0]) s -= static_cast<double>(k[0]) * k[0];
    if (!nyq[1]) s -= static_cast<double>(k[1]) * k[1];
    return s;
  });

  RealField out = inverse(acc);
  // - (u h''/h') p . grad v  - (h''/h'^2) |grad v|^2, assembled pointwise.
  for (std::size_t p = 0; p < npts; ++p) {
    const double pdotgv = m.p.at(0, p) * vx.data[p] + m.p.at(1, p) * vy.data[p];
    const double gv2 = vx.data[p] * vx.data[p] + vy.data[p] * vy.data[p];
    out.data[p] += -b.data[p] * pdotgv - cfield.data[p] * gv2;
  }
  return out;
}

double default_barrier_epsilon(const ModelState& state) {
  const RealField& rho = state.moments().rho;
  double min_u = std::numeric_limits<double>::infinity();
  for (double r : rho.data) min_u = std::min(min_u, 1.0 - r);
  return (min_u > 1e-6) ? 0.0 : 1e-6;
}

RealField rhs_fdot(const ModelState& state, const RealField& fdot, bool dealiasing) {
  if (fdot.data.empty())
    throw std::invalid_argument("rhs_fdot: missing tangent field");
  check_same_grid(state.f().grid, fdot.grid, "rhs_fdot");
  const TorusGrid& g = fdot.grid;
  const MomentSet& m = state.moments();

  RealField rhodot = moment_tensor(fdot, 0);
  RealField u(m.rho.grid, 0);
  for (std::size_t p = 0; p < u.point_count(); ++p) u.data[p] = 1.0 - m.rho.data[p];

  SpectralField F = transform(state.f());
  SpectralField Fd = transform(fdot);
  SpectralField R = transform(m.rho);
  SpectralField Rd = transform(rhodot);

  SpectralField acc(g, 0);

  // -div[((1-rho) fdot - rhodot f) e(theta)]
  RealField gdrift = lifted_multiply(u, fdot);
  RealField gdrift2 = lifted_multiply(rhodot, state.f());
  for (std::size_t p = 0; p < gdrift.point_count(); ++p) gdrift.data[p] -= gdrift2.data[p];
  SpectralField G = maybe_dealias(transform(gdrift), dealiasing);
  RealField gt = inverse(G);
  SpectralField D1 = maybe_dealias(
      transform(multiply_by_theta_table(gt, theta_samples(g, std::cos))), dealiasing);
  SpectralField D2 = maybe_dealias(
      transform(multiply_by_theta_table(gt, theta_samples(g, std::sin))), dealiasing);
  for (auto& vv : D1.data) vv = -vv;
  for (auto& vv : D2.data) vv = -vv;
  add_derivative(acc, D1, 0);
  add_derivative(acc, D2, 1);

  // +div[(1-rho) grad fdot - rhodot grad f + fdot grad rho + f grad rhodot]
  for (int axis = 0; axis < 2; ++axis) {
    RealField fdx = inverse(derivative(Fd, axis, 1));
    RealField fx = inverse(derivative(F, axis, 1));
    RealField rx = inverse(derivative(R, axis, 1));
    RealField rdx = inverse(derivative(Rd, axis, 1));
    RealField flux = lifted_multiply(u, fdx);
    RealField t2 = lifted_multiply(rhodot, fx);
    RealField t3 = lifted_multiply(rx, fdot);
    RealField t4 = lifted_multiply(rdx, state.f());
    for (std::size_t p = 0; p < flux.point_count(); ++p)
      flux.data[p] += -t2.data[p] + t3.data[p] + t4.data[p];
    add_derivative(acc, maybe_dealias(transform(flux), dealiasing), axis);
  }

  // + d2 fdot / dtheta2
  add_diagonal(acc, Fd, [](const std::array<int, 3>& k, const std::array<bool, 3>& nyq) {
    return nyq[2] ? 0.0 : -static_cast<double>(k[2]) * k[2];
  });
  return inverse(acc);
}

RealField rhs_rhodot(const ModelState& state, const RealField& rhodot, const RealField& pdot,
                     bool dealiasing) {
  if (rhodot.data.empty() || pdot.data.empty())
    throw std::invalid_argument("rhs_rhodot: missing tangent moments");
  const MomentSet& m = state.moments();
  const TorusGrid& g = m.rho.grid;
  const std::size_t npts = g.point_count();

  RealField u(g, 0);
  for (std::size_t p = 0; p < npts; ++p) u.data[p] = 1.0 - m.rho.data[p];

  SpectralField acc(g, 0);
  for (int axis = 0; axis < 2; ++axis) {
    RealField pdc(g, 0), pc(g, 0);
    std::copy_n(pdot.data.data() + static_cast<std::size_t>(axis) * npts, npts, pdc.data.data());
    std::copy_n(m.p.data.data() + static_cast<std::size_t>(axis) * npts, npts, pc.data.data());
    RealField a = dealiasing ? dealiased_product(u, pdc) : pointwise_multiply(u, pdc);
    RealField b = dealiasing ? dealiased_product(rhodot, pc) : pointwise_multiply(rhodot, pc);
    RealField flux(g, 0);
    for (std::size_t p = 0; p < npts; ++p) flux.data[p] = -(a.data[p] - b.data[p]);
    add_derivative(acc, transform(flux), axis);
  }
  add_diagonal(acc, transform(rhodot),
               [](const std::array<int, 3>& k, const std::array<bool, 3>& nyq) {
                 double s = 0.0;
                 if (!nyq[0]) s -= static_cast<double>(k[0]) * k[0];
                 if (!nyq[1]) s -= static_cast<double>(k[1]) * k[1];
                 return s;
               });
  return inverse(acc);
}

double estimate_dt(const ModelState& state) {
  const MomentSet& m = state.moments();
  SpectralField R = transform(m.rho);
  RealField rx = inverse(derivative(R, 0, 1));
  RealField ry = inverse(derivative(R, 1, 1));
  double grad_inf = 0.0;
  for (std::size_t p = 0; p < rx.point_count(); ++p)
    grad_inf = std::max(grad_inf,
                        std::sqrt(rx.data[p] * rx.data[p] + ry.data[p] * ry.data[p]));
  const TorusGrid& g = state.f().grid;
  double hmin = g.spacing(0);
  for (int a = 1; a < g.dims; ++a) hmin = std::min(hmin, g.spacing(a));
  return 0.25 * hmin * hmin / std::max(1.0, grad_inf);
}

namespace {

void apply_integrating_factor(SpectralField& F, double dt) {
  const TorusGrid& g = F.grid;
  const std::size_t npts = g.point_count();
  for (std::size_t c = 0; c < F.component_count(); ++c) {
    std::complex<double>* base = F.data.data() + c * npts;
    for (std::size_t p = 0; p < npts; ++p) {
      std::size_t rem = p;
      double k2 = 0.0;
      for (int a = 0; a < g.dims; ++a) {
        const int i = static_cast<int>(rem % g.n[a]);
        rem /= g.n[a];
        const double k = wavenumber(g.n[a], i);
        k2 += k * k;
      }
      base[p] *= std::exp(-k2 * dt);
    }
  }
}

RealField explicit_part(const ModelState& s, const SolverConfig& cfg) {
  return inverse(
      assemble_f_rhs(s.f(), s.moments(), cfg.form, cfg.terms, cfg.dealiasing, false));
}

}  // namespace

ModelState step(const ModelState& state, const SolverConfig& config) {
  if (!(config.dt > 0.0)) throw std::invalid_argument("step: config.dt must be > 0");
  const double dt = config.dt;
  const RealField& f0 = state.f();

  // Stage 1: f1 = E (f + dt N(f)).
  RealField n0 = explicit_part(state, config);
  RealField s1(f0.grid, 0);
  for (std::size_t p = 0; p < f0.point_count(); ++p)
    s1.data[p] = f0.data[p] + dt * n0.data[p];
  SpectralField S1 = transform(s1);
  apply_integrating_factor(S1, dt);
  RealField f1 = inverse(S1);

  // Stage 2: f_next = 1/2 E f + 1/2 f1 + dt/2 N(f1).
  ModelState mid(f1, state.time() + dt, state.step() + 1, state.max_moment_order());
  RealField n1 = explicit_part(mid, config);
  SpectralField EF = transform(f0);
  apply_integrating_factor(EF, dt);
  RealField ef = inverse(EF);

  RealField fn(f0.grid, 0);
  for (std::size_t p = 0; p < f0.point_count(); ++p)
    fn.data[p] = 0.5 * ef.data[p] + 0.5 * f1.data[p] + 0.5 * dt * n1.data[p];

  if (config.galerkin_cutoff > 0) fn = galerkin_project(fn, config.galerkin_cutoff);

  return ModelState(std::move(fn), state.time() + dt, state.step() + 1,
                    state.max_moment_order());
}

std::size_t Trajectory::index_at(double t) const {
  if (times.empty()) throw std::out_of_range("Trajectory: empty");
  const double slack = 1e-12 * std::max(1.0, std::fabs(t));
  std::size_t best = 0;
  for (std::size_t i = 0; i < times.size(); ++i)
    if (times[i] <= t + slack) best = i;
  return best;
}

void TrajectoryRecorder::on_sample(const DiagnosticsRow&, const ModelState& state) {
  traj_.times.push_back(state.time());
  traj_.fields.push_back(state.f());
}

DiagnosticsRow make_row(const ModelState& state, double mass0, const SolverConfig& config) {
  DiagnosticsRow row;
  row.t = state.time();
  row.step = state.step();
  row.mass = state.mass();
  const RealField& f = state.f();
  const MomentSet& m = state.moments();

  double min_f = std::numeric_limits<double>::infinity();
  for (double v : f.data) min_f = std::min(min_f, v);
  row.min_f = min_f;

  double max_rho = -std::numeric_limits<double>::infinity();
  for (double v : m.rho.data) max_rho = std::max(max_rho, v);
  row.min_one_minus_rho = 1.0 - max_rho;

  try {
    row.entropy = entropy(f, config.entropy_eps_floor);
  } catch (const std::exception&) {
    row.entropy = std::numeric_limits<double>::quiet_NaN();
  }

  row.l2_f = lq_norm(f, 2.0);
  SpectralField F = transform(f);
  double h1 = 0.0;
  for (int a = 0; a < f.grid.dims; ++a) {
    const double na = lq_norm(inverse(derivative(F, a, 1)), 2.0);
    h1 += na * na;
  }
  row.h1_f = std::sqrt(h1);
  row.l2_rho = lq_norm(m.rho, 2.0);
  row.mass_drift_rel = (mass0 != 0.0) ? std::fabs(row.mass - mass0) / std::fabs(mass0) : 0.0;

  RealField rd = rhs_f(state, Form::divergence, config.terms, config.dealiasing);
  RealField rn = rhs_f(state, Form::nondivergence, config.terms, config.dealiasing);
  double diff = 0.0;
  for (std::size_t p = 0; p < rd.point_count(); ++p) {
    const double d = rd.data[p] - rn.data[p];
    diff += d * d;
  }
  const double base = lq_norm(rd, 2.0);
  row.div_nondiv_rel =
      (base > 0.0) ? std::sqrt(diff * rd.grid.cell_volume()) / base : 0.0;
  return row;
}

RunResult run(const ModelState& initial, const SolverConfig& config,
              const std::vector<DiagnosticsSink*>& sinks) {
  RunResult result;

  ModelState s = initial;
  {
    RealField f = s.f();
    if (config.dealiasing) f = dealias(f);
    if (config.galerkin_cutoff > 0) f = galerkin_project(f, config.galerkin_cutoff);
    s.set_f(std::move(f), initial.time(), initial.step());
  }

  SolverConfig cfg = config;
  if (!(cfg.dt > 0.0)) cfg.dt = estimate_dt(s);
  result.dt_used = cfg.dt;

  const double mass0 = s.mass();
  auto emit = [&](const ModelState& st) {
    DiagnosticsRow row = make_row(st, mass0, cfg);
    for (auto* sink : sinks) sink->on_sample(row, st);
  };
  emit(s);

  const double t_end = cfg.t_end;
  long steps = 0;
  while (s.time() < t_end - 1e-12 * std::max(1.0, t_end)) {
    SolverConfig step_cfg = cfg;
    step_cfg.dt = std::min(cfg.dt, t_end - s.time());
    ModelState next = step(s, step_cfg);
    ++steps;

    if (!next.f().finite()) {
      result.status = RunStatus::aborted_nonfinite;
      result.message = "non-finite value detected at step " + std::to_string(next.step());
      break;
    }
    double max_rho = -std::numeric_limits<double>::infinity();
    for (double v : next.moments().rho.data) max_rho = std::max(max_rho, v);
    if (max_rho > 1.0 + cfg.rho_abort_excess) {
      result.status = RunStatus::aborted_rho_exceeds_one;
      result.message = "rho exceeded 1 + " + std::to_string(cfg.rho_abort_excess) +
                       " (max rho = " + std::to_string(max_rho) + ") at step " +
                       std::to_string(next.step());
      break;
    }

    s = std::move(next);
    const bool at_end = !(s.time() < t_end - 1e-12 * std::max(1.0, t_end));
    if (cfg.diagnostics_cadence > 0 &&
        (s.step() % cfg.diagnostics_cadence == 0 || at_end))
      emit(s);
  }

  result.final_state = s;
  result.steps_taken = steps;
  return result;
}

}  // namespace taf
