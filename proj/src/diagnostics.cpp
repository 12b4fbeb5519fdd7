#include "taf/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "taf/spectral.hpp"

namespace taf {

RealField stampacchia(const RealField& field, double k) {
  if (field.order != 0) throw std::invalid_argument("stampacchia: scalar fields only");
  if (k < 0.0) throw std::invalid_argument("stampacchia: level must be >= 0");
  RealField out = field;
  for (double& v : out.data) v = std::max(v - k, 0.0);
  return out;
}

namespace {

// Squared L2 norms of the truncation and of its gradient. The weak
// derivative of (w-k)_+ is grad w restricted to {w > k}; the gradient of w
// is spectral and the indicator is applied on the samples.
struct TruncationEnergySample {
  double l2sq;
  double grad_l2sq;
};

TruncationEnergySample truncation_energy_sample(const RealField& w, double kappa) {
  TruncationEnergySample out{0.0, 0.0};
  const double vol = w.grid.cell_volume();

  double acc = 0.0;
  for (double v : w.data) {
    const double t = std::max(v - kappa, 0.0);
    acc += t * t;
  }
  out.l2sq = acc * vol;

  SpectralField W = transform(w);
  double gacc = 0.0;
  for (int a = 0; a < w.grid.dims; ++a) {
    RealField da = inverse(derivative(W, a, 1));
    for (std::size_t p = 0; p < w.point_count(); ++p)
      if (w.data[p] > kappa) gacc += da.data[p] * da.data[p];
  }
  out.grad_l2sq = gacc * vol;
  return out;
}

}  // namespace

double ladder_energy(const std::vector<double>& times, const std::vector<RealField>& fields,
                     const TruncationLadder& ladder, int n, double horizon) {
  if (times.size() != fields.size())
    throw std::invalid_argument("ladder_energy: misaligned samples");
  const double t_lo = ladder.T(n);
  const double kappa = ladder.kappa(n);

  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < times.size(); ++i)
    if (times[i] >= t_lo - 1e-12 && times[i] <= horizon + 1e-12) idx.push_back(i);
  if (idx.size() < 2)
    throw std::invalid_argument("ladder_energy: fewer than 2 samples in [T_n, horizon]");

  double sup_l2sq = 0.0;
  std::vector<double> grads(idx.size());
  for (std::size_t j = 0; j < idx.size(); ++j) {
    RealField scaled = fields[idx[j]];
    for (double& v : scaled.data) v /= ladder.L;
    auto e = truncation_energy_sample(scaled, kappa);
    sup_l2sq = std::max(sup_l2sq, e.l2sq);
    grads[j] = e.grad_l2sq;
  }
  double time_int = 0.0;
  for (std::size_t j = 1; j < idx.size(); ++j)
    time_int += 0.5 * (times[idx[j]] - times[idx[j - 1]]) * (grads[j] + grads[j - 1]);
  return sup_l2sq + time_int;
}

std::vector<double> ladder_energies(const std::vector<double>& times,
                                    const std::vector<RealField>& fields,
                                    const TruncationLadder& ladder, double horizon) {
  std::vector<double> out;
  out.reserve(ladder.n_max + 1);
  for (int n = 0; n <= ladder.n_max; ++n)
    out.push_back(ladder_energy(times, fields, ladder, n, horizon));
  return out;
}

std::vector<RealField> ladder_fields(const Trajectory& traj, LadderVariant variant,
                                     const HFunction* h) {
  std::vector<RealField> out;
  out.reserve(traj.size());
  for (std::size_t i = 0; i < traj.size(); ++i) {
    if (variant == LadderVariant::g) {
      out.push_back(traj.fields[i]);
    } else {
      if (h == nullptr || !h->certificate.valid)
        throw std::invalid_argument("ladder_fields: variant w needs a certified h");
      RealField rho = moment_tensor(traj.fields[i], 0);
      RealField v(rho.grid, 0);
      for (std::size_t p = 0; p < rho.point_count(); ++p) {
        const double u = 1.0 - rho.data[p];
        if (u <= 0.0)
          throw std::invalid_argument("ladder_fields: 1 - rho <= 0, barrier undefined");
        v.data[p] = h->h(u);
      }
      out.push_back(std::move(v));
    }
  }
  return out;
}

double default_ladder_scale(const Trajectory& traj, double t0, double horizon) {
  std::vector<double> ts;
  std::vector<RealField> fs;
  for (std::size_t i = 0; i < traj.size(); ++i)
    if (traj.times[i] >= 0.5 * t0 - 1e-12 && traj.times[i] <= horizon + 1e-12) {
      ts.push_back(traj.times[i]);
      fs.push_back(traj.fields[i]);
    }
  if (ts.size() < 2)
    throw std::invalid_argument("default_ladder_scale: window [t0/2, horizon] under-sampled");

  double sup_l2 = 0.0;
  std::vector<double> grad_sq(ts.size());
  for (std::size_t i = 0; i < ts.size(); ++i) {
    sup_l2 = std::max(sup_l2, lq_norm(fs[i], 2.0));
    SpectralField F = transform(fs[i]);
    double g = 0.0;
    for (int a = 0; a < fs[i].grid.dims; ++a) {
      const double na = lq_norm(inverse(derivative(F, a, 1)), 2.0);
      g += na * na;
    }
    grad_sq[i] = g;
  }
  double grad_int = 0.0;
  for (std::size_t i = 1; i < ts.size(); ++i)
    grad_int += 0.5 * (ts[i] - ts[i - 1]) * (grad_sq[i] + grad_sq[i - 1]);
  const double sum = sup_l2 + std::sqrt(grad_int);
  return 2.0 * sum * sum;
}

DecayReport recursion_decay_check(const std::vector<double>& ledger) {
  if (ledger.size() < 4)
    throw std::invalid_argument("recursion_decay_check: need at least 4 ladder entries");
  DecayReport rep;

  for (std::size_t i = 0; i < ledger.size(); ++i)
    if (ledger[i] == 0.0) {
      rep.first_zero = static_cast<int>(i);
      break;
    }

  const double w0 = ledger.front();
  if (w0 == 0.0) {
    rep.decays_to_zero = true;  // degenerate ledger: everything truncated away
    rep.exponent_defined = false;
    return rep;
  }

  bool monotone = true;
  for (std::size_t i = 1; i < ledger.size(); ++i)
    if (ledger[i] > ledger[i - 1] * (1.0 + 1e-12)) monotone = false;
  const double tail = ledger.back();
  rep.decays_to_zero = monotone && (tail <= 1e-10 * w0);

  // Fit log W_n = beta log W_{n-1} + n log C on the strictly positive pairs.
  std::vector<double> xs, ys, ns;
  for (std::size_t i = 1; i < ledger.size(); ++i)
    if (ledger[i] > 0.0 && ledger[i - 1] > 0.0) {
      xs.push_back(std::log(ledger[i - 1]));
      ys.push_back(std::log(ledger[i]));
      ns.push_back(static_cast<double>(i));
    }
  if (xs.size() >= 3) {
    // Two-parameter least squares in (beta, logC) with design [x_i, n_i].
    double sxx = 0, sxn = 0, snn = 0, sxy = 0, sny = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      sxx += xs[i] * xs[i];
      sxn += xs[i] * ns[i];
      snn += ns[i] * ns[i];
      sxy += xs[i] * ys[i];
      sny += ns[i] * ys[i];
    }
    const double det = sxx * snn - sxn * sxn;
    if (std::fabs(det) > 1e-12 * std::max(1.0, sxx * snn)) {
      rep.beta = (sxy * snn - sny * sxn) / det;
      rep.log_c = (sxx * sny - sxn * sxy) / det;
      rep.exponent_defined = true;
    }
  }
  return rep;
}

LowerBoundSeries lower_bound_track(const Trajectory& traj) {
  LowerBoundSeries out;
  out.times = traj.times;
  out.min_one_minus_rho.reserve(traj.size());
  for (const auto& f : traj.fields) {
    RealField rho = moment_tensor(f, 0);
    double mx = -std::numeric_limits<double>::infinity();
    for (double r : rho.data) mx = std::max(mx, r);
    out.min_one_minus_rho.push_back(1.0 - mx);
  }
  out.running_inf.assign(traj.size(), 0.0);
  double inf = std::numeric_limits<double>::infinity();
  for (std::size_t i = traj.size(); i-- > 0;) {
    inf = std::min(inf, out.min_one_minus_rho[i]);
    out.running_inf[i] = inf;
  }
  return out;
}

double interpolation_ratio(const std::vector<double>& times,
                           const std::vector<RealField>& fields, double p, double m) {
  if (times.size() != fields.size() || times.size() < 2)
    throw std::invalid_argument("interpolation_ratio: window too short");
  const int n = fields.front().grid.dims;
  const double q = p * (1.0 + m / n);

  const double num = lq_time_norm(times, fields, q);

  double linf_lm = 0.0;
  std::vector<double> w1p_pows(times.size());
  for (std::size_t i = 0; i < times.size(); ++i) {
    linf_lm = std::max(linf_lm, lq_norm(fields[i], m));
    double acc = std::pow(lq_norm(fields[i], p), p);
    SpectralField F = transform(fields[i]);
    for (int a = 0; a < n; ++a) acc += std::pow(lq_norm(inverse(derivative(F, a, 1)), p), p);
    w1p_pows[i] = acc;
  }
  double lp_w1p = 0.0;
  for (std::size_t i = 1; i < times.size(); ++i)
    lp_w1p += 0.5 * (times[i] - times[i - 1]) * (w1p_pows[i] + w1p_pows[i - 1]);
  lp_w1p = std::pow(lp_w1p, 1.0 / p);

  return num / (linf_lm + lp_w1p);
}

double interpolation_monitor(const Trajectory& traj, double p, double m) {
  std::vector<RealField> rhos;
  rhos.reserve(traj.size());
  for (const auto& f : traj.fields) rhos.push_back(moment_tensor(f, 0));
  return interpolation_ratio(traj.times, rhos, p, m);
}

double weak_residual(const Trajectory& traj, double t1, double t2, const RealField& phi) {
  if (phi.grid.dims != 3 || phi.order != 0)
    throw std::invalid_argument("weak_residual: phi must be scalar on the 3-D grid");
  // Band-limit check: phi must live inside the dealiased band.
  {
    SpectralField P = transform(phi);
    SpectralField Pt = P;
    dealias_inplace(Pt);
    double out_band = 0.0, total = 0.0;
    for (std::size_t i = 0; i < P.data.size(); ++i) {
      out_band += std::norm(P.data[i] - Pt.data[i]);
      total += std::norm(P.data[i]);
    }
    if (total > 0.0 && out_band > 1e-20 * total)
      throw std::invalid_argument("weak_residual: phi is not band-limited to the grid's "
                                  "dealiased band");
  }

  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < traj.size(); ++i)
    if (traj.times[i] >= t1 - 1e-12 && traj.times[i] <= t2 + 1e-12) idx.push_back(i);
  if (idx.size() < 2) throw std::invalid_argument("weak_residual: window under-sampled");

  SpectralField PHI = transform(phi);
  RealField phix = inverse(derivative(PHI, 0, 1));
  RealField phiy = inverse(derivative(PHI, 1, 1));
  RealField phith = inverse(derivative(PHI, 2, 1));

  auto integrand = [&](const RealField& f) {
    ModelState st(f);
    const MomentSet& m = st.moments();
    const TorusGrid& g = f.grid;
    RealField u(m.rho.grid, 0);
    for (std::size_t p = 0; p < u.point_count(); ++p) u.data[p] = 1.0 - m.rho.data[p];

    SpectralField F = transform(f);
    RealField fx = inverse(derivative(F, 0, 1));
    RealField fy = inverse(derivative(F, 1, 1));
    RealField fth = inverse(derivative(F, 2, 1));
    SpectralField R = transform(m.rho);
    RealField rx = inverse(derivative(R, 0, 1));
    RealField ry = inverse(derivative(R, 1, 1));

    const std::size_t plane = static_cast<std::size_t>(g.n[0]) * g.n[1];
    double acc = 0.0;
    for (int l = 0; l < g.n[2]; ++l) {
      const double cth = std::cos(g.coord(2, l));
      const double sth = std::sin(g.coord(2, l));
      for (std::size_t p = 0; p < plane; ++p) {
        const std::size_t q = plane * l + p;
        const double uu = u.data[p];
        const double drift = uu * f.data[q] * (cth * phix.data[q] + sth * phiy.data[q]);
        const double diff = (uu * fx.data[q] + f.data[q] * rx.data[p]) * phix.data[q] +
                            (uu * fy.data[q] + f.data[q] * ry.data[p]) * phiy.data[q] +
                            fth.data[q] * phith.data[q];
        acc += drift - diff;
      }
    }
    return acc * g.cell_volume();
  };

  double time_integral = 0.0;
  double prev = integrand(traj.fields[idx.front()]);
  for (std::size_t j = 1; j < idx.size(); ++j) {
    const double cur = integrand(traj.fields[idx[j]]);
    time_integral +=
        0.5 * (traj.times[idx[j]] - traj.times[idx[j - 1]]) * (prev + cur);
    prev = cur;
  }

  const double boundary = inner_product(traj.fields[idx.back()], phi) -
                          inner_product(traj.fields[idx.front()], phi);
  return time_integral - boundary;
}

EntropySeries entropy_dissipation_check(const Trajectory& traj, bool drift_enabled,
                                        double tol) {
  EntropySeries out;
  if (traj.size() < 3)
    throw std::invalid_argument("entropy_dissipation_check: need >= 3 samples");
  out.entropy.reserve(traj.size());
  for (const auto& f : traj.fields) out.entropy.push_back(entropy(f));
  for (std::size_t i = 1; i + 1 < traj.size(); ++i) {
    const double d = (out.entropy[i + 1] - out.entropy[i - 1]) /
                     (traj.times[i + 1] - traj.times[i - 1]);
    out.times.push_back(traj.times[i]);
    out.dEdt.push_back(d);
    if (!drift_enabled && d > tol) out.max_positive = std::max(out.max_positive, d);
  }
  return out;
}

H2Report h2_estimate_report(const Trajectory& traj) {
  if (traj.size() < 2) throw std::invalid_argument("h2_estimate_report: need >= 2 samples");
  H2Report rep;

  double sup_grad_sq = 0.0;
  double first_grad_sq = 0.0;
  std::vector<double> lap_sq(traj.size());
  std::vector<double> grad_sq(traj.size());
  std::vector<double> wgrad_p_sq(traj.size());

  for (std::size_t i = 0; i < traj.size(); ++i) {
    ModelState st(traj.fields[i]);
    const MomentSet& m = st.moments();
    SpectralField R = transform(m.rho);
    double g2 = 0.0;
    for (int a = 0; a < 2; ++a) {
      const double na = lq_norm(inverse(derivative(R, a, 1)), 2.0);
      g2 += na * na;
    }
    grad_sq[i] = g2;
    sup_grad_sq = std::max(sup_grad_sq, g2);
    if (i == 0) first_grad_sq = g2;

    SpectralField L(m.rho.grid, 0);
    // Lap rho via two second derivatives.
    SpectralField rxx = derivative(R, 0, 2);
    SpectralField ryy = derivative(R, 1, 2);
    for (std::size_t j = 0; j < L.data.size(); ++j) L.data[j] = rxx.data[j] + ryy.data[j];
    const double nl = lq_norm(inverse(L), 2.0);
    lap_sq[i] = nl * nl;

    // || sqrt(1-rho) grad p ||_2^2
    SpectralField P = transform(m.p);
    double acc = 0.0;
    for (std::size_t c = 0; c < 2; ++c)
      for (int a = 0; a < 2; ++a) {
        RealField d = inverse(derivative(P, a, 1));
        for (std::size_t p = 0; p < m.rho.point_count(); ++p) {
          const double u = std::max(1.0 - m.rho.data[p], 0.0);
          acc += u * d.at(c, p) * d.at(c, p);
        }
      }
    wgrad_p_sq[i] = acc * m.rho.grid.cell_volume();
  }

  auto trapz = [&](const std::vector<double>& v) {
    double s = 0.0;
    for (std::size_t i = 1; i < traj.size(); ++i)
      s += 0.5 * (traj.times[i] - traj.times[i - 1]) * (v[i] + v[i - 1]);
    return s;
  };

  rep.lhs = sup_grad_sq + trapz(lap_sq);
  rep.rhs_bound = first_grad_sq + 2.0 * (trapz(grad_sq) + trapz(wgrad_p_sq));
  return rep;
}

}  // namespace taf
