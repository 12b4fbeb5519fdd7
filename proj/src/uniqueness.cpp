#include "taf/uniqueness.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "taf/spectral.hpp"

namespace taf {

RealField perturbation_field(const TorusGrid& grid, const PerturbationSpec& spec) {
  if (grid.dims != 3)
    throw std::invalid_argument("perturbation_field: 3-D grid expected");
  RealField out(grid, 0);
  for (int l = 0; l < grid.n[2]; ++l)
    for (int j = 0; j < grid.n[1]; ++j)
      for (int i = 0; i < grid.n[0]; ++i) {
        const double cx = std::cos(grid.coord(0, i));
        const double v = spec.perturb_rho ? cx / kTwoPi : cx * std::cos(grid.coord(2, l));
        out.data[grid.index(i, j, l)] = spec.delta * v;
      }
  return out;
}

void PairedTrajectory::check_aligned() const {
  if (first.size() != second.size())
    throw std::invalid_argument("PairedTrajectory: sample counts differ");
  for (std::size_t i = 0; i < first.size(); ++i)
    if (std::fabs(first.times[i] - second.times[i]) > 1e-12)
      throw std::invalid_argument("PairedTrajectory: time stamps misaligned");
}

PairedTrajectory run_pair(const ModelState& base, const SolverConfig& config,
                          const PerturbationSpec& spec) {
  PairedTrajectory pair;
  pair.perturbation = spec;

  RealField pert = perturbation_field(base.f().grid, spec);
  RealField f2 = base.f();
  for (std::size_t p = 0; p < f2.point_count(); ++p) f2.data[p] += pert.data[p];

  TrajectoryRecorder rec1, rec2;
  RunResult r1 = run(base, config, {&rec1});
  RunResult r2 = run(ModelState(std::move(f2), base.time(), base.step()), config, {&rec2});
  if (r1.status != RunStatus::ok || r2.status != RunStatus::ok)
    throw std::runtime_error("run_pair: a member run aborted: " +
                             (r1.status != RunStatus::ok ? r1.message : r2.message));
  pair.first = rec1.trajectory();
  pair.second = rec2.trajectory();
  pair.dt = r1.dt_used;
  pair.check_aligned();
  return pair;
}

DifferenceFields difference_fields(const PairedTrajectory& pair, double t) {
  pair.check_aligned();
  const std::size_t i = pair.first.index_at(t);
  DifferenceFields d;
  d.t = pair.first.times[i];
  d.f_bar = pair.first.fields[i];
  for (std::size_t p = 0; p < d.f_bar.point_count(); ++p)
    d.f_bar.data[p] -= pair.second.fields[i].data[p];
  d.rho_bar = moment_tensor(d.f_bar, 0);
  d.p_bar = moment_tensor(d.f_bar, 1);
  d.P_bar = moment_tensor(d.f_bar, 2);
  return d;
}

RatioResult linfty_l2_ratio(const PairedTrajectory& pair, double t) {
  pair.check_aligned();
  RatioResult out;

  std::vector<double> times;
  std::vector<RealField> fbars;
  double sup_inf = 0.0;
  for (std::size_t i = 0; i < pair.size(); ++i) {
    if (pair.first.times[i] > t + 1e-12) break;
    RealField fb = pair.first.fields[i];
    for (std::size_t p = 0; p < fb.point_count(); ++p)
      fb.data[p] -= pair.second.fields[i].data[p];
    RealField rb = moment_tensor(fb, 0);
    sup_inf = std::max(sup_inf, lq_norm(rb, std::numeric_limits<double>::infinity()));
    times.push_back(pair.first.times[i]);
    fbars.push_back(std::move(fb));
  }
  if (times.size() < 2) {
    out.note = "window under-sampled";
    return out;
  }
  const double denom = lq_time_norm(times, fbars, 2.0);
  if (denom < 1e-13) {
    out.note = "identical trajectories: ratio undefined";
    return out;
  }
  out.defined = true;
  out.value = sup_inf / denom;
  return out;
}

DuhamelReconstruction duhamel_reconstruction(const PairedTrajectory& pair, double t,
                                             const PeriodicHeatKernel& kernel) {
  pair.check_aligned();

  // Forcing series G(tau) = (1 - rho_1) p_bar - rho_bar p_2, assembled with
  // the same dealiased products the density equation uses, so the evolved
  // rho_bar satisfies  d rho_bar/dt - Lap rho_bar = -div G  semi-discretely.
  std::vector<double> times;
  std::vector<RealField> G;
  for (std::size_t i = 0; i < pair.size(); ++i) {
    if (pair.first.times[i] > t + 1e-9) break;
    const RealField& fa = pair.first.fields[i];
    const RealField& fb = pair.second.fields[i];

    RealField rho1 = moment_tensor(fa, 0);
    RealField rho2 = moment_tensor(fb, 0);
    RealField p2 = moment_tensor(fb, 1);
    RealField fbar = fa;
    for (std::size_t p = 0; p < fbar.point_count(); ++p) fbar.data[p] -= fb.data[p];
    RealField rho_bar = moment_tensor(fbar, 0);
    RealField p_bar = moment_tensor(fbar, 1);

    RealField u1(rho1.grid, 0);
    for (std::size_t p = 0; p < u1.point_count(); ++p) u1.data[p] = 1.0 - rho1.data[p];

    RealField a = dealiased_product(u1, p_bar);
    RealField b = dealiased_product(rho_bar, p2);
    RealField g(rho1.grid, 1);
    for (std::size_t c = 0; c < 2; ++c)
      for (std::size_t p = 0; p < g.point_count(); ++p)
        g.at(c, p) = a.at(c, p) - b.at(c, p);
    times.push_back(pair.first.times[i]);
    G.push_back(std::move(g));
  }
  if (times.size() < 2)
    throw std::invalid_argument("duhamel_reconstruction: G series under-sampled in [0, t]");

  const double t_eval = times.back();
  RealField recon = kernel.duhamel(times, G, t_eval);

  // Homogeneous contribution from a non-zero initial density difference.
  DifferenceFields d0 = difference_fields(pair, 0.0);
  const double rho0_mag =
      lq_norm(d0.rho_bar, std::numeric_limits<double>::infinity());
  if (rho0_mag > 1e-14) {
    SpectralField R0 = transform(d0.rho_bar);
    const TorusGrid& g2 = d0.rho_bar.grid;
    for (std::size_t p = 0; p < g2.point_count(); ++p) {
      const int kx = wavenumber(g2.n[0], static_cast<int>(p % g2.n[0]));
      const int ky = wavenumber(g2.n[1], static_cast<int>(p / g2.n[0]));
      R0.data[p] *= std::exp(-(static_cast<double>(kx) * kx + ky * ky) * t_eval);
    }
    RealField hom = inverse(R0);
    for (std::size_t p = 0; p < recon.point_count(); ++p) recon.data[p] += hom.data[p];
  }

  DifferenceFields dt_fields = difference_fields(pair, t_eval);
  DuhamelReconstruction out;
  out.reconstructed = recon;
  double max_defect = 0.0;
  for (std::size_t p = 0; p < recon.point_count(); ++p)
    max_defect = std::max(max_defect,
                          std::fabs(recon.data[p] - dt_fields.rho_bar.data[p]));
  out.max_defect = max_defect;
  const double base =
      lq_norm(dt_fields.rho_bar, std::numeric_limits<double>::infinity());
  out.rel_defect = (base > 0.0) ? max_defect / base : 0.0;
  return out;
}

GronwallFit gronwall_fit(const PairedTrajectory& pair) {
  pair.check_aligned();
  GronwallFit out;

  std::vector<double> ts, logy;
  std::vector<double> ys;
  for (std::size_t i = 0; i < pair.size(); ++i) {
    RealField fb = pair.first.fields[i];
    for (std::size_t p = 0; p < fb.point_count(); ++p)
      fb.data[p] -= pair.second.fields[i].data[p];
    const double n2 = lq_norm(fb, 2.0);
    const double y = n2 * n2;
    if (y <= 0.0 || !std::isfinite(std::log(y))) return out;  // identical runs: flagged
    ts.push_back(pair.first.times[i]);
    ys.push_back(y);
    logy.push_back(std::log(y));
  }
  if (ts.size() < 3) return out;

  const double n = static_cast<double>(ts.size());
  double st = 0, sy = 0, stt = 0, sty = 0;
  for (std::size_t i = 0; i < ts.size(); ++i) {
    st += ts[i];
    sy += logy[i];
    stt += ts[i] * ts[i];
    sty += ts[i] * logy[i];
  }
  const double det = n * stt - st * st;
  if (std::fabs(det) < 1e-30) return out;
  out.c_hat = (n * sty - st * sy) / det;
  const double intercept = (sy - out.c_hat * st) / n;

  double ss_res = 0, ss_tot = 0;
  const double mean = sy / n;
  for (std::size_t i = 0; i < ts.size(); ++i) {
    const double pred = intercept + out.c_hat * ts[i];
    ss_res += (logy[i] - pred) * (logy[i] - pred);
    ss_tot += (logy[i] - mean) * (logy[i] - mean);
  }
  out.r_squared = (ss_tot > 0.0) ? 1.0 - ss_res / ss_tot : 1.0;

  double excess = 0.0;
  for (std::size_t i = 0; i < ts.size(); ++i) {
    const double envelope = ys.front() * std::exp(out.c_hat * ts[i]);
    excess = std::max(excess, ys[i] / envelope - 1.0);
  }
  out.max_envelope_excess = excess;
  out.defined = true;
  return out;
}

std::vector<PairSeriesRow> pair_series(const PairedTrajectory& pair,
                                       const PeriodicHeatKernel& kernel) {
  pair.check_aligned();
  GronwallFit fit = gronwall_fit(pair);

  std::vector<PairSeriesRow> rows;
  const double y0 = [&] {
    DifferenceFields d = difference_fields(pair, pair.first.times.front());
    const double n = lq_norm(d.f_bar, 2.0);
    return n * n;
  }();

  for (std::size_t i = 0; i < pair.size(); ++i) {
    const double t = pair.first.times[i];
    PairSeriesRow row{};
    row.t = t;
    DifferenceFields d = difference_fields(pair, t);
    row.l2_f_bar = lq_norm(d.f_bar, 2.0);
    row.linf_rho_bar = lq_norm(d.rho_bar, std::numeric_limits<double>::infinity());
    RatioResult r = linfty_l2_ratio(pair, t);
    row.ratio = r.defined ? r.value : std::numeric_limits<double>::quiet_NaN();
    if (i > 0 && i + 1 == pair.size()) {
      row.recon_defect = duhamel_reconstruction(pair, t, kernel).rel_defect;
    } else {
      row.recon_defect = std::numeric_limits<double>::quiet_NaN();
    }
    row.envelope = fit.defined ? y0 * std::exp(fit.c_hat * t)
                               : std::numeric_limits<double>::quiet_NaN();
    rows.push_back(row);
  }
  return rows;
}

}  // namespace taf
