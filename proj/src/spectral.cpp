#include "taf/spectral.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <mutex>
#include <stdexcept>

namespace taf {

namespace detail {

namespace {

// FFTW plan cache. Plans are reused across calls for a given line length and
// direction; creation is guarded because the FFTW planner is not thread-safe.
// Execution goes through fftw_execute_dft on a per-call buffer, which is safe.
struct PlanCache {
  std::mutex mu;
  std::map<std::pair<int, int>, fftw_plan> plans;  // (n, sign) -> plan

  fftw_plan get(int n, int sign, fftw_complex* buf) {
    std::lock_guard<std::mutex> lock(mu);
    auto key = std::make_pair(n, sign);
    auto it = plans.find(key);
    if (it != plans.end()) return it->second;
    fftw_plan p = fftw_plan_dft_1d(n, buf, buf, sign < 0 ? FFTW_FORWARD : FFTW_BACKWARD,
                                   FFTW_ESTIMATE | FFTW_UNALIGNED);
    plans.emplace(key, p);
    return p;
  }
};

PlanCache& plan_cache() {
  static PlanCache cache;
  return cache;
}

}  // namespace

void fft_axis(std::complex<double>* data, const TorusGrid& grid, std::size_t components,
              int axis, int sign) {
  const int n = grid.axis_size(axis);
  const std::size_t npts = grid.point_count();
  std::vector<std::complex<double>> line(n);
  fftw_plan plan = plan_cache().get(n, sign, reinterpret_cast<fftw_complex*>(line.data()));

  // Stride pattern of the axis in the x-fastest layout.
  std::size_t stride = 1;
  for (int a = 0; a < axis; ++a) stride *= grid.axis_size(a);
  const std::size_t line_count = npts / n;

  for (std::size_t c = 0; c < components; ++c) {
    std::complex<double>* base = data + c * npts;
    for (std::size_t l = 0; l < line_count; ++l) {
      // Decompose the line id into (offset below axis, offset above axis).
      const std::size_t lo = l % stride;
      const std::size_t hi = l / stride;
      std::complex<double>* start = base + lo + hi * stride * n;
      for (int j = 0; j < n; ++j) line[j] = start[j * stride];
      fftw_execute_dft(plan, reinterpret_cast<fftw_complex*>(line.data()),
                       reinterpret_cast<fftw_complex*>(line.data()));
      for (int j = 0; j < n; ++j) start[j * stride] = line[j];
    }
  }
}

}  // namespace detail

SpectralField transform(const RealField& field) {
  if (!field.finite())
    throw std::invalid_argument("transform: non-finite input field");
  SpectralField out(field.grid, field.order);
  for (std::size_t i = 0; i < field.data.size(); ++i) out.data[i] = field.data[i];
  for (int a = 0; a < field.grid.dims; ++a)
    detail::fft_axis(out.data.data(), out.grid, out.component_count(), a, -1);
  return out;
}

RealField inverse(const SpectralField& field) {
  std::vector<std::complex<double>> work = field.data;
  for (int a = 0; a < field.grid.dims; ++a)
    detail::fft_axis(work.data(), field.grid, field.component_count(), a, +1);
  RealField out(field.grid, field.order);
  const double scale = 1.0 / static_cast<double>(field.grid.point_count());
  for (std::size_t i = 0; i < work.size(); ++i) out.data[i] = work[i].real() * scale;
  return out;
}

SpectralField derivative(const SpectralField& field, int axis, int order) {
  if (order != 1 && order != 2)
    throw std::invalid_argument("derivative: order must be 1 or 2");
  const int n = field.grid.axis_size(axis);  // validates axis
  SpectralField out = field;

  std::size_t stride = 1;
  for (int a = 0; a < axis; ++a) stride *= field.grid.axis_size(a);
  const std::size_t npts = field.grid.point_count();

  for (std::size_t c = 0; c < out.component_count(); ++c) {
    std::complex<double>* base = out.data.data() + c * npts;
    for (std::size_t p = 0; p < npts; ++p) {
      const int i = static_cast<int>((p / stride) % n);
      const int k = wavenumber(n, i);
      if (i == n / 2) {
        base[p] = 0.0;  // unsigned Nyquist mode
      } else if (order == 1) {
        base[p] *= std::complex<double>(0.0, static_cast<double>(k));
      } else {
        base[p] *= -static_cast<double>(k) * static_cast<double>(k);
      }
    }
  }
  return out;
}

RealField derivative(const RealField& field, int axis, int order) {
  return inverse(derivative(transform(field), axis, order));
}

int dealias_cutoff(int n) { return (n - 1) / 3; }

void dealias_inplace(SpectralField& field) {
  const TorusGrid& g = field.grid;
  const std::size_t npts = g.point_count();
  std::array<int, 3> cut = {0, 0, 0};
  for (int a = 0; a < g.dims; ++a) cut[a] = dealias_cutoff(g.n[a]);

  for (std::size_t c = 0; c < field.component_count(); ++c) {
    std::complex<double>* base = field.data.data() + c * npts;
    for (std::size_t p = 0; p < npts; ++p) {
      std::size_t rem = p;
      bool kill = false;
      for (int a = 0; a < g.dims; ++a) {
        const int i = static_cast<int>(rem % g.n[a]);
        rem /= g.n[a];
        if (std::abs(wavenumber(g.n[a], i)) > cut[a]) {
          kill = true;
          break;
        }
      }
      if (kill) base[p] = 0.0;
    }
  }
}

RealField dealias(const RealField& field) {
  SpectralField F = transform(field);
  dealias_inplace(F);
  return inverse(F);
}

RealField dealiased_product(const RealField& a, const RealField& b) {
  check_same_grid(a.grid, b.grid, "dealiased_product");
  if (a.order != 0)
    throw std::invalid_argument("dealiased_product: first factor must be scalar");
  RealField ta = dealias(a);
  RealField tb = dealias(b);
  RealField prod(a.grid, b.order);
  const std::size_t npts = a.point_count();
  for (std::size_t c = 0; c < prod.component_count(); ++c)
    for (std::size_t p = 0; p < npts; ++p) prod.at(c, p) = ta.data[p] * tb.at(c, p);
  return dealias(prod);
}

double lq_norm(const RealField& field, double q) {
  if (q < 1.0) throw std::invalid_argument("lq_norm: q must be >= 1");
  const std::size_t npts = field.point_count();
  const std::size_t ncomp = field.component_count();

  if (std::isinf(q)) {
    double m = 0.0;
    for (std::size_t p = 0; p < npts; ++p) {
      double s = 0.0;
      for (std::size_t c = 0; c < ncomp; ++c) s += field.at(c, p) * field.at(c, p);
      m = std::max(m, s);
    }
    return std::sqrt(m);
  }

  double acc = 0.0;
  for (std::size_t p = 0; p < npts; ++p) {
    double s = 0.0;
    for (std::size_t c = 0; c < ncomp; ++c) s += field.at(c, p) * field.at(c, p);
    acc += (q == 2.0) ? s : std::pow(std::sqrt(s), q);
  }
  return std::pow(field.grid.cell_volume() * acc, 1.0 / q);
}

double lq_time_norm(const std::vector<double>& times, const std::vector<RealField>& fields,
                    double q) {
  if (times.size() != fields.size() || times.size() < 2)
    throw std::invalid_argument("lq_time_norm: need >= 2 aligned samples");
  if (q < 1.0) throw std::invalid_argument("lq_time_norm: q must be >= 1");

  if (std::isinf(q)) {
    double m = 0.0;
    for (const auto& f : fields) m = std::max(m, lq_norm(f, q));
    return m;
  }

  double acc = 0.0;
  double prev = std::pow(lq_norm(fields[0], q), q);
  for (std::size_t i = 1; i < times.size(); ++i) {
    const double cur = std::pow(lq_norm(fields[i], q), q);
    acc += 0.5 * (times[i] - times[i - 1]) * (prev + cur);
    prev = cur;
  }
  return std::pow(acc, 1.0 / q);
}

double inner_product(const RealField& a, const RealField& b) {
  check_same_grid(a.grid, b.grid, "inner_product");
  if (a.order != b.order) throw std::invalid_argument("inner_product: rank mismatch");
  double acc = 0.0;
  for (std::size_t i = 0; i < a.data.size(); ++i) acc += a.data[i] * b.data[i];
  return acc * a.grid.cell_volume();
}

double integral(const RealField& field) {
  if (field.order != 0) throw std::invalid_argument("integral: scalar fields only");
  double acc = 0.0;
  for (double v : field.data) acc += v;
  return acc * field.grid.cell_volume();
}

SpectralField galerkin_project(const SpectralField& field, int n_cut) {
  if (n_cut < 0) throw std::invalid_argument("galerkin_project: cutoff must be >= 0");
  SpectralField out = field;
  const TorusGrid& g = field.grid;
  const std::size_t npts = g.point_count();
  const long cut2 = static_cast<long>(n_cut) * n_cut;

  for (std::size_t c = 0; c < out.component_count(); ++c) {
    std::complex<double>* base = out.data.data() + c * npts;
    for (std::size_t p = 0; p < npts; ++p) {
      std::size_t rem = p;
      long k2 = 0;
      for (int a = 0; a < g.dims; ++a) {
        const int i = static_cast<int>(rem % g.n[a]);
        rem /= g.n[a];
        const long k = wavenumber(g.n[a], i);
        k2 += k * k;
      }
      if (k2 > cut2) base[p] = 0.0;
    }
  }
  return out;
}

RealField galerkin_project(const RealField& field, int n_cut) {
  return inverse(galerkin_project(transform(field), n_cut));
}

RealField resample(const RealField& field, const TorusGrid& target) {
  if (target.dims != field.grid.dims)
    throw std::invalid_argument("resample: dimension mismatch");
  SpectralField src = transform(field);
  SpectralField dst(target, field.order);
  const TorusGrid& gs = field.grid;

  // Copy every source mode representable on the target; unsigned source
  // Nyquist content is dropped rather than duplicated.
  const std::size_t nsrc = gs.point_count();
  for (std::size_t c = 0; c < src.component_count(); ++c) {
    for (std::size_t p = 0; p < nsrc; ++p) {
      std::size_t rem = p;
      std::array<int, 3> k = {0, 0, 0};
      bool keep = true;
      for (int a = 0; a < gs.dims; ++a) {
        const int i = static_cast<int>(rem % gs.n[a]);
        rem /= gs.n[a];
        if (i == gs.n[a] / 2) keep = false;
        k[a] = wavenumber(gs.n[a], i);
        if (std::abs(k[a]) >= target.n[a] / 2) keep = false;
      }
      if (!keep) continue;
      std::size_t q = 0, mult = 1;
      for (int a = 0; a < gs.dims; ++a) {
        const int i = (k[a] >= 0) ? k[a] : k[a] + target.n[a];
        q += mult * static_cast<std::size_t>(i);
        mult *= target.n[a];
      }
      dst.data[c * target.point_count() + q] = src.data[c * nsrc + p];
    }
  }

  const double scale =
      static_cast<double>(target.point_count()) / static_cast<double>(gs.point_count());
  for (auto& v : dst.data) v *= scale;
  return inverse(dst);
}

}  // namespace taf
