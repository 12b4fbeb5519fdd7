#include "taf/hfunction.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

namespace taf {

namespace {

std::vector<double> log_mesh(double s_min, double s_max, int per_decade) {
  std::vector<double> mesh;
  const double l0 = std::log10(s_min), l1 = std::log10(s_max);
  const int count = static_cast<int>(std::ceil((l1 - l0) * per_decade)) + 1;
  for (int i = 0; i < count; ++i)
    mesh.push_back(std::pow(10.0, l0 + (l1 - l0) * i / (count - 1)));
  mesh.back() = s_max;
  return mesh;
}

}  // namespace

HFunction::Certificate validate_h(const std::function<double(double)>& h,
                                  const std::function<double(double)>& dh,
                                  const std::function<double(double)>& d2h,
                                  const HValidationOptions& opt) {
  HFunction::Certificate cert;
  const auto mesh = log_mesh(opt.s_min, opt.s_max, opt.points_per_decade);

  double M = 0.0;
  double rmin = std::numeric_limits<double>::infinity();
  double rmax = -std::numeric_limits<double>::infinity();
  for (double s : mesh) {
    const double hv = h(s), h1 = dh(s), h2 = d2h(s);
    if (!std::isfinite(hv) || !std::isfinite(h1) || !std::isfinite(h2)) {
      cert.violation = "non-finite value at s=" + std::to_string(s);
      return cert;
    }
    if (hv < 0.0) {
      cert.violation = "h < 0 at s=" + std::to_string(s) + "; admissibility requires h >= 0";
      return cert;
    }
    if (!(h1 < 0.0) || !(h2 > 0.0)) {
      cert.violation = "admissibility requires h' < 0 < h'' on (0,1]; violated at s=" +
                       std::to_string(s);
      return cert;
    }
    M = std::max(M, s * std::fabs(h1) - hv);
    const double r = s * h2 / h1;
    rmin = std::min(rmin, r);
    rmax = std::max(rmax, r);
  }

  // Blow-up towards s = 0: strict growth along 1e-2 -> 1e-4 -> 1e-8 plus the
  // family-level divergence threshold.
  const double h8 = h(1e-8), h4 = h(1e-4), h2v = h(1e-2);
  if (!(h8 > h4 && h4 > h2v)) {
    cert.violation = "h must blow up as s -> 0+: need h(1e-8) > h(1e-4) > h(1e-2)";
    return cert;
  }
  if (!(h8 > opt.divergence_threshold)) {
    cert.violation = "h(1e-8) = " + std::to_string(h8) +
                     " does not exceed the divergence threshold " +
                     std::to_string(opt.divergence_threshold);
    return cert;
  }

  cert.valid = true;
  cert.M = std::max(M, 0.0);
  cert.ratio_min = rmin;
  cert.ratio_max = rmax;
  cert.divergence_value = h8;
  return cert;
}

HFunction make_power_h(double q) {
  HFunction f;
  f.family = "power";
  f.param = q;
  f.h = [q](double s) { return std::pow(s, -q); };
  f.dh = [q](double s) { return -q * std::pow(s, -q - 1.0); };
  f.d2h = [q](double s) { return q * (q + 1.0) * std::pow(s, -q - 2.0); };
  HValidationOptions opt;
  f.certificate = validate_h(f.h, f.dh, f.d2h, opt);
  if (!f.certificate.valid)
    throw std::invalid_argument("make_power_h(q=" + std::to_string(q) +
                                "): " + f.certificate.violation);
  return f;
}

HFunction make_loglog_h(double c) {
  if (!(c > 1.0))
    throw std::invalid_argument("make_loglog_h: need c > 1 so that h'' > 0 on (0,1]");
  HFunction f;
  f.family = "loglog";
  f.param = c;
  f.h = [c](double s) { return std::log(c - std::log(s)); };
  f.dh = [c](double s) { return -1.0 / (s * (c - std::log(s))); };
  f.d2h = [c](double s) {
    const double g = c - std::log(s);
    return (g - 1.0) / (s * s * g * g);
  };
  HValidationOptions opt;
  // log(c - log s) at s = 1e-8 is ~ log(19) ~ 3; it diverges, but doubly
  // logarithmically. Certify against the level it provably exceeds.
  opt.divergence_threshold = std::log(c - std::log(1e-8)) * 0.5;
  f.certificate = validate_h(f.h, f.dh, f.d2h, opt);
  if (!f.certificate.valid)
    throw std::invalid_argument("make_loglog_h(c=" + std::to_string(c) +
                                "): " + f.certificate.violation);
  return f;
}

}  // namespace taf
