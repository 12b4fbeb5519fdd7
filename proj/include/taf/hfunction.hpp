#pragma once

#include <functional>
#include <string>

namespace taf {

/// Barrier function used to convert a lower bound on 1 - rho into an
/// L-infinity bound on h(1 - rho). Admissibility on (0, 1]:
///   h >= 0,  h' < 0 < h'',  h(s) -> infinity as s -> 0+,
///   s h''(s) / h'(s) bounded,
/// together with the derived bound s |h'(s)| <= h(s) + M.
/// The certificate records these checks on a logarithmic validation mesh;
/// M and the range of s h''/h' are estimated on the same mesh.
struct HFunction {
  std::string family;            // "power" or "loglog"
  double param = 0.0;            // exponent q, or shift c

  std::function<double(double)> h;
  std::function<double(double)> dh;
  std::function<double(double)> d2h;

  struct Certificate {
    bool valid = false;
    std::string violation;       // empty when valid
    double M = 0.0;              // mesh estimate of sup (s|h'| - h)+
    double ratio_min = 0.0;      // range of s h''/h' on the mesh
    double ratio_max = 0.0;
    double divergence_value = 0.0;  // h at the smallest mesh point
  };
  Certificate certificate;

  double operator()(double s) const { return h(s); }
};

struct HValidationOptions {
  double s_min = 1e-8;
  double s_max = 1.0;
  int points_per_decade = 16;
  /// Required blow-up level at s_min. The prototype s^-q reaches 1e3 well
  /// before s_min; iterated-log barriers diverge too slowly for any fixed
  /// numeric threshold, so their factory passes the level they provably
  /// exceed and the monotone blow-up checks carry the certificate.
  double divergence_threshold = 1e3;
};

HFunction::Certificate validate_h(const std::function<double(double)>& h,
                                  const std::function<double(double)>& dh,
                                  const std::function<double(double)>& d2h,
                                  const HValidationOptions& opt = {});

/// h(s) = s^-q, q > 0. Throws std::invalid_argument if the certificate
/// fails (e.g. q <= 0 makes h' >= 0).
HFunction make_power_h(double q);

/// h(s) = log(c - log s) = log(-log(beta s)) with beta = exp(-c); c > 1
/// keeps h'' > 0 on all of (0, 1] so no piecewise extension is needed.
HFunction make_loglog_h(double c = 1.1);

}  // namespace taf
