#pragma once

#include <cstdio>
#include <string>
#include <vector>

namespace taf {

class ModelState;

/// One diagnostics record, emitted by the time stepper at its cadence.
/// min_f and min_one_minus_rho are first-class: positivity is monitored,
/// never enforced. div_nondiv_rel tracks the relative L2 gap between the
/// divergence- and non-divergence-form right-hand sides.
struct DiagnosticsRow {
  double t = 0.0;
  long step = 0;
  double mass = 0.0;
  double min_f = 0.0;
  double min_one_minus_rho = 0.0;
  double entropy = 0.0;          // NaN if the occupancy bound is violated
  double l2_f = 0.0;
  double h1_f = 0.0;             // L2 norm of the full space-angle gradient
  double l2_rho = 0.0;
  double mass_drift_rel = 0.0;   // |mass - mass(0)| / |mass(0)|
  double div_nondiv_rel = 0.0;
};

class DiagnosticsSink {
 public:
  virtual ~DiagnosticsSink() = default;
  virtual void on_sample(const DiagnosticsRow& row, const ModelState& state) = 0;
};

/// Serializes rows as CSV with a fixed 17-significant-digit format so that
/// identical runs produce byte-identical files.
class CsvSink : public DiagnosticsSink {
 public:
  explicit CsvSink(const std::string& path);
  ~CsvSink() override;
  void on_sample(const DiagnosticsRow& row, const ModelState& state) override;
  static std::string format_row(const DiagnosticsRow& row);
  static std::string header();

 private:
  std::FILE* file_ = nullptr;
};

}  // namespace taf
