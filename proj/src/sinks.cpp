#include "taf/sinks.hpp"

#include <stdexcept>

namespace taf {

CsvSink::CsvSink(const std::string& path) {
  file_ = std::fopen(path.c_str(), "w");
  if (!file_) throw std::runtime_error("CsvSink: cannot open '" + path + "'");
  std::fputs(header().c_str(), file_);
}

CsvSink::~CsvSink() {
  if (file_) std::fclose(file_);
}

std::string CsvSink::header() {
  return "t,step,mass,min_f,min_one_minus_rho,entropy,L2_f,H1_f,L2_rho,"
         "mass_drift_rel,div_nondiv_rel\n";
}

std::string CsvSink::format_row(const DiagnosticsRow& r) {
  char buf[512];
  std::snprintf(buf, sizeof buf,
                "%.17g,%ld,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", r.t,
                r.step, r.mass, r.min_f, r.min_one_minus_rho, r.entropy, r.l2_f, r.h1_f,
                r.l2_rho, r.mass_drift_rel, r.div_nondiv_rel);
  return buf;
}

void CsvSink::on_sample(const DiagnosticsRow& row, const ModelState&) {
  std::fputs(format_row(row).c_str(), file_);
  std::fflush(file_);
}

}  // namespace taf
