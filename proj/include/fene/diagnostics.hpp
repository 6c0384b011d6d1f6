#pragma once
#include <iosfwd>
#include <string>
#include <vector>

namespace fene {

// One time-step row of the energy/identity ledger. Column order is the CSV
// schema; keep the two in sync.
struct DiagnosticsRecord {
  double t = 0;
  double u_l2 = 0;
  double grad_u_l2 = 0;
  double psi_l2m = 0;        // || f - a M ||_{L^2_M(Omega x D)}
  double psi_hdot = 0;       // aggregated Hdot seminorm
  double mass_dev_max = 0;   // max over cells of |q_mass - 1/R^2|
  double positivity_min = 0; // min over cells/nodes of f
  double corot_residual = 0; // d/dt ||psi||^2 + 2 alpha3 ||psi||_Hdot^2
  double energy_margin = 0;  // RHS - LHS of the L^2 energy bound
  double coupling_residual = 0;
  int picard_iters = 0;
};

extern const char* const kDiagnosticsCsvHeader;

std::string diagnostics_csv_row(const DiagnosticsRecord& r);
void write_diagnostics_csv(std::ostream& os, const std::vector<DiagnosticsRecord>& recs);
void write_diagnostics_csv_file(const std::string& path,
                                const std::vector<DiagnosticsRecord>& recs);
std::vector<DiagnosticsRecord> read_diagnostics_csv_file(const std::string& path);

}  // namespace fene
