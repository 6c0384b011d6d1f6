#pragma once
#include <string>

#include "fene/solver.hpp"

namespace fene {

// Binary h-field dump: fixed magic + header (q-grid sizes, delta, flow-grid
// sizes) followed by the column-major h matrix. Loaders validate the header
// against the live grids and fail with a descriptive error on mismatch.

void save_h_field(const std::string& path, const ConfigField& f, const QGrid& qgrid,
                  const FlowGrid& fgrid);
ConfigField load_h_field(const std::string& path, const QGrid& qgrid);

/// Nodal velocity as CSV rows "x,y,u,v" (vertex-ordered, deterministic).
void write_velocity_csv(const std::string& path, const FlowGrid& g, const Field2& u);

// Checkpoint = h-field header + time + basis coefficients + h matrix; restore
// reconstructs the nodal velocity from the coefficients.
void save_checkpoint(const std::string& path, const CoupledState& st,
                     const CoupledSolver& solver);
CoupledState load_checkpoint(const std::string& path, const CoupledSolver& solver);

}  // namespace fene
