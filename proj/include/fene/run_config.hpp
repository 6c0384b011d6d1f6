#pragma once
#include <string>

#include "fene/params.hpp"
#include "fene/solver.hpp"

namespace fene {

// Everything a `run` needs, with defaults that form a small but complete
// desk-scale scenario. Parsed from an INI-style file: [section] headers,
// `key = value` lines, `#` comments. Unknown keys, malformed values and
// out-of-domain settings are reported with the key name and line number.
struct RunConfig {
  PhysicalParams phys;

  // [grid]
  int nx = 32, ny = 32;
  double lx = 1.0, ly = 1.0;
  int n_modes = 16;
  int q_nr = 24, q_ntheta = 48;

  Scenario scenario;

  // [output]
  std::string out_dir = "out";
  std::string basis_cache_dir;
  int dump_every = 0;  // h-field dump cadence in samples, 0 = off
  bool write_velocity = false;
  std::string checkpoint_out, checkpoint_in;

  // [tolerances]
  double c_product = 1.0;  // knob for the coefficient-condition margin
};

RunConfig parse_config_text(const std::string& text);
RunConfig parse_config_file(const std::string& path);

/// Deterministic full echo of a config (defaults included), parseable back.
std::string render_config(const RunConfig& cfg);

/// Programmatic single-key assignment ("section.key" form) through the same
/// handlers as the file parser. Throws on unknown keys or malformed values;
/// domain validation is the caller's job (sweeps probe invalid points).
void set_config_key(RunConfig& cfg, const std::string& key, const std::string& value);

}  // namespace fene
