#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "fene/decay_fit.hpp"
#include "fene/run_config.hpp"
#include "fene/state_io.hpp"

namespace fs = std::filesystem;
using namespace fene;

namespace {

struct AxisSpec {
  std::string key;
  std::vector<std::string> values;
};

// "section.key=a,b,c" or "section.key=start:stop:count"
AxisSpec parse_axis(const std::string& s) {
  const auto eq = s.find('=');
  if (eq == std::string::npos)
    throw CLI::ValidationError("--axis", "expected key=v1,v2,... or key=start:stop:count");
  AxisSpec ax;
  ax.key = s.substr(0, eq);
  const std::string rhs = s.substr(eq + 1);
  const auto c1 = rhs.find(':');
  if (c1 != std::string::npos) {
    const auto c2 = rhs.find(':', c1 + 1);
    if (c2 == std::string::npos)
      throw CLI::ValidationError("--axis", "range form is start:stop:count");
    const double a = std::stod(rhs.substr(0, c1));
    const double b = std::stod(rhs.substr(c1 + 1, c2 - c1 - 1));
    const int n = std::stoi(rhs.substr(c2 + 1));
    if (n < 1) throw CLI::ValidationError("--axis", "count must be >= 1");
    char buf[64];
    for (int i = 0; i < n; ++i) {
      const double x = (n == 1) ? a : a + (b - a) * i / (n - 1);
      std::snprintf(buf, sizeof(buf), "%.17g", x);
      ax.values.push_back(buf);
    }
  } else {
    std::size_t pos = 0;
    while (pos <= rhs.size()) {
      const auto comma = rhs.find(',', pos);
      const std::string tok =
          rhs.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
      if (!tok.empty()) ax.values.push_back(tok);
      if (comma == std::string::npos) break;
      pos = comma + 1;
    }
    if (ax.values.empty()) throw CLI::ValidationError("--axis", "no values given");
  }
  return ax;
}

std::unique_ptr<CoupledSolver> build_solver(const RunConfig& cfg) {
  FlowGrid g(cfg.nx, cfg.ny, cfg.lx, cfg.ly);
  return std::make_unique<CoupledSolver>(cfg.phys, g, cfg.n_modes, cfg.q_nr,
                                         cfg.q_ntheta, cfg.basis_cache_dir);
}

int cmd_run(const std::string& config_path, bool echo) {
  RunConfig cfg = parse_config_file(config_path);
  if (echo) std::cout << render_config(cfg);
  fs::create_directories(cfg.out_dir);
  auto solver = build_solver(cfg);

  std::unique_ptr<CoupledState> init;
  if (!cfg.checkpoint_in.empty())
    init = std::make_unique<CoupledState>(load_checkpoint(cfg.checkpoint_in, *solver));

  int sample_no = 0;
  const CoupledState* final_state = nullptr;
  CoupledState last;
  auto hook = [&](const CoupledState& st, const DiagnosticsRecord&) {
    if (cfg.dump_every > 0 && sample_no % cfg.dump_every == 0) {
      char name[64];
      std::snprintf(name, sizeof(name), "h_%06d.bin", sample_no);
      save_h_field((fs::path(cfg.out_dir) / name).string(), st.f, solver->qgrid(),
                   solver->fgrid());
    }
    ++sample_no;
    last = st;  // keep a copy for end-of-run outputs
    final_state = &last;
  };

  auto res = solver->run(cfg.scenario, hook, init.get());
  write_diagnostics_csv_file((fs::path(cfg.out_dir) / "diagnostics.csv").string(),
                             res.records);
  if (final_state) {
    if (cfg.write_velocity)
      write_velocity_csv((fs::path(cfg.out_dir) / "velocity.csv").string(),
                         solver->fgrid(), final_state->u_nodal);
    if (!cfg.checkpoint_out.empty())
      save_checkpoint(cfg.checkpoint_out, *final_state, *solver);
  }
  std::printf("run complete: %zu records, mass_dev_max=%.3e, positivity_min=%.3e\n",
              res.records.size(), res.mass_dev_max, res.positivity_min);
  return 0;
}

int cmd_check_params(const std::string& config_path) {
  RunConfig cfg = parse_config_file(config_path);
  DerivedParams d = derive_params(cfg.phys);
  ConditionReport rep = check_coefficient_condition(d, cfg.c_product);
  std::printf("delta   = %.17g\n", d.delta);
  std::printf("alpha1  = %.17g\n", d.alpha1);
  std::printf("alpha2  = %.17g\n", d.alpha2);
  std::printf("alpha3  = %.17g\n", d.alpha3);
  std::printf("alpha4  = %.17g\n", d.alpha4);
  std::printf("a_eq    = %.17g\n", d.a_eq);
  std::printf("condition margin (c_product=%.17g): %.17g  [%s]\n", cfg.c_product,
              rep.margin, rep.satisfied ? "satisfied" : "violated");
  return rep.satisfied ? 0 : 1;
}

int cmd_dump_basis(const std::string& config_path, const std::string& out) {
  RunConfig cfg = parse_config_file(config_path);
  auto solver = build_solver(cfg);
  const StokesBasis& b = solver->basis();
  std::ostream* os = &std::cout;
  std::ofstream f;
  if (!out.empty()) {
    f.open(out);
    if (!f) throw std::runtime_error("cannot open for writing: " + out);
    os = &f;
  }
  (*os) << "mode,lambda,grad_norm_sq,max_divergence\n";
  char buf[160];
  for (int i = 0; i < b.n(); ++i) {
    std::snprintf(buf, sizeof(buf), "%d,%.17g,%.17g,%.17g\n", i + 1, b.lambda[i],
                  grad_norm_sq(solver->fgrid(), b.modes[i]),
                  solver->stokes().max_divergence(b.modes[i]));
    (*os) << buf;
  }
  return 0;
}

int cmd_fit_decay(const std::string& csv, const std::string& column, double skip,
                  double floor) {
  auto recs = read_diagnostics_csv_file(csv);
  std::vector<double> t, y;
  for (const auto& r : recs) {
    t.push_back(r.t);
    if (column == "psi_l2m")
      y.push_back(r.psi_l2m);
    else if (column == "u_l2")
      y.push_back(r.u_l2);
    else if (column == "psi_hdot")
      y.push_back(r.psi_hdot);
    else
      throw std::runtime_error("unsupported column '" + column +
                               "' (psi_l2m|u_l2|psi_hdot)");
  }
  DecayFit fit = fit_exponential_decay(t, y, skip, floor);
  if (fit.below_noise_floor) {
    std::printf("below noise floor (max %s <= %.3g); no rate fitted\n", column.c_str(),
                floor);
    return 0;
  }
  std::printf("column=%s rate=%.10g intercept=%.10g r2=%.6f n=%d\n", column.c_str(),
              fit.rate, fit.intercept, fit.r_squared, fit.n_used);
  return 0;
}

int cmd_sweep(const std::string& config_path, const std::vector<std::string>& axes_raw,
              bool do_run, const std::string& out) {
  RunConfig base = parse_config_file(config_path);
  std::vector<AxisSpec> axes;
  for (const auto& s : axes_raw) axes.push_back(parse_axis(s));
  if (axes.empty()) throw std::runtime_error("sweep: at least one --axis required");

  std::ostream* os = &std::cout;
  std::ofstream f;
  if (!out.empty()) {
    f.open(out);
    if (!f) throw std::runtime_error("cannot open for writing: " + out);
    os = &f;
  }
  for (const auto& ax : axes) (*os) << ax.key << ",";
  (*os) << "margin,satisfied,status" << (do_run ? ",psi_l2m_final,mass_dev_max" : "")
        << "\n";

  // Cartesian product via mixed-radix counter.
  std::vector<std::size_t> idx(axes.size(), 0);
  bool done = false;
  while (!done) {
    RunConfig cfg = base;
    std::string prefix;
    for (std::size_t a = 0; a < axes.size(); ++a) {
      set_config_key(cfg, axes[a].key, axes[a].values[idx[a]]);
      prefix += axes[a].values[idx[a]] + ",";
    }
    std::string row;
    try {
      cfg.phys.validate();
      DerivedParams d = derive_params(cfg.phys);
      ConditionReport rep = check_coefficient_condition(d, cfg.c_product);
      char buf[128];
      std::snprintf(buf, sizeof(buf), "%.10g,%d,ok", rep.margin, rep.satisfied ? 1 : 0);
      row = buf;
      if (do_run) {
        auto solver = build_solver(cfg);
        auto res = solver->run(cfg.scenario);
        std::snprintf(buf, sizeof(buf), ",%.10g,%.3e",
                      res.records.back().psi_l2m, res.mass_dev_max);
        row += buf;
      }
    } catch (const std::exception& e) {
      std::string msg = e.what();
      for (auto& ch : msg)
        if (ch == ',' || ch == '\n') ch = ';';
      row = ",,failed: " + msg;
      if (do_run) row += ",,";
    }
    (*os) << prefix << row << "\n";

    for (std::size_t a = 0;; ++a) {
      if (a == axes.size()) {
        done = true;
        break;
      }
      if (++idx[a] < axes[a].values.size()) break;
      idx[a] = 0;
    }
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"2D FENE micro-macro solver"};
  app.require_subcommand(1);

  std::string config_path, out_path, csv_path, column = "psi_l2m";
  bool echo = false, do_run = false;
  double skip = 0.2, floor = 1e-12;
  std::vector<std::string> axes;

  auto* run = app.add_subcommand("run", "integrate a scenario from a config file");
  run->add_option("-c,--config", config_path, "config file")->required();
  run->add_flag("--echo", echo, "print the fully-resolved config before running");

  auto* chk = app.add_subcommand("check-params", "derived constants and condition margin");
  chk->add_option("-c,--config", config_path, "config file")->required();

  auto* dmp = app.add_subcommand("dump-basis", "Stokes eigenbasis summary as CSV");
  dmp->add_option("-c,--config", config_path, "config file")->required();
  dmp->add_option("-o,--out", out_path, "output CSV (default stdout)");

  auto* fit = app.add_subcommand("fit-decay", "exponential-rate fit of a diagnostics column");
  fit->add_option("--csv", csv_path, "diagnostics CSV from a run")->required();
  fit->add_option("--column", column, "psi_l2m|u_l2|psi_hdot");
  fit->add_option("--skip", skip, "leading fraction of samples to drop");
  fit->add_option("--floor", floor, "noise floor for the fitted norm");

  auto* swp = app.add_subcommand("sweep", "Cartesian parameter sweep");
  swp->add_option("-c,--config", config_path, "base config file")->required();
  swp->add_option("--axis", axes, "key=v1,v2,... or key=start:stop:count")->required();
  swp->add_flag("--run", do_run, "also integrate the scenario at each point");
  swp->add_option("-o,--out", out_path, "output CSV (default stdout)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) return cmd_run(config_path, echo);
    if (*chk) return cmd_check_params(config_path);
    if (*dmp) return cmd_dump_basis(config_path, out_path);
    if (*fit) return cmd_fit_decay(csv_path, column, skip, floor);
    if (*swp) return cmd_sweep(config_path, axes, do_run, out_path);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
