#include "fene/run_config.hpp"

#include <cctype>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <stdexcept>

namespace fene {

namespace {

std::string trim(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  std::size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

[[noreturn]] void fail(int line, const std::string& msg) {
  throw std::invalid_argument("config line " + std::to_string(line) + ": " + msg);
}

double parse_double(const std::string& key, const std::string& v, int line) {
  try {
    std::size_t pos = 0;
    double x = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument("");
    return x;
  } catch (...) {
    fail(line, "key '" + key + "': expected a number, got '" + v + "'");
  }
}

int parse_int(const std::string& key, const std::string& v, int line) {
  try {
    std::size_t pos = 0;
    long x = std::stol(v, &pos);
    if (pos != v.size()) throw std::invalid_argument("");
    return (int)x;
  } catch (...) {
    fail(line, "key '" + key + "': expected an integer, got '" + v + "'");
  }
}

bool parse_bool(const std::string& key, const std::string& v, int line) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  fail(line, "key '" + key + "': expected true/false, got '" + v + "'");
}

using Handler = std::function<void(RunConfig&, const std::string& key,
                                   const std::string& value, int line)>;

const std::map<std::string, Handler>& handlers() {
  static const std::map<std::string, Handler> h = [] {
    std::map<std::string, Handler> m;
    m["physical.gamma"] = [](RunConfig& c, const std::string& k, const std::string& v,
                             int l) { c.phys.gamma = parse_double(k, v, l); };
    m["physical.reynolds"] = [](RunConfig& c, const std::string& k, const std::string& v,
                                int l) { c.phys.reynolds = parse_double(k, v, l); };
    m["physical.weissenberg"] = [](RunConfig& c, const std::string& k,
                                   const std::string& v, int l) {
      c.phys.weissenberg = parse_double(k, v, l);
    };
    m["physical.n"] = [](RunConfig& c, const std::string& k, const std::string& v,
                         int l) { c.phys.n_param = parse_double(k, v, l); };
    m["physical.r"] = [](RunConfig& c, const std::string& k, const std::string& v,
                         int l) { c.phys.r_param = parse_double(k, v, l); };

    m["grid.nx"] = [](RunConfig& c, const std::string& k, const std::string& v, int l) {
      c.nx = parse_int(k, v, l);
    };
    m["grid.ny"] = [](RunConfig& c, const std::string& k, const std::string& v, int l) {
      c.ny = parse_int(k, v, l);
    };
    m["grid.lx"] = [](RunConfig& c, const std::string& k, const std::string& v, int l) {
      c.lx = parse_double(k, v, l);
    };
    m["grid.ly"] = [](RunConfig& c, const std::string& k, const std::string& v, int l) {
      c.ly = parse_double(k, v, l);
    };
    m["grid.n_modes"] = [](RunConfig& c, const std::string& k, const std::string& v,
                           int l) { c.n_modes = parse_int(k, v, l); };
    m["grid.q_nr"] = [](RunConfig& c, const std::string& k, const std::string& v,
                        int l) { c.q_nr = parse_int(k, v, l); };
    m["grid.q_ntheta"] = [](RunConfig& c, const std::string& k, const std::string& v,
                            int l) { c.q_ntheta = parse_int(k, v, l); };

    m["scenario.t_end"] = [](RunConfig& c, const std::string& k, const std::string& v,
                             int l) { c.scenario.t_end = parse_double(k, v, l); };
    m["scenario.dt"] = [](RunConfig& c, const std::string& k, const std::string& v,
                          int l) { c.scenario.dt = parse_double(k, v, l); };
    m["scenario.sigma_mode"] = [](RunConfig& c, const std::string& k,
                                  const std::string& v, int l) {
      if (v == "corotational")
        c.scenario.sigma_mode = SigmaMode::Corotational;
      else if (v == "general")
        c.scenario.sigma_mode = SigmaMode::General;
      else
        fail(l, "key '" + k + "': expected corotational|general, got '" + v + "'");
    };
    m["scenario.splitting"] = [](RunConfig& c, const std::string& k,
                                 const std::string& v, int l) {
      if (v == "lie")
        c.scenario.splitting = SplittingMode::Lie;
      else if (v == "strang")
        c.scenario.splitting = SplittingMode::Strang;
      else if (v == "picard")
        c.scenario.splitting = SplittingMode::Picard;
      else
        fail(l, "key '" + k + "': expected lie|strang|picard, got '" + v + "'");
    };
    m["scenario.transport"] = [](RunConfig& c, const std::string& k,
                                 const std::string& v, int l) {
      if (v == "eulerian")
        c.scenario.transport = TransportScheme::Eulerian;
      else if (v == "semi_lagrangian")
        c.scenario.transport = TransportScheme::SemiLagrangian;
      else
        fail(l, "key '" + k + "': expected eulerian|semi_lagrangian, got '" + v + "'");
    };
    m["scenario.picard_kmax"] = [](RunConfig& c, const std::string& k,
                                   const std::string& v, int l) {
      c.scenario.picard_kmax = parse_int(k, v, l);
    };
    m["scenario.picard_tol"] = [](RunConfig& c, const std::string& k,
                                  const std::string& v, int l) {
      c.scenario.picard_tol = parse_double(k, v, l);
    };
    m["scenario.sample_every"] = [](RunConfig& c, const std::string& k,
                                    const std::string& v, int l) {
      c.scenario.sample_every = parse_int(k, v, l);
    };
    m["scenario.clipping"] = [](RunConfig& c, const std::string& k,
                                const std::string& v, int l) {
      c.scenario.clipping = parse_bool(k, v, l);
    };
    m["scenario.u0_mode"] = [](RunConfig& c, const std::string& k, const std::string& v,
                               int l) { c.scenario.u0_mode = parse_int(k, v, l); };
    m["scenario.u0_amplitude"] = [](RunConfig& c, const std::string& k,
                                    const std::string& v, int l) {
      c.scenario.u0_amplitude = parse_double(k, v, l);
    };
    m["scenario.cfl"] = [](RunConfig& c, const std::string& k, const std::string& v,
                           int l) { c.scenario.cfl = parse_double(k, v, l); };
    m["scenario.init_kind"] = [](RunConfig& c, const std::string& k,
                                 const std::string& v, int l) {
      if (v == "equilibrium")
        c.scenario.init.kind = InitSpec::Kind::Equilibrium;
      else if (v == "perturbed")
        c.scenario.init.kind = InitSpec::Kind::Perturbed;
      else if (v == "file")
        c.scenario.init.kind = InitSpec::Kind::File;
      else
        fail(l, "key '" + k + "': expected equilibrium|perturbed|file, got '" + v + "'");
    };
    m["scenario.epsilon"] = [](RunConfig& c, const std::string& k, const std::string& v,
                               int l) { c.scenario.init.epsilon = parse_double(k, v, l); };
    m["scenario.pattern"] = [](RunConfig& c, const std::string&, const std::string& v,
                               int) { c.scenario.init.pattern = v; };
    m["scenario.envelope"] = [](RunConfig& c, const std::string&, const std::string& v,
                                int) { c.scenario.init.envelope = v; };
    m["scenario.init_file"] = [](RunConfig& c, const std::string&, const std::string& v,
                                 int) { c.scenario.init.file_path = v; };
    m["scenario.smooth_passes"] = [](RunConfig& c, const std::string& k,
                                     const std::string& v, int l) {
      c.scenario.init.smooth_passes = parse_int(k, v, l);
    };

    m["output.dir"] = [](RunConfig& c, const std::string&, const std::string& v, int) {
      c.out_dir = v;
    };
    m["output.basis_cache_dir"] = [](RunConfig& c, const std::string&,
                                     const std::string& v, int) {
      c.basis_cache_dir = v;
    };
    m["output.dump_every"] = [](RunConfig& c, const std::string& k, const std::string& v,
                                int l) { c.dump_every = parse_int(k, v, l); };
    m["output.write_velocity"] = [](RunConfig& c, const std::string& k,
                                    const std::string& v, int l) {
      c.write_velocity = parse_bool(k, v, l);
    };
    m["output.checkpoint_out"] = [](RunConfig& c, const std::string&,
                                    const std::string& v, int) { c.checkpoint_out = v; };
    m["output.checkpoint_in"] = [](RunConfig& c, const std::string&,
                                   const std::string& v, int) { c.checkpoint_in = v; };

    m["tolerances.c_product"] = [](RunConfig& c, const std::string& k,
                                   const std::string& v, int l) {
      c.c_product = parse_double(k, v, l);
    };
    return m;
  }();
  return h;
}

void validate_config(const RunConfig& c) {
  c.phys.validate();  // throws with the offending field name
  auto positive = [](double x, const char* key) {
    if (!(x > 0)) throw std::invalid_argument(std::string("config: ") + key +
                                              " must be positive");
  };
  if (c.nx < 4 || c.ny < 4)
    throw std::invalid_argument("config: grid.nx and grid.ny must be >= 4");
  positive(c.lx, "grid.lx");
  positive(c.ly, "grid.ly");
  if (c.n_modes < 1) throw std::invalid_argument("config: grid.n_modes must be >= 1");
  if (c.q_nr < 4 || c.q_ntheta < 8)
    throw std::invalid_argument("config: q-grid too small (q_nr >= 4, q_ntheta >= 8)");
  positive(c.scenario.t_end, "scenario.t_end");
  positive(c.scenario.dt, "scenario.dt");
  positive(c.scenario.cfl, "scenario.cfl");
  if (c.scenario.sample_every < 1)
    throw std::invalid_argument("config: scenario.sample_every must be >= 1");
  if (c.scenario.init.kind == InitSpec::Kind::File && c.scenario.init.file_path.empty())
    throw std::invalid_argument("config: scenario.init_file required for init_kind=file");
}

}  // namespace

RunConfig parse_config_text(const std::string& text) {
  RunConfig cfg;
  std::istringstream is(text);
  std::string line, section;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') fail(lineno, "malformed section header '" + line + "'");
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos) fail(lineno, "expected 'key = value', got '" + line + "'");
    std::string key = trim(line.substr(0, eq));
    std::string val = trim(line.substr(eq + 1));
    if (key.empty()) fail(lineno, "empty key");
    const std::string full = section.empty() ? key : section + "." + key;
    auto it = handlers().find(full);
    if (it == handlers().end()) fail(lineno, "unknown key '" + full + "'");
    it->second(cfg, full, val, lineno);
  }
  validate_config(cfg);
  return cfg;
}

RunConfig parse_config_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open config: " + path);
  std::stringstream ss;
  ss << is.rdbuf();
  return parse_config_text(ss.str());
}

void set_config_key(RunConfig& cfg, const std::string& key, const std::string& value) {
  auto it = handlers().find(key);
  if (it == handlers().end())
    throw std::invalid_argument("unknown config key '" + key + "'");
  it->second(cfg, key, value, 0);
}

std::string render_config(const RunConfig& c) {
  std::ostringstream os;
  char buf[64];
  auto num = [&](double x) {
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return std::string(buf);
  };
  os << "[physical]\n";
  os << "gamma = " << num(c.phys.gamma) << "\n";
  os << "reynolds = " << num(c.phys.reynolds) << "\n";
  os << "weissenberg = " << num(c.phys.weissenberg) << "\n";
  os << "n = " << num(c.phys.n_param) << "\n";
  os << "r = " << num(c.phys.r_param) << "\n";
  os << "[grid]\n";
  os << "nx = " << c.nx << "\nny = " << c.ny << "\n";
  os << "lx = " << num(c.lx) << "\nly = " << num(c.ly) << "\n";
  os << "n_modes = " << c.n_modes << "\n";
  os << "q_nr = " << c.q_nr << "\nq_ntheta = " << c.q_ntheta << "\n";
  os << "[scenario]\n";
  os << "t_end = " << num(c.scenario.t_end) << "\ndt = " << num(c.scenario.dt) << "\n";
  os << "sigma_mode = "
     << (c.scenario.sigma_mode == SigmaMode::Corotational ? "corotational" : "general")
     << "\n";
  os << "splitting = "
     << (c.scenario.splitting == SplittingMode::Lie
             ? "lie"
             : c.scenario.splitting == SplittingMode::Strang ? "strang" : "picard")
     << "\n";
  os << "transport = "
     << (c.scenario.transport == TransportScheme::Eulerian ? "eulerian"
                                                           : "semi_lagrangian")
     << "\n";
  os << "picard_kmax = " << c.scenario.picard_kmax << "\n";
  os << "picard_tol = " << num(c.scenario.picard_tol) << "\n";
  os << "sample_every = " << c.scenario.sample_every << "\n";
  os << "clipping = " << (c.scenario.clipping ? "true" : "false") << "\n";
  os << "u0_mode = " << c.scenario.u0_mode << "\n";
  os << "u0_amplitude = " << num(c.scenario.u0_amplitude) << "\n";
  os << "cfl = " << num(c.scenario.cfl) << "\n";
  os << "init_kind = "
     << (c.scenario.init.kind == InitSpec::Kind::Equilibrium
             ? "equilibrium"
             : c.scenario.init.kind == InitSpec::Kind::Perturbed ? "perturbed" : "file")
     << "\n";
  os << "epsilon = " << num(c.scenario.init.epsilon) << "\n";
  os << "pattern = " << c.scenario.init.pattern << "\n";
  os << "envelope = " << c.scenario.init.envelope << "\n";
  if (!c.scenario.init.file_path.empty())
    os << "init_file = " << c.scenario.init.file_path << "\n";
  os << "smooth_passes = " << c.scenario.init.smooth_passes << "\n";
  os << "[output]\n";
  os << "dir = " << c.out_dir << "\n";
  if (!c.basis_cache_dir.empty()) os << "basis_cache_dir = " << c.basis_cache_dir << "\n";
  os << "dump_every = " << c.dump_every << "\n";
  os << "write_velocity = " << (c.write_velocity ? "true" : "false") << "\n";
  if (!c.checkpoint_out.empty()) os << "checkpoint_out = " << c.checkpoint_out << "\n";
  if (!c.checkpoint_in.empty()) os << "checkpoint_in = " << c.checkpoint_in << "\n";
  os << "[tolerances]\n";
  os << "c_product = " << num(c.c_product) << "\n";
  return os.str();
}

}  // namespace fene
