#include "fene/state_io.hpp"

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace fene {

namespace {

constexpr char kFieldMagic[8] = {'F', 'E', 'N', 'E', 'H', 'F', 'D', '1'};
constexpr char kCkptMagic[8] = {'F', 'E', 'N', 'E', 'C', 'K', 'P', '1'};

struct FieldHeader {
  char magic[8];
  std::int32_t n_r = 0, n_theta = 0, nx = 0, ny = 0;
  double delta = 0, lx = 0, ly = 0;
};

void write_header(std::ofstream& os, const char* magic, const QGrid& q,
                  const FlowGrid& g) {
  FieldHeader h;
  std::memcpy(h.magic, magic, 8);
  h.n_r = q.n_r();
  h.n_theta = q.n_theta();
  h.nx = g.nx;
  h.ny = g.ny;
  h.delta = q.delta();
  h.lx = g.lx;
  h.ly = g.ly;
  os.write(reinterpret_cast<const char*>(&h), sizeof(h));
}

FieldHeader read_header(std::ifstream& is, const char* magic, const std::string& path) {
  FieldHeader h;
  is.read(reinterpret_cast<char*>(&h), sizeof(h));
  if (!is) throw std::runtime_error(path + ": truncated header");
  if (std::memcmp(h.magic, magic, 8) != 0)
    throw std::runtime_error(path + ": bad magic (wrong file type?)");
  return h;
}

void check_qgrid(const FieldHeader& h, const QGrid& q, const std::string& path) {
  if (h.n_r != q.n_r() || h.n_theta != q.n_theta())
    throw std::runtime_error(path + ": q-grid size mismatch (file " +
                             std::to_string(h.n_r) + "x" + std::to_string(h.n_theta) +
                             ", expected " + std::to_string(q.n_r()) + "x" +
                             std::to_string(q.n_theta()) + ")");
  if (std::abs(h.delta - q.delta()) > 1e-12 * std::max(1.0, q.delta()))
    throw std::runtime_error(path + ": delta mismatch");
}

}  // namespace

void save_h_field(const std::string& path, const ConfigField& f, const QGrid& qgrid,
                  const FlowGrid& fgrid) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open for writing: " + path);
  write_header(os, kFieldMagic, qgrid, fgrid);
  os.write(reinterpret_cast<const char*>(f.h.data()),
           (std::streamsize)(sizeof(double) * f.h.size()));
  if (!os) throw std::runtime_error("write failed: " + path);
}

ConfigField load_h_field(const std::string& path, const QGrid& qgrid) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open: " + path);
  FieldHeader h = read_header(is, kFieldMagic, path);
  check_qgrid(h, qgrid, path);
  const int ncells = (h.nx + 1) * (h.ny + 1);
  ConfigField f;
  f.h.resize(qgrid.size(), ncells);
  is.read(reinterpret_cast<char*>(f.h.data()),
          (std::streamsize)(sizeof(double) * f.h.size()));
  if (!is) throw std::runtime_error(path + ": truncated field data");
  return f;
}

void write_velocity_csv(const std::string& path, const FlowGrid& g, const Field2& u) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open for writing: " + path);
  os << "x,y,u,v\n";
  char buf[160];
  for (int i = 0; i <= g.nx; ++i)
    for (int j = 0; j <= g.ny; ++j) {
      const int v = g.idx(i, j);
      std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g,%.17g\n", i * g.hx, j * g.hy,
                    u.u[v], u.v[v]);
      os << buf;
    }
}

void save_checkpoint(const std::string& path, const CoupledState& st,
                     const CoupledSolver& solver) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open for writing: " + path);
  write_header(os, kCkptMagic, solver.qgrid(), solver.fgrid());
  const double t = st.t;
  const std::int64_t nmodes = st.coef.size();
  os.write(reinterpret_cast<const char*>(&t), sizeof(t));
  os.write(reinterpret_cast<const char*>(&nmodes), sizeof(nmodes));
  os.write(reinterpret_cast<const char*>(st.coef.data()),
           (std::streamsize)(sizeof(double) * nmodes));
  os.write(reinterpret_cast<const char*>(st.f.h.data()),
           (std::streamsize)(sizeof(double) * st.f.h.size()));
  if (!os) throw std::runtime_error("write failed: " + path);
}

CoupledState load_checkpoint(const std::string& path, const CoupledSolver& solver) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open: " + path);
  FieldHeader h = read_header(is, kCkptMagic, path);
  check_qgrid(h, solver.qgrid(), path);
  const FlowGrid& g = solver.fgrid();
  if (h.nx != g.nx || h.ny != g.ny)
    throw std::runtime_error(path + ": flow-grid size mismatch");

  CoupledState st;
  std::int64_t nmodes = 0;
  is.read(reinterpret_cast<char*>(&st.t), sizeof(st.t));
  is.read(reinterpret_cast<char*>(&nmodes), sizeof(nmodes));
  if (!is || nmodes < 0) throw std::runtime_error(path + ": truncated checkpoint");
  if (nmodes != solver.basis().n())
    throw std::runtime_error(path + ": basis mode count mismatch");
  st.coef.resize(nmodes);
  is.read(reinterpret_cast<char*>(st.coef.data()),
          (std::streamsize)(sizeof(double) * nmodes));
  st.f.h.resize(solver.qgrid().size(), g.nvert());
  is.read(reinterpret_cast<char*>(st.f.h.data()),
          (std::streamsize)(sizeof(double) * st.f.h.size()));
  if (!is) throw std::runtime_error(path + ": truncated checkpoint");
  st.u_nodal = reconstruct(solver.basis(), st.coef);
  return st;
}

}  // namespace fene
