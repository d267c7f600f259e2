#pragma once

#include <aggfem/fe_space.hpp>
#include <aggfem/mesh.hpp>
#include <aggfem/solver.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <span>
#include <stdexcept>
#include <string>

namespace aggfem {

/// Output file could not be written.
class IoError : public std::runtime_error {
 public:
  IoError(const std::filesystem::path& path, const std::string& what)
      : std::runtime_error(path.string() + ": " + what) {}
};

/// Shortest-safe round-trip formatting: 17 significant digits.
inline std::string format_real(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline constexpr const char* kDiagnosticsHeader = "t,mass,l1,linf,min,fp_iters,lin_residual";

inline std::string diagnostics_row(const DiagnosticsRecord& r) {
  return format_real(r.t) + ',' + format_real(r.mass) + ',' + format_real(r.l1) + ',' +
         format_real(r.linf) + ',' + format_real(r.min) + ',' + std::to_string(r.fp_iters) + ',' +
         format_real(r.lin_residual);
}

/// Streams diagnostics rows as they are produced; every row is flushed.
class DiagnosticsCsvWriter {
 public:
  explicit DiagnosticsCsvWriter(std::filesystem::path path) : path_(std::move(path)), out_(path_) {
    if (!out_) throw IoError(path_, "cannot open for writing");
    out_ << kDiagnosticsHeader << '\n';
    check();
  }

  void write(const DiagnosticsRecord& r) {
    out_ << diagnostics_row(r) << '\n';
    out_.flush();
    check();
  }

  void flush() {
    out_.flush();
    check();
  }

  const std::filesystem::path& path() const { return path_; }

 private:
  void check() {
    if (!out_) throw IoError(path_, "write failed");
  }

  std::filesystem::path path_;
  std::ofstream out_;
};

inline void write_diagnostics_csv(std::span<const DiagnosticsRecord> series,
                                  const std::filesystem::path& path) {
  if (series.empty()) throw std::invalid_argument("write_diagnostics_csv: empty series");
  DiagnosticsCsvWriter w(path);
  for (const auto& r : series) w.write(r);
}

namespace detail {

inline void write_vtk(const Mesh& mesh, const NodalField* field, const std::string& title,
                      const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError(path, "cannot open for writing");
  const int n = mesh.num_nodes();
  const int m = mesh.num_elements();
  out << "# vtk DataFile Version 3.0\n" << title << "\nASCII\nDATASET UNSTRUCTURED_GRID\n";
  out << "POINTS " << n << " double\n";
  for (const Vec2& p : mesh.nodes()) {
    out << format_real(p.x) << ' ' << format_real(p.y) << " 0\n";
  }
  out << "CELLS " << m << ' ' << 4 * m << '\n';
  for (const Triangle& t : mesh.elements()) {
    out << "3 " << t[0] << ' ' << t[1] << ' ' << t[2] << '\n';
  }
  out << "CELL_TYPES " << m << '\n';
  for (int e = 0; e < m; ++e) out << "5\n";
  if (field) {
    out << "POINT_DATA " << n << "\nSCALARS rho double 1\nLOOKUP_TABLE default\n";
    for (int i = 0; i < n; ++i) out << format_real((*field)[i]) << '\n';
  }
  out.flush();
  if (!out) throw IoError(path, "write failed");
}

}  // namespace detail

/// Legacy ASCII VTK unstructured grid with point data "rho".
inline void write_vtk_snapshot(const Mesh& mesh, const NodalField& field,
                               const std::filesystem::path& path, const std::string& title = "rho") {
  if (&field.mesh() != &mesh) throw std::invalid_argument("write_vtk_snapshot: field is bound to another mesh");
  detail::write_vtk(mesh, &field, title, path);
}

/// Geometry only.
inline void write_vtk_mesh(const Mesh& mesh, const std::filesystem::path& path) {
  detail::write_vtk(mesh, nullptr, "mesh", path);
}

}  // namespace aggfem
