#include "glmeissner/io.hpp"

#include <charconv>
#include <cmath>
#include <filesystem>

#include "glmeissner/error.hpp"

namespace glmeissner {

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

nlohmann::ordered_json json_number(double v) {
  if (!std::isfinite(v)) return nullptr;
  return v;
}

void ensure_directory(const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::kIoError, "cannot create directory " + dir + ": " + ec.message());
}

void write_json(const std::string& path, const nlohmann::ordered_json& j) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::kIoError, "cannot write " + path);
  out << j.dump(2) << '\n';
  if (!out) throw Error(ErrorCode::kIoError, "write failed: " + path);
}

CsvWriter::CsvWriter(const std::string& path, const std::vector<std::string>& header)
    : out_(path), path_(path), columns_(header.size()) {
  if (!out_) throw Error(ErrorCode::kIoError, "cannot write " + path);
  for (const std::string& h : header) *this << h;
  end_row();
}

void CsvWriter::sep() {
  if (column_++ > 0) out_ << ',';
}

CsvWriter& CsvWriter::operator<<(double v) {
  sep();
  out_ << format_number(v);
  return *this;
}

CsvWriter& CsvWriter::operator<<(long long v) {
  sep();
  out_ << v;
  return *this;
}

CsvWriter& CsvWriter::operator<<(const std::string& s) {
  sep();
  out_ << s;
  return *this;
}

void CsvWriter::end_row() {
  if (column_ != columns_) throw Error(ErrorCode::kIoError, path_ + ": row width mismatch");
  out_ << '\n';
  column_ = 0;
  if (!out_) throw Error(ErrorCode::kIoError, "write failed: " + path_);
}

nlohmann::ordered_json energy_json(const EnergyReport& r) {
  nlohmann::ordered_json j;
  j["kinetic"] = json_number(r.kinetic);
  j["potential"] = json_number(r.potential);
  j["field_inside"] = json_number(r.field_inside);
  j["field_outside"] = json_number(r.field_outside);
  j["free_energy"] = json_number(r.free_energy);
  j["meissner_term"] = json_number(r.meissner_term);
  j["vorticity_term"] = json_number(r.vorticity_term);
  j["R0"] = json_number(r.R0);
  j["total"] = json_number(r.total);
  return j;
}

void write_vtk_grid(const std::string& path, const Grid& g, const std::vector<NodeScalar>& scalars,
                    const std::vector<NodeVector>& vectors) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::kIoError, "cannot write " + path);
  out << "# vtk DataFile Version 3.0\nglmeissner\nASCII\nDATASET STRUCTURED_POINTS\n";
  out << "DIMENSIONS " << g.n[0] << ' ' << g.n[1] << ' ' << g.n[2] << '\n';
  out << "ORIGIN " << format_number(g.origin[0]) << ' ' << format_number(g.origin[1]) << ' '
      << format_number(g.origin[2]) << '\n';
  out << "SPACING " << format_number(g.h) << ' ' << format_number(g.h) << ' ' << format_number(g.h) << '\n';
  out << "POINT_DATA " << g.size() << '\n';
  char buf[32];
  auto put = [&](double v) {
    const float f = std::isfinite(v) ? float(v) : 0.0f;
    const auto r = std::to_chars(buf, buf + sizeof buf, f);
    out.write(buf, r.ptr - buf);
  };
  for (const NodeScalar& s : scalars) {
    out << "SCALARS " << s.name << " float 1\nLOOKUP_TABLE default\n";
    for (double v : s.values) {
      put(v);
      out << '\n';
    }
  }
  for (const NodeVector& v : vectors) {
    out << "VECTORS " << v.name << " float\n";
    for (Index i = 0; i < g.size(); ++i) {
      put(v.field->c[0][i]);
      out << ' ';
      put(v.field->c[1][i]);
      out << ' ';
      put(v.field->c[2][i]);
      out << '\n';
    }
  }
  if (!out) throw Error(ErrorCode::kIoError, "write failed: " + path);
}

void write_vtk_curves(const std::string& path, const std::vector<CurveCurrent>& curves) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::kIoError, "cannot write " + path);
  size_t points = 0, entries = 0;
  for (const CurveCurrent& c : curves) {
    points += c.vertices.size();
    entries += c.vertices.size() + (c.closed ? 2 : 1);
  }
  out << "# vtk DataFile Version 3.0\nglmeissner curves\nASCII\nDATASET POLYDATA\n";
  out << "POINTS " << points << " double\n";
  for (const CurveCurrent& c : curves)
    for (const Vec3& v : c.vertices)
      out << format_number(v[0]) << ' ' << format_number(v[1]) << ' ' << format_number(v[2]) << '\n';
  out << "LINES " << curves.size() << ' ' << entries << '\n';
  size_t base = 0;
  for (const CurveCurrent& c : curves) {
    out << c.vertices.size() + (c.closed ? 1 : 0);
    for (size_t k = 0; k < c.vertices.size(); ++k) out << ' ' << base + k;
    if (c.closed) out << ' ' << base;
    out << '\n';
    base += c.vertices.size();
  }
  if (!out) throw Error(ErrorCode::kIoError, "write failed: " + path);
}

void write_vortex_faces_csv(const std::string& path, const VorticityField& v) {
  const Grid& g = v.mesh->grid();
  CsvWriter csv(path, {"x", "y", "z", "orientation", "turns"});
  static const char* axes[3] = {"x", "y", "z"};
  for (int d = 0; d < 3; ++d)
    for (Index i = 0; i < g.size(); ++i) {
      if (!v.valid[d][i] || std::abs(v.winding[d][i]) <= M_PI) continue;
      const Vec3 p = slot_position(g, Storage::kFace, d, i);
      csv << p[0] << p[1] << p[2] << axes[d] << std::round(v.winding[d][i] / (2 * M_PI));
      csv.end_row();
    }
}

void write_curve_csv(const std::string& path, const CurveCurrent& c) {
  CsvWriter csv(path, {"index", "x", "y", "z"});
  for (size_t k = 0; k < c.vertices.size(); ++k) {
    csv << static_cast<long long>(k) << c.vertices[k][0] << c.vertices[k][1] << c.vertices[k][2];
    csv.end_row();
  }
}

}  // namespace glmeissner
