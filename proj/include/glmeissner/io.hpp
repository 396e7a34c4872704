#pragma once

#include <fstream>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "glmeissner/curve.hpp"
#include "glmeissner/fields.hpp"
#include "glmeissner/glcore.hpp"

namespace glmeissner {

// Shortest round-trip decimal form; "nan" / "inf" for non-finite values.
std::string format_number(double v);

// JSON of a double: null when non-finite.
nlohmann::ordered_json json_number(double v);

void ensure_directory(const std::string& dir);
void write_json(const std::string& path, const nlohmann::ordered_json& j);

class CsvWriter {
 public:
  CsvWriter(const std::string& path, const std::vector<std::string>& header);
  CsvWriter& operator<<(double v);
  CsvWriter& operator<<(long long v);
  CsvWriter& operator<<(int v) { return *this << static_cast<long long>(v); }
  CsvWriter& operator<<(const std::string& s);
  CsvWriter& operator<<(const char* s) { return *this << std::string(s); }
  void end_row();

 private:
  void sep();
  std::ofstream out_;
  std::string path_;
  size_t columns_ = 0, column_ = 0;
};

nlohmann::ordered_json energy_json(const EnergyReport& r);

// Legacy VTK structured-points file with node data of the mesh grid.
struct NodeScalar {
  std::string name;
  std::vector<double> values;
};
struct NodeVector {
  std::string name;
  const VectorField* field;  // node-stored
};
void write_vtk_grid(const std::string& path, const Grid& grid, const std::vector<NodeScalar>& scalars,
                    const std::vector<NodeVector>& vectors);
void write_vtk_curves(const std::string& path, const std::vector<CurveCurrent>& curves);

// One row per vortex face: centre, orientation axis, winding / 2 pi.
void write_vortex_faces_csv(const std::string& path, const VorticityField& v);
void write_curve_csv(const std::string& path, const CurveCurrent& c);

}  // namespace glmeissner
