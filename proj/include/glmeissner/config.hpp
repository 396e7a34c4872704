#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "glmeissner/curve.hpp"
#include "glmeissner/expression.hpp"
#include "glmeissner/london.hpp"
#include "glmeissner/minimize.hpp"

namespace glmeissner {

struct AppliedField {
  bool uniform_z = true;
  std::vector<Expression> components;  // x, y, z when custom

  VectorFunction function() const;
};

struct Tolerances {
  double london = 1e-8;
  double lattice = 1e-11;
  double normstar = 1e-4;
  double hodge = 1e-11;
  double divergence = 1e-6;  // custom applied fields, relative to max |H|
};

struct SplitcheckConfig {
  std::vector<double> spacings;  // empty = spacing, spacing/2, spacing/4
  double pad_length = 0.5;       // exterior margin in length units
  double hex = 5.0;
};

struct RunConfig {
  Shape domain = Ball{1.0};
  double spacing = 0.1;
  int pad = 4;
  AppliedField applied;
  double eps = 0.05;
  double hex = 0.0;
  std::vector<double> hex_list;
  Tolerances tolerances;
  LondonOptions london;
  MinimizeOptions minimize;
  std::string start = "meissner";  // meissner | perturbed | seeded
  double perturbation = 0.1;
  double core_radius = 0.0;        // 0 = max(eps, 2h)
  std::optional<CurveCurrent> curve;
  double curve_spacing = 0.0;
  SplitcheckConfig splitcheck;
  std::uint64_t seed = 1;
  std::string output_dir = "glmeissner_out";
};

// Throws ParseError (with line and column) for malformed JSON, and
// ValidationError / NotDivergenceFree for bad content. Unknown keys are
// rejected at every level.
RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::string& path);

// Full resolved configuration, defaults included.
nlohmann::ordered_json config_to_json(const RunConfig& cfg);

// Largest |div H| over grid points inside the domain at the config spacing,
// by fourth-order central differences, relative to max |H|.
double applied_divergence(const RunConfig& cfg);

}  // namespace glmeissner
