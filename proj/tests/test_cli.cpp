#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "json.hpp"

#include "glmeissner/app.hpp"
#include "glmeissner/config.hpp"
#include "glmeissner/error.hpp"
#include "glmeissner/expression.hpp"

using namespace glmeissner;
namespace fs = std::filesystem;

namespace {

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error thrown";
  return ErrorCode::kIoError;
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("glmeissner_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

struct CliRun {
  int status;
  std::string out, err;
  nlohmann::json summary() const { return nlohmann::json::parse(out); }
};

CliRun run(std::vector<std::string> args) {
  args.insert(args.begin(), "glmeissner");
  std::vector<const char*> argv;
  for (const std::string& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int status = run_cli(int(argv.size()), argv.data(), out, err);
  return {status, out.str(), err.str()};
}

std::string write_config(const fs::path& dir, const std::string& text) {
  const fs::path p = dir / "config.json";
  std::ofstream(p) << text;
  return p.string();
}

std::map<std::string, std::string> read_tree(const fs::path& dir) {
  std::map<std::string, std::string> files;
  for (const auto& e : fs::directory_iterator(dir)) {
    std::ifstream in(e.path(), std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    files[e.path().filename().string()] = ss.str();
  }
  return files;
}

}  // namespace

TEST(Expression, Arithmetic) {
  EXPECT_DOUBLE_EQ(Expression::parse("1 + 2 * 3")(0, 0, 0), 7.0);
  EXPECT_DOUBLE_EQ(Expression::parse("2 ^ 3 ^ 2")(0, 0, 0), 512.0);
  EXPECT_DOUBLE_EQ(Expression::parse("-x^2")(3, 0, 0), -9.0);
  EXPECT_DOUBLE_EQ(Expression::parse("(x - y) / z")(5, 1, 2), 2.0);
  EXPECT_NEAR(Expression::parse("sin(pi / 2) + cosh(0) + sqrt(4) + exp(log(3))")(0, 0, 0), 7.0, 1e-15);
  EXPECT_DOUBLE_EQ(Expression::parse("1.5e1 * abs(-y)")(0, 2, 0), 30.0);
}

TEST(Expression, Errors) {
  for (const char* bad : {"1 +", "sin x", "(x", "x y", "foo(1)", "2 ** 3", ""}) {
    EXPECT_EQ(code_of([&] { Expression::parse(bad); }), ErrorCode::kParseError) << bad;
  }
  try {
    Expression::parse("x + $");
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("column 5"), std::string::npos) << e.what();
  }
}

TEST(Config, MinimalDefaults) {
  const RunConfig c = parse_config(R"j({"domain": {"shape": "ball", "radius": 1}, "spacing": 0.1, "eps": 0.05,
                                       "applied_field": "uniform_z"})j");
  EXPECT_TRUE(std::holds_alternative<Ball>(c.domain));
  EXPECT_EQ(c.spacing, 0.1);
  EXPECT_EQ(c.eps, 0.05);
  EXPECT_TRUE(c.applied.uniform_z);
  EXPECT_EQ(c.seed, 1u);
  EXPECT_EQ(c.minimize.c1, 1e-4);
  EXPECT_EQ(c.minimize.shrink, 0.5);
  const auto j = config_to_json(c);
  for (const char* key : {"domain", "spacing", "pad", "applied_field", "eps", "hex", "hex_list", "tolerances",
                          "london", "minimize", "seed", "output_dir"})
    EXPECT_TRUE(j.contains(key)) << key;
  // The manifest round-trips.
  EXPECT_EQ(config_to_json(parse_config(j.dump())), j);
}

TEST(Config, ValidationErrors) {
  EXPECT_EQ(code_of([] { parse_config(R"j({"hex_list": [3, 2, 1]})j"); }), ErrorCode::kValidationError);
  EXPECT_EQ(code_of([] { parse_config(R"j({"spacing": -1})j"); }), ErrorCode::kValidationError);
  EXPECT_EQ(code_of([] { parse_config(R"j({"eps": 1.5})j"); }), ErrorCode::kValidationError);
  EXPECT_EQ(code_of([] { parse_config(R"j({"domain": {"shape": "ball", "radius": 0}})j"); }),
            ErrorCode::kValidationError);
  EXPECT_EQ(code_of([] { parse_config(R"j({"spacing": 0.1, "colour": 3})j"); }), ErrorCode::kValidationError);
  EXPECT_EQ(code_of([] { parse_config(R"j({"minimize": {"max_iter": 3}})j"); }), ErrorCode::kValidationError);
  EXPECT_EQ(code_of([] { parse_config(R"j({"domain": {"shape": "torus"}})j"); }), ErrorCode::kValidationError);
}

TEST(Config, ParseErrorPosition) {
  try {
    parse_config("{\n  \"spacing\": 0.1,\n  \"eps\": ,\n}");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kParseError);
    EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos) << e.what();
  }
}

TEST(Config, CustomFieldDivergence) {
  EXPECT_EQ(code_of([] { parse_config(R"j({"applied_field": {"x": "x", "y": "0", "z": "0"}})j"); }),
            ErrorCode::kNotDivergenceFree);
  const RunConfig c = parse_config(R"j({"applied_field": {"x": "-y", "y": "x", "z": "1 + sin(x) * cos(y)"}})j");
  EXPECT_FALSE(c.applied.uniform_z);
  EXPECT_TRUE(c.applied.function()(Vec3(1, 2, 0)).isApprox(Vec3(-2, 1, 1 + std::sin(1.0) * std::cos(2.0))));
  EXPECT_EQ(code_of([] { parse_config(R"j({"applied_field": {"x": "y +", "y": "0", "z": "1"}})j"); }),
            ErrorCode::kParseError);
}

TEST(Cli, OracleSubcommand) {
  const fs::path dir = scratch("oracle");
  const std::string cfg =
      write_config(dir, R"j({"domain": {"shape": "ball", "radius": 1}, "spacing": 0.125, "eps": 0.001})j");
  const CliRun r = run({"oracle", "--config", cfg, "--output", (dir / "out").string()});
  ASSERT_EQ(r.status, 0) << r.out << r.err;
  EXPECT_EQ(std::count(r.out.begin(), r.out.end(), '\n'), 1);
  const auto s = r.summary();
  EXPECT_NEAR(s["norm_star"].get<double>(), 0.1505482, 1e-6);
  EXPECT_NEAR(s["hc1_leading"].get<double>(), 22.94, 0.01);
  EXPECT_TRUE(fs::exists(dir / "out" / "manifest.json"));
  EXPECT_TRUE(fs::exists(dir / "out" / "results.json"));
  const auto manifest = nlohmann::json::parse(std::ifstream(dir / "out" / "manifest.json"));
  EXPECT_EQ(manifest["config"]["output_dir"], (dir / "out").string());
  EXPECT_EQ(manifest["config"]["eps"], 0.001);
}

TEST(Cli, UsageErrors) {
  EXPECT_EQ(run({}).status, 2);
  EXPECT_EQ(run({"oracle"}).status, 2);
  EXPECT_EQ(run({"frobnicate", "--config", "x.json"}).status, 2);
  const CliRun missing = run({"oracle", "--config", "/nonexistent/config.json"});
  EXPECT_NE(missing.status, 0);
  EXPECT_NO_THROW(missing.summary());
}

TEST(Cli, ValidationExitCodes) {
  const fs::path dir = scratch("validation");
  const CliRun bad = run({"energy", "--config", write_config(dir, R"j({"hex_list": [2, 1]})j")});
  EXPECT_EQ(bad.status, 2);
  EXPECT_EQ(bad.summary()["error"], "ValidationError");
  const std::string coarse = write_config(
      dir, R"j({"spacing": 0.25, "eps": 0.1, "hex_list": [1, 2], "output_dir": ")j" + (dir / "o").string() + "\"}");
  const CliRun sweep = run({"sweep", "--config", coarse});
  EXPECT_EQ(sweep.status, 2);
  EXPECT_EQ(sweep.summary()["error"], "MeshTooCoarse");
  const CliRun threads = run({"oracle", "--config", coarse, "--threads", "0"});
  EXPECT_EQ(threads.status, 2);
}

TEST(Cli, SolverFailureExitCode) {
  const fs::path dir = scratch("solver");
  const std::string cfg = write_config(dir, R"j({"spacing": 0.125, "pad": 2, "london": {"lattice_max_iters": 2},
      "output_dir": ")j" + (dir / "o").string() + "\"}");
  const CliRun r = run({"london", "--config", cfg});
  EXPECT_EQ(r.status, 3) << r.out;
}

TEST(Cli, EnergyAndMinimizeOutputs) {
  const fs::path dir = scratch("minimize");
  const std::string cfg = write_config(dir, R"j({"spacing": 0.125, "pad": 2, "eps": 0.25, "hex": 2,
      "start": "perturbed", "perturbation": 0.05, "minimize": {"max_iters": 15, "record_history": true},
      "output_dir": ")j" + (dir / "o").string() + "\"}");
  const CliRun e = run({"energy", "--config", cfg});
  ASSERT_EQ(e.status, 0) << e.out;
  const CliRun m = run({"minimize", "--config", cfg});
  ASSERT_EQ(m.status, 0) << m.out;
  for (const char* f : {"manifest.json", "results.json", "trace.csv", "state.vtk", "vortex_faces.csv"})
    EXPECT_TRUE(fs::exists(dir / "o" / f)) << f;
  const auto res = nlohmann::json::parse(std::ifstream(dir / "o" / "results.json"));
  EXPECT_TRUE(res["final"].contains("energy")) << res.dump();
  EXPECT_LT(m.summary()["energy"].get<double>(), e.summary()["total"].get<double>());
}

TEST(Cli, Deterministic) {
  const fs::path dir = scratch("determinism");
  const std::string cfg = write_config(dir, R"j({"spacing": 0.125, "pad": 2, "eps": 0.25, "hex": 3,
      "start": "perturbed", "seed": 7, "minimize": {"max_iters": 10, "method": "lbfgs"},
      "output_dir": ")j" + (dir / "o").string() + "\"}");
  const CliRun a = run({"minimize", "--config", cfg});
  ASSERT_EQ(a.status, 0) << a.out;
  const auto first = read_tree(dir / "o");
  const CliRun b = run({"minimize", "--config", cfg, "--threads", "1"});
  ASSERT_EQ(b.status, 0);
  EXPECT_EQ(a.out, b.out);
  const auto second = read_tree(dir / "o");
  ASSERT_EQ(first.size(), second.size());
  for (const auto& [name, bytes] : first) EXPECT_EQ(bytes, second.at(name)) << name;
}

TEST(Cli, SplitcheckSlope) {
  const fs::path dir = scratch("splitcheck");
  const std::string cfg = write_config(dir, R"j({"spacing": 0.25, "splitcheck": {"spacings": [0.25, 0.125]},
      "output_dir": ")j" + (dir / "o").string() + "\"}");
  const CliRun r = run({"splitcheck", "--config", cfg});
  ASSERT_EQ(r.status, 0) << r.out;
  const auto s = r.summary();
  const auto res = s["residuals"];
  ASSERT_EQ(res.size(), 2u);
  EXPECT_LT(res[1].get<double>(), res[0].get<double>());
  EXPECT_TRUE(fs::exists(dir / "o" / "splitcheck.csv"));
}
