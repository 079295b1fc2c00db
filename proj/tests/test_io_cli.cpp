#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "caustic/cli.hpp"
#include "caustic/io.hpp"
#include "caustic/presets.hpp"

using namespace caustic;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() / ("caustic_test_" + std::to_string(::testing::UnitTest::GetInstance()->random_seed()) +
                                        "_" + ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string operator/(const std::string& name) const { return (path / name).string(); }
};

std::string slurp(const std::string& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct Run {
  int code;
  std::string out, err;
};

Run invoke(std::vector<std::string> args) {
  args.insert(args.begin(), "caustic-forge");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string error_of(const json& j) {
  try {
    boundary_from_json(j);
  } catch (const InputError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST(BoundaryFile, RoundTripIsByteStable) {
  TempDir dir;
  const auto c = presets::perturbed_circle();
  save_boundary(dir / "a.json", c, json{{"name", "perturbed"}});
  const auto back = load_boundary(dir / "a.json");
  save_boundary(dir / "b.json", back.curve, back.meta);
  EXPECT_EQ(slurp(dir / "a.json"), slurp(dir / "b.json"));
  EXPECT_EQ(back.meta["name"], "perturbed");
  ASSERT_EQ(back.curve.modes(), c.modes());
  for (std::size_t k = 0; k <= c.modes(); ++k) {
    EXPECT_EQ(back.curve.coeff_x()[k], c.coeff_x()[k]);
    EXPECT_EQ(back.curve.coeff_y()[k], c.coeff_y()[k]);
  }
  EXPECT_EQ(back.curve.param_kind(), c.param_kind());
}

TEST(BoundaryFile, TwoSidedLayout) {
  const auto j = boundary_to_json(presets::ellipse(2.0, 1.0));
  EXPECT_EQ(j["k_min"], -1);
  ASSERT_EQ(j["coeff_x"].size(), 3u);
  EXPECT_EQ(j["coeff_x"][0], json::array({1.0, -0.0}));
  EXPECT_EQ(j["coeff_x"][2], json::array({1.0, 0.0}));
  EXPECT_EQ(j["param_kind"], "general");
}

TEST(BoundaryFile, RejectsMalformedInputNamingTheField) {
  const auto good = boundary_to_json(presets::ellipse(2.0, 1.0));
  auto j = good;
  j.erase("coeff_y");
  EXPECT_NE(error_of(j).find("coeff_y"), std::string::npos);

  j = good;
  j["coeff_x"][1][0] = "zero";
  EXPECT_NE(error_of(j).find("coeff_x[1][0]"), std::string::npos);

  j = good;
  j["coeff_x"][2] = json::array({1.0, 0.5});
  EXPECT_NE(error_of(j).find("conjugate"), std::string::npos);

  j = good;
  j["k_min"] = -2;
  EXPECT_NE(error_of(j).find("coeff_x"), std::string::npos);

  j = good;
  j["param_kind"] = "polar";
  EXPECT_NE(error_of(j).find("param_kind"), std::string::npos);
}

TEST(BoundaryFile, RejectsUnreadableFiles) {
  TempDir dir;
  EXPECT_THROW(load_boundary(dir / "missing.json"), InputError);
  std::ofstream(dir / "bad.json") << "{ \"coeff_x\": [";
  EXPECT_THROW(load_boundary(dir / "bad.json"), InputError);
}

TEST(Output, ManifestPathAndNumbers) {
  EXPECT_EQ(manifest_path("run/out.json"), "run/out.manifest.json");
  EXPECT_EQ(manifest_path("out"), "out.manifest.json");
  EXPECT_EQ(manifest_path("t.csv"), "t.manifest.json");
  EXPECT_EQ(format_number(0.1), "0.1");
  EXPECT_EQ(format_number(std::nan("")), "nan");
  EXPECT_TRUE(finite_or_null(INFINITY).is_null());
}

TEST(Cli, ForgeWritesResultAndManifest) {
  TempDir dir;
  const auto r = invoke({"forge", "--preset", "circle", "--q", "5", "--out", dir / "c.json"});
  ASSERT_EQ(r.code, 0) << r.out << r.err;
  const auto j = read_json_file(dir / "c.json");
  EXPECT_TRUE(j["success"].get<bool>());
  EXPECT_EQ(j["q"], 5);
  EXPECT_TRUE(j["verification"]["accepted"].get<bool>());
  const auto m = read_json_file(dir / "c.manifest.json");
  EXPECT_EQ(m["command"], "forge");
  EXPECT_EQ(m["version"], version_string);
  EXPECT_TRUE(m["success"].get<bool>());

  // The result file verifies on its own.
  EXPECT_EQ(invoke({"verify", dir / "c.json"}).code, 0);
}

TEST(Cli, ForgeFromBoundaryFile) {
  TempDir dir;
  save_boundary(dir / "e.json", presets::ellipse(1.05, 0.95));
  const auto r = invoke({"forge", "--boundary", dir / "e.json", "--q", "4"});
  EXPECT_EQ(r.code, 0) << r.out << r.err;
  EXPECT_NE(r.out.find("q=4"), std::string::npos);
}

TEST(Cli, UsageErrorsExitOne) {
  EXPECT_EQ(invoke({}).code, 1);
  EXPECT_EQ(invoke({"forge", "--preset", "circle"}).code, 1);
  EXPECT_EQ(invoke({"forge", "--preset", "circle", "--q", "2"}).code, 1);
  EXPECT_EQ(invoke({"forge", "--preset", "circle", "--boundary", "x.json", "--q", "5"}).code, 1);
  EXPECT_EQ(invoke({"forge", "--boundary", "/nonexistent/b.json", "--q", "5"}).code, 1);
  EXPECT_EQ(invoke({"forge", "--preset", "square", "--q", "5"}).code, 1);
  EXPECT_EQ(invoke({"sweep", "--preset", "circle", "--q-min", "9", "--q-max", "4"}).code, 1);
  EXPECT_EQ(invoke({"--version"}).code, 0);
}

TEST(Cli, CorruptedResultFailsVerification) {
  TempDir dir;
  ASSERT_EQ(invoke({"forge", "--preset", "perturbed", "--q", "8", "--out", dir / "p.json"}).code, 0);
  auto j = read_json_file(dir / "p.json");
  auto& c = j["forged"]["coeff_x"];
  const std::size_t mid = c.size() / 2;
  c[mid + 3][0] = c[mid + 3][0].get<double>() + 1e-6;
  c[mid - 3][0] = c[mid - 3][0].get<double>() + 1e-6;
  write_text_file(dir / "bad.json", dump(j));
  const auto r = invoke({"verify", dir / "bad.json", "--report", dir / "rep.json"});
  EXPECT_EQ(r.code, 2) << r.out << r.err;
  EXPECT_NE(r.out.find("rejected"), std::string::npos);
  EXPECT_GT(read_json_file(dir / "rep.json")["max_closure_error"].get<double>(), 1e-7);
}

TEST(Cli, NumericalFailureExitsTwo) {
  // A target below round-off: the Newton loop stalls and reports it.
  const auto r = invoke({"forge", "--preset", "perturbed", "--q", "8", "--tol", "1e-15"});
  EXPECT_EQ(r.code, 2) << r.out << r.err;
}

TEST(Cli, SweepTabulatesEveryQ) {
  TempDir dir;
  const auto r = invoke({"sweep", "--preset", "circle", "--q-min", "3", "--q-max", "6", "--samples", "20", "--out",
                      dir / "s.csv"});
  ASSERT_EQ(r.code, 0) << r.out << r.err;
  std::istringstream csv(slurp(dir / "s.csv"));
  std::string line;
  std::getline(csv, line);
  EXPECT_EQ(line, sweep_header());
  int rows = 0;
  while (std::getline(csv, line)) {
    ++rows;
    EXPECT_EQ(line.substr(0, line.find(',')), std::to_string(2 + rows));
    EXPECT_EQ(line.substr(line.rfind(',') + 1), "ok");
  }
  EXPECT_EQ(rows, 4);
  EXPECT_TRUE(fs::exists(dir / "s.manifest.json"));
}
