#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <sys/wait.h>

#include "pdae/cli.hpp"

using namespace pdae;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir() {
  static const fs::path dir = [] {
    fs::path d = fs::temp_directory_path() / "pdaekit_cli_tests";
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

std::string write_file(const std::string& name, const std::string& body) {
  const fs::path p = scratch_dir() / name;
  std::ofstream os(p, std::ios::binary);
  os << body;
  return p.string();
}

std::string slurp(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  REQUIRE(static_cast<bool>(is));
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

// In-process invocation; stderr (the error json) is captured, stdout left
// alone because every success path below routes output through --out.
int run_cli(const std::vector<std::string>& args, std::string* err = nullptr) {
  std::vector<const char*> argv;
  argv.reserve(args.size());
  for (const std::string& a : args) argv.push_back(a.c_str());
  std::ostringstream captured;
  std::streambuf* old = std::cerr.rdbuf(captured.rdbuf());
  int code = -1;
  try {
    code = cli::dispatch(static_cast<int>(argv.size()), argv.data());
  } catch (...) {
    std::cerr.rdbuf(old);
    throw;
  }
  std::cerr.rdbuf(old);
  if (err) *err = captured.str();
  return code;
}

int count_lines(const std::string& s) {
  int lines = 0;
  for (char c : s)
    if (c == '\n') ++lines;
  return lines;
}

const char* kScalarAdvectionDiffusion = R"({
  "model": "system",
  "tau": 0.02,
  "M": 8,
  "scheme": "forward",
  "system": {
    "n": 1,
    "A": [1.0],
    "B": [-1.0],
    "D": [0.0],
    "C0": [-2.0],
    "C1": [[0.0]]
  }
})";

}  // namespace

TEST_CASE("scheme and solver names resolve or reject") {
  CHECK(cli::parse_scheme_name("central").component_kind(1) ==
        FirstDiff::Central);
  CHECK(cli::parse_scheme_name("forward").component_kind(1) ==
        FirstDiff::Forward);
  CHECK(cli::parse_scheme_name("backward").component_kind(1) ==
        FirstDiff::Backward);
  const DiffScheme up = cli::parse_scheme_name("upwind");
  CHECK(up.kind == FirstDiff::UpwindBySign);
  CHECK(up.upwind_fallback == FirstDiff::Backward);
  CHECK_THROWS_AS(cli::parse_scheme_name("centered"), ConfigError);

  CHECK(cli::parse_solver_name("full") == SolverKind::Full);
  CHECK(cli::parse_solver_name("split") == SolverKind::Split);
  CHECK_THROWS_AS(cli::parse_solver_name("lu"), ConfigError);
}

TEST_CASE("config parsing enforces the run contract") {
  using nlohmann::json;
  auto parse = [](const json& j) { return cli::parse_config(j, "", "full"); };

  CHECK_THROWS_WITH_AS(parse(json::array()), doctest::Contains("JSON object"),
                       ConfigError);
  CHECK_THROWS_WITH_AS(parse(json{{"model", "fluid"}, {"K0", 0.5}}),
                       doctest::Contains("'plasma' or 'system'"), ConfigError);
  CHECK_THROWS_WITH_AS(parse(json{{"K0", 0.5}, {"tau", 0.1}}),
                       doctest::Contains("exactly one"), ConfigError);
  CHECK_THROWS_WITH_AS(parse(json::object()),
                       doctest::Contains("exactly one"), ConfigError);
  CHECK_THROWS_WITH_AS(parse(json{{"K0", -0.5}}),
                       doctest::Contains("K0 must be positive"), ConfigError);
  CHECK_THROWS_WITH_AS(parse(json{{"tau", 0.0}}),
                       doctest::Contains("tau must be positive"), ConfigError);
  CHECK_THROWS_WITH_AS(parse(json{{"K0", 0.5}, {"t_e", -1.0}}),
                       doctest::Contains("t_e must be positive"), ConfigError);
  CHECK_THROWS_WITH_AS(parse(json{{"K0", 0.5}, {"M", 1}}),
                       doctest::Contains("M must be at least 2"), ConfigError);
  CHECK_THROWS_WITH_AS(parse(json{{"K0", 0.5}, {"M", 12.5}}),
                       doctest::Contains("M must be an integer"), ConfigError);
  CHECK_THROWS_WITH_AS(parse(json{{"model", "system"}, {"tau", 0.1}}),
                       doctest::Contains("needs a system object"), ConfigError);
  CHECK_THROWS_WITH_AS(parse(json{{"K0", 0.5}, {"b0", "small"}}),
                       doctest::Contains("b0 must be a number"), ConfigError);
}

TEST_CASE("overrides land in the resolved setup") {
  using nlohmann::json;
  const json j{{"K0", 0.5}, {"M", 40}, {"b0", 0.05}, {"t_e", 0.25}};

  cli::RunConfig cfg = cli::parse_config(j, "", "full");
  CHECK(cfg.M == 40);
  CHECK(cfg.tau_at(40) == doctest::Approx(0.0125).epsilon(1e-14));
  CHECK(cfg.tau_at(80) == doctest::Approx(0.00625).epsilon(1e-14));
  CHECK(cfg.plasma.b0 == 0.05);
  CHECK(cfg.setup.system.B(0, 0) == -0.05);
  CHECK(cfg.setup.t_e == 0.25);
  // plasma default mixes per-component stencils
  CHECK(cfg.setup.scheme.component_kind(2) == FirstDiff::UpwindBySign);
  CHECK(cfg.setup.solver == SolverKind::Full);

  cli::RunConfig over = cli::parse_config(j, "central", "split");
  CHECK(over.setup.scheme.component_override.empty());
  CHECK(over.setup.scheme.component_kind(3) == FirstDiff::Central);
  CHECK(over.setup.solver == SolverKind::Split);

  // tau mode: tau_at ignores the resolution
  cli::RunConfig fixed =
      cli::parse_config(json{{"tau", 0.01}}, "", "full");
  CHECK(fixed.tau_at(20) == 0.01);
  CHECK(fixed.tau_at(160) == 0.01);
}

TEST_CASE("system descriptions round-trip through json") {
  const PDAESystem sys = build_plasma_system(PlasmaParams{});
  const nlohmann::json j = system_to_json(sys);
  const PDAESystem back = system_from_json(j);
  CHECK(back.n == sys.n);
  CHECK((back.A - sys.A).cwiseAbs().maxCoeff() == 0.0);
  CHECK((back.B - sys.B).cwiseAbs().maxCoeff() == 0.0);
  CHECK((back.D - sys.D).cwiseAbs().maxCoeff() == 0.0);
  CHECK((back.C0 - sys.C0).cwiseAbs().maxCoeff() == 0.0);
  for (int k = 0; k < sys.n; ++k)
    CHECK((back.C1[k] - sys.C1[k]).cwiseAbs().maxCoeff() == 0.0);

  nlohmann::json bad = j;
  bad["C1"].erase(3);
  CHECK_THROWS_WITH_AS(system_from_json(bad), doctest::Contains("n slices"),
                       ConfigError);
  bad = j;
  bad["A"] = {1.0, 2.0};
  CHECK_THROWS_WITH_AS(system_from_json(bad), doctest::Contains("row-major"),
                       ConfigError);
  bad = j;
  bad["D"][0] = "zero";
  CHECK_THROWS_WITH_AS(system_from_json(bad),
                       doctest::Contains("non-numeric"), ConfigError);
  bad = j;
  bad.erase("C0");
  CHECK_THROWS_WITH_AS(system_from_json(bad), doctest::Contains("missing C0"),
                       ConfigError);
}

TEST_CASE("index command emits the certificate with the scalar determinant") {
  const std::string cfg =
      write_file("index_cfg.json", R"({"model":"plasma","K0":0.5,"M":10})");
  const std::string out = (scratch_dir() / "index_out.json").string();

  CHECK(run_cli({"pdaekit", "index", "--config", cfg, "--out", out}) == 0);
  const nlohmann::json j = nlohmann::json::parse(slurp(out));
  CHECK(j["verdict"] == "index-1");
  CHECK(j["order"] == 1);
  CHECK(j["M"][0] == 10);
  CHECK(j["M"][1] == 20);
  CHECK(j["row_plan"] == nlohmann::json({0, 0, 1, 1}));
  CHECK(j["ratio"].get<double>() == doctest::Approx(1.0).epsilon(0.25));
  CHECK(j["lemma2_det"].get<double>() ==
        doctest::Approx(-1.0338934486193287).epsilon(1e-9));
}

TEST_CASE("run command writes the boundary-closed trajectory") {
  const std::string cfg = write_file(
      "run_cfg.json", R"({"model":"plasma","tau":0.025,"M":8,"t_e":0.1})");
  const std::string out = (scratch_dir() / "run_out.csv").string();

  CHECK(run_cli({"pdaekit", "run", "--config", cfg, "--out", out}) == 0);
  const std::string csv = slurp(out);
  CHECK(csv.rfind("t,x,u1,u2,u3,u4\n", 0) == 0);
  // header plus (4 steps + initial state) x (M+1 grid rows)
  CHECK(count_lines(csv) == 1 + 5 * 9);

  // the left boundary row carries the Dirichlet data
  std::istringstream is(csv);
  std::string header, first;
  std::getline(is, header);
  std::getline(is, first);
  CHECK(first.rfind("0,0,0,0,0.2,", 0) == 0);

  // last block starts at t = 0.1
  CHECK(csv.find("\n0.1,0,") != std::string::npos);
}

TEST_CASE("identical invocations produce byte-identical reports") {
  const std::string cfg = write_file(
      "refine_cfg.json", R"({"model":"plasma","K0":0.5,"t_e":0.25})");
  const std::string out1 = (scratch_dir() / "refine_1.csv").string();
  const std::string out2 = (scratch_dir() / "refine_2.csv").string();

  CHECK(run_cli({"pdaekit", "refine", "--config", cfg, "--levels", "4,8",
                 "--out", out1}) == 0);
  CHECK(run_cli({"pdaekit", "refine", "--config", cfg, "--levels", "4,8",
                 "--out", out2}) == 0);
  const std::string a = slurp(out1);
  CHECK(a == slurp(out2));
  CHECK(a.rfind("N,CFL2,e1,e2,order1,order2\n", 0) == 0);
  CHECK(a.find("\n4,") != std::string::npos);
  CHECK(a.find("\n8,") != std::string::npos);
}

TEST_CASE("argument and config failures exit with code 2 and a diagnostic") {
  std::string err;

  SUBCASE("missing config file") {
    CHECK(run_cli({"pdaekit", "index", "--config",
                   (scratch_dir() / "absent.json").string()},
                  &err) == 2);
    const nlohmann::json j = nlohmann::json::parse(err);
    CHECK(j["code"] == 2);
    CHECK(j["error"].get<std::string>().find("cannot open") !=
          std::string::npos);
  }
  SUBCASE("config that is not json") {
    const std::string cfg = write_file("broken.json", "model = plasma");
    CHECK(run_cli({"pdaekit", "index", "--config", cfg}, &err) == 2);
    CHECK(nlohmann::json::parse(err)["error"].get<std::string>().find(
              "not valid JSON") != std::string::npos);
  }
  SUBCASE("config violating the step-size rule") {
    const std::string cfg =
        write_file("overdetermined.json", R"({"K0":0.5,"tau":0.1})");
    CHECK(run_cli({"pdaekit", "index", "--config", cfg}, &err) == 2);
    CHECK(nlohmann::json::parse(err)["error"].get<std::string>().find(
              "exactly one") != std::string::npos);
  }
  SUBCASE("unknown subcommand") {
    CHECK(run_cli({"pdaekit", "solve", "--config", "x.json"}, &err) == 2);
    CHECK(nlohmann::json::parse(err)["code"] == 2);
  }
  SUBCASE("no subcommand") {
    CHECK(run_cli({"pdaekit"}, &err) == 2);
    CHECK(nlohmann::json::parse(err)["code"] == 2);
  }
  SUBCASE("index does not take a scheme") {
    const std::string cfg =
        write_file("plain.json", R"({"model":"plasma","K0":0.5})");
    CHECK(run_cli({"pdaekit", "index", "--config", cfg, "--scheme",
                   "central"},
                  &err) == 2);
    CHECK(nlohmann::json::parse(err)["code"] == 2);
  }
}

TEST_CASE("singular dynamics exit with code 3 and the failing step") {
  const std::string cfg = write_file("degenerate.json", R"({
    "model": "system",
    "tau": 0.5,
    "M": 4,
    "system": {
      "n": 1,
      "A": [0.0], "B": [0.0], "D": [0.0], "C0": [0.0], "C1": [[0.0]]
    }
  })");
  std::string err;
  CHECK(run_cli({"pdaekit", "run", "--config", cfg}, &err) == 3);
  const nlohmann::json j = nlohmann::json::parse(err);
  CHECK(j["code"] == 3);
  CHECK(j["time_index"] == 1);
  CHECK(j["error"].get<std::string>().find("time step 1") !=
        std::string::npos);
}

TEST_CASE("stability command reports the frozen-coefficient bound") {
  const std::string cfg =
      write_file("stability_cfg.json", kScalarAdvectionDiffusion);
  const std::string out = (scratch_dir() / "stability_out.json").string();

  CHECK(run_cli({"pdaekit", "stability", "--config", cfg, "--out", out}) == 0);
  const nlohmann::json j = nlohmann::json::parse(slurp(out));
  CHECK(j["M"] == 8);
  CHECK(j["tau"] == 0.02);
  CHECK(j["pass"] == true);
  CHECK(j["g0_inv_norm"].get<double>() <= 0.02 * (1.0 + 1e-12));
  CHECK(j["g1_norm_bound"].get<double>() == doctest::Approx(16.0));
  CHECK(j["delta0"].get<double>() < 1.0);
  CHECK(std::isfinite(j["solution_bound"].get<double>()));
  CHECK(j["singular_modes"].empty());
}

TEST_CASE("help is not an error") {
  std::ostringstream captured;
  std::streambuf* old = std::cout.rdbuf(captured.rdbuf());
  const int code = run_cli({"pdaekit", "--help"});
  std::cout.rdbuf(old);
  CHECK(code == 0);
  CHECK(captured.str().find("refine") != std::string::npos);
}

#ifdef PDAE_CLI_BIN
TEST_CASE("the installed binary carries dispatch exit codes") {
  const std::string bin = PDAE_CLI_BIN;
  const std::string cfg =
      write_file("bin_cfg.json", R"({"model":"plasma","K0":0.5,"M":6})");
  const std::string out = (scratch_dir() / "bin_out.json").string();

  auto exit_code = [](const std::string& cmd) {
    const int st = std::system(cmd.c_str());
    REQUIRE(st != -1);
    REQUIRE(WIFEXITED(st));
    return WEXITSTATUS(st);
  };

  CHECK(exit_code("\"" + bin + "\" index --config \"" + cfg + "\" --out \"" +
                  out + "\" 2>/dev/null") == 0);
  const nlohmann::json j = nlohmann::json::parse(slurp(out));
  CHECK(j["verdict"] == "index-1");

  CHECK(exit_code("\"" + bin + "\" 2>/dev/null") == 2);
  CHECK(exit_code("\"" + bin + "\" index --config /nonexistent.json"
                  " 2>/dev/null") == 2);
}
#endif
