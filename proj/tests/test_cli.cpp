#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "json.hpp"
#include "periodic/cli.hpp"
#include "periodic/error.hpp"

using namespace periodic;
using namespace periodic::cli;
using nlohmann::json;

namespace {

struct Outcome {
  int code;
  std::string out;
  std::string err;
};

Outcome invoke(std::vector<std::string> args) {
  args.insert(args.begin(), "periodic");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = main_entry(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

RunConfig parse(std::vector<std::string> args) {
  args.insert(args.begin(), "periodic");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  return parse_args(static_cast<int>(argv.size()), argv.data());
}

std::filesystem::path temp_file(const std::string& name, const std::string& content) {
  const auto path = std::filesystem::temp_directory_path() / ("periodic_cli_" + name);
  std::ofstream(path) << content;
  return path;
}

std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace

TEST_CASE("parsing kernel-eval and minimize") {
  const auto k = parse({"kernel-eval", "--lattice", "Z1", "--potential", "riesz:2", "--x", "0.5", "--y", "0"});
  CHECK(k.command == Command::kernel_eval);
  CHECK(k.lattice == "Z1");
  CHECK(k.potential == "riesz:2");
  CHECK(k.x == std::vector<double>{0.5});
  const auto m = parse({"minimize", "--lattice", "hex", "--potential", "log", "--N", "12", "--seed", "7"});
  CHECK(m.command == Command::minimize);
  CHECK(m.n == 12);
  CHECK(m.seed == 7);
  const auto spaced = parse({"kernel", "eval", "--x", "0.3,0.1", "--y", "0", "--lattice", "Z2"});
  CHECK(spaced.command == Command::kernel_eval);
  CHECK(spaced.x.size() == 2);
}

TEST_CASE("usage errors name the flag") {
  for (const auto& args : std::vector<std::vector<std::string>>{
           {"kernel-eval", "--potential", "riesz:-1", "--x", "0", "--y", "0"},
           {"kernel-eval", "--x", "abc", "--y", "0"},
           {"kernel-eval", "--y", "0"},
           {"minimize", "--N", "1"},
           {"growth", "--N", "8,4"},
           {"kernel-eval", "--tol", "-1", "--x", "0", "--y", "0"},
           {"validate", "--suite", "everything"},
           {"specfun-eval", "--function", "gamma", "--args", "1,2"},
           {"nonsense"},
           {}}) {
    const auto r = invoke(args);
    CHECK(r.code == 2);
    CHECK_FALSE(r.err.empty());
  }
  const auto r = invoke({"kernel-eval", "--potential", "riesz:-1", "--x", "0", "--y", "0"});
  CHECK(r.err.find("--potential") != std::string::npos);
}

TEST_CASE("kernel evaluation output") {
  const auto r = invoke({"kernel-eval", "--lattice", "Z1", "--potential", "riesz:2", "--x", "0.5", "--y", "0"});
  REQUIRE(r.code == 0);
  const auto j = json::parse(r.out);
  CHECK(std::abs(j.at("value").get<double>() - (M_PI * M_PI - 2.0 * std::sqrt(M_PI))) < 1e-12);
  for (const char* key : {"abs_err_bound", "terms_direct", "terms_dual", "plan", "version"}) CHECK(j.contains(key));
  const auto inf = invoke({"kernel-eval", "--x", "1", "--y", "0"});
  CHECK(json::parse(inf.out).at("value") == "inf");
  const auto csv = invoke({"kernel", "eval", "--lattice", "Z2", "--potential", "riesz:0.75", "--x", "0.3,0.1", "--y",
                           "0", "--tol", "1e-10", "--eta", "1", "--format", "csv", "--gradient"});
  CHECK(csv.code == 0);
  CHECK(csv.out.rfind("value,abs_err_bound,terms_direct,terms_dual,grad_0,grad_1\n", 0) == 0);
}

TEST_CASE("energy and minimize commands") {
  const auto pts = temp_file("pts.json", R"({"points": [[0.0], [0.5]]})");
  const auto e = invoke({"energy", "--potential", "riesz:2", "--points", pts.string()});
  REQUIRE(e.code == 0);
  CHECK(std::abs(json::parse(e.out).at("energy").get<double>() - (2 * M_PI * M_PI - 4 * std::sqrt(M_PI))) < 1e-12);
  const auto flat = temp_file("flat.json", "[0.1, 0.6]");
  CHECK(invoke({"energy", "--points", flat.string()}).code == 0);
  const auto cart = temp_file("cart.json", R"({"points": [[0.0, 0.0], [0.5, 0.5]]})");
  CHECK(invoke({"energy", "--lattice", "hex", "--cartesian", "--points", cart.string()}).code == 0);
  const auto bad = temp_file("bad.json", R"({"points": [[0.0, 0.1, 0.2]]})");
  CHECK(invoke({"energy", "--lattice", "Z2", "--points", bad.string()}).code == 2);
  CHECK(invoke({"energy", "--points", "/nonexistent/points.json"}).code == 2);

  const auto m = invoke({"minimize", "--lattice", "Z1", "--potential", "riesz:1", "--N", "4", "--restarts", "2"});
  REQUIRE(m.code == 0);
  const auto j = json::parse(m.out);
  CHECK(j.at("restarts").size() == 2);
  CHECK(j.contains("plan"));
  CHECK(j.at("version") == "1.0.0");
}

TEST_CASE("missing lattice file is an input error") {
  CHECK(invoke({"kernel-eval", "--lattice", "/nonexistent/basis.json", "--x", "0", "--y", "0"}).code == 2);
  const auto basis = temp_file("basis.json", R"({"basis": [[2.0, 0.0], [0.0, 0.5]]})");
  CHECK(invoke({"kernel-eval", "--lattice", basis.string(), "--x", "0.1", "--y", "0"}).code == 0);
}

TEST_CASE("growth table is CSV with normalized columns") {
  const auto r = invoke({"growth", "--lattice", "Z1", "--potential", "riesz:0.5", "--N", "4,8", "--restarts", "1"});
  REQUIRE(r.code == 0);
  std::istringstream lines(r.out);
  std::string header, row;
  std::getline(lines, header);
  CHECK(header == "N,E,E_per_N2,E_per_N1_plus_s_over_d,E_per_N2_logN");
  int rows = 0;
  while (std::getline(lines, row)) ++rows;
  CHECK(rows == 2);
}

TEST_CASE("validate exit codes and JSON report") {
  const auto out = std::filesystem::temp_directory_path() / "periodic_cli_validate.json";
  const auto r = invoke({"validate", "--suite", "1d", "--json", out.string()});
  CHECK(r.code == 0);
  const auto j = json::parse(read_file(out));
  CHECK(j.at("passed") == true);
  CHECK(j.at("results").size() > 10);
}

TEST_CASE("special functions") {
  const auto r = invoke({"specfun", "eval", "--function", "hurwitz_zeta", "--args", "2,1"});
  REQUIRE(r.code == 0);
  CHECK(std::abs(json::parse(r.out).at("value").get<double>() - M_PI * M_PI / 6.0) < 1e-14);
  CHECK(invoke({"specfun-eval", "--function", "euler_gamma"}).code == 0);
  CHECK(invoke({"specfun-eval", "--function", "gamma_upper", "--args", "0,0"}).code == 1);
}

TEST_CASE("configuration file, environment and flags") {
  const auto cfg = temp_file("cfg.json", R"({"lattice": "Z2", "potential": "log", "tol": 1e-9, "x": [0.1, 0.2], "y": 0})");
  auto c = parse({"kernel-eval", "--config", cfg.string()});
  CHECK(c.lattice == "Z2");
  CHECK(c.potential == "log");
  CHECK(c.tol == 1e-9);
  CHECK(c.x == std::vector<double>{0.1, 0.2});
  setenv("PERIODIC_TOL", "1e-8", 1);
  setenv("PERIODIC_THREADS", "3", 1);
  c = parse({"kernel-eval", "--config", cfg.string()});
  CHECK(c.tol == 1e-8);
  CHECK(c.threads == 3);
  c = parse({"kernel-eval", "--config", cfg.string(), "--tol", "1e-11"});
  CHECK(c.tol == 1e-11);
  unsetenv("PERIODIC_TOL");
  unsetenv("PERIODIC_THREADS");
  const auto bad = temp_file("cfg_bad.json", R"({"colour": "red"})");
  CHECK(invoke({"kernel-eval", "--config", bad.string(), "--x", "0", "--y", "0"}).code == 2);
}

TEST_CASE("identical runs write identical files") {
  const auto a = std::filesystem::temp_directory_path() / "periodic_cli_a.json";
  const auto b = std::filesystem::temp_directory_path() / "periodic_cli_b.json";
  for (const auto& path : {a, b}) {
    CHECK(invoke({"minimize", "--lattice", "hex", "--N", "5", "--seed", "42", "--restarts", "3", "--threads", "2",
                  "--out", path.string()})
              .code == 0);
  }
  CHECK(read_file(a) == read_file(b));
}

TEST_CASE("help lists the commands and flags") {
  const auto top = invoke({"--help"});
  CHECK(top.code == 0);
  for (const char* word : {"kernel-eval", "energy", "minimize", "growth", "validate", "specfun-eval"}) {
    CHECK(top.out.find(word) != std::string::npos);
  }
  const auto sub = invoke({"minimize", "--help"});
  CHECK(sub.code == 0);
  for (const char* flag : {"--N", "--restarts", "--seed", "--tol", "--eta", "--out", "--format", "--threads", "--config"}) {
    CHECK(sub.out.find(flag) != std::string::npos);
  }
  CHECK(to_string(Command::specfun_eval) == "specfun-eval");
}

TEST_CASE("the installed executable reports exit codes") {
  const char* bin = std::getenv("PERIODIC_BIN");
  if (!bin) return;
  const std::string base = std::string(bin);
  CHECK(WEXITSTATUS(std::system((base + " validate --suite 1d --format csv > /dev/null").c_str())) == 0);
  CHECK(WEXITSTATUS(std::system((base + " kernel-eval --potential riesz:-1 --x 0 --y 0 2> /dev/null").c_str())) == 2);
  CHECK(WEXITSTATUS(std::system((base + " kernel-eval --lattice missing.json --x 0 --y 0 2> /dev/null").c_str())) == 2);
}
