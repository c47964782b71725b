#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace periodic::cli {

enum class Command { kernel_eval, energy, minimize, growth, validate, specfun_eval };
enum class Format { json, csv };

struct RunConfig {
  Command command = Command::kernel_eval;
  std::string lattice = "Z1";  // preset name or path to a basis JSON file
  std::string potential = "riesz:1";
  double tol = 1e-12;
  double eta = 1.0;
  std::uint64_t seed = 0;
  std::string out;  // empty writes to stdout
  Format format = Format::json;
  int threads = 1;
  bool cartesian = false;

  // kernel-eval
  std::vector<double> x, y;
  bool gradient = false;

  // energy
  std::string points;

  // minimize / growth
  int n = 0;
  std::vector<int> n_list;
  int restarts = 4;
  int max_iters = 2000;
  double tol_grad = 1e-8;
  bool lattice_start = true;
  bool trajectory = false;

  // validate
  std::string suite = "all";

  // specfun-eval
  std::string function;
  std::vector<double> args;
};

std::string to_string(Command command);

/// Thrown by parse_args for --help; carries the help text.
struct HelpRequested {
  std::string text;
};

/// Parses argv into a validated RunConfig. Precedence, lowest first: defaults,
/// --config JSON, PERIODIC_TOL / PERIODIC_THREADS, explicit flags.
/// Throws Error{UsageError} naming the offending flag, or HelpRequested.
RunConfig parse_args(int argc, const char* const* argv);

/// Executes a parsed run. Returns 0 on success, 1 on a failed validation or
/// computation, 2 on usage or input errors.
int run(const RunConfig& config, std::ostream& out, std::ostream& err);

/// parse_args + run with error reporting; the body of the executable.
int main_entry(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace periodic::cli
