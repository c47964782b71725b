#include "periodic/cli.hpp"

#include <charconv>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"

#include "periodic/energy.hpp"
#include "periodic/error.hpp"
#include "periodic/kernel.hpp"
#include "periodic/lattice.hpp"
#include "periodic/specfun.hpp"
#include "periodic/validate.hpp"
#include "periodic/version.hpp"

namespace periodic::cli {

namespace {

using nlohmann::json;

[[noreturn]] void usage(const std::string& flag, const std::string& message) {
  throw Error(ErrorCode::UsageError, "--" + flag + ": " + message);
}

double parse_double(const std::string& flag, const std::string& text) {
  double v = 0.0;
  const char* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc() || ptr != end || text.empty()) usage(flag, "expected a number, got '" + text + "'");
  return v;
}

long long parse_integer(const std::string& flag, const std::string& text) {
  long long v = 0;
  const char* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc() || ptr != end || text.empty()) usage(flag, "expected an integer, got '" + text + "'");
  return v;
}

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> parts;
  std::string cur;
  for (char c : text) {
    if (c == sep) {
      parts.push_back(cur);
      cur.clear();
    } else if (c != ' ') {
      cur.push_back(c);
    }
  }
  parts.push_back(cur);
  return parts;
}

std::vector<double> parse_doubles(const std::string& flag, const std::string& text) {
  std::vector<double> out;
  for (const auto& p : split(text, ',')) out.push_back(parse_double(flag, p));
  return out;
}

bool parse_bool(const std::string& flag, const std::string& text) {
  if (text == "true" || text == "1") return true;
  if (text == "false" || text == "0") return false;
  usage(flag, "expected true or false, got '" + text + "'");
}

std::string format_number(double v) {
  std::ostringstream os;
  os.imbue(std::locale::classic());
  os.precision(17);
  os << v;
  return os.str();
}

// Flattens a JSON config value into the same text a flag would carry.
std::string json_to_text(const json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
  if (v.is_number_integer()) return std::to_string(v.get<long long>());
  if (v.is_number()) return format_number(v.get<double>());
  if (v.is_array()) {
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (i) out += ',';
      out += json_to_text(v[i]);
    }
    return out;
  }
  throw Error(ErrorCode::UsageError, "--config: unsupported value " + v.dump());
}

struct OptionSpec {
  std::string name;
  std::string help;
  bool is_flag = false;
};

const std::vector<OptionSpec>& common_options() {
  static const std::vector<OptionSpec> opts = {
      {"lattice", "lattice preset (Z1, Z2, Z3, hex, fcc-like) or path to a basis JSON file"},
      {"potential", "riesz:S, logriesz:S, log or gaussian:C"},
      {"tol", "absolute accuracy requested from the kernel sums (env PERIODIC_TOL)"},
      {"eta", "splitting parameter between the direct and dual sums"},
      {"seed", "seed for random restarts"},
      {"out", "output file (default: standard output)"},
      {"format", "json or csv"},
      {"threads", "worker threads, 0 for all cores (env PERIODIC_THREADS)"},
      {"config", "JSON file whose keys mirror these flags"},
      {"cartesian", "read points as Cartesian rather than fractional coordinates", true},
  };
  return opts;
}

struct SubcommandSpec {
  Command command;
  std::string name;
  std::string help;
  std::vector<OptionSpec> options;
};

const std::vector<SubcommandSpec>& subcommands() {
  static const std::vector<SubcommandSpec> subs = {
      {Command::kernel_eval, "kernel-eval",
       "Evaluate the renormalized periodic kernel K(x, y): the split sum of incomplete-gamma direct terms, "
       "dual-lattice cosine terms and the splitting constant. Also available as 'kernel eval'.",
       {{"x", "first point, comma separated"},
        {"y", "second point, comma separated (a single value is broadcast)"},
        {"gradient", "also report the gradient in x", true}}},
      {Command::energy, "energy",
       "Periodic energy of a configuration: the kernel summed over all ordered pairs of distinct points.",
       {{"points", "JSON file with a 'points' array (rows are points)"},
        {"gradient", "also report the fractional-coordinate gradient", true}}},
      {Command::minimize, "minimize",
       "Approximate the minimal periodic energy of N points by projected gradient descent with restarts.",
       {{"N", "number of points"},
        {"restarts", "number of starts (one structured start when N is a perfect power)"},
        {"max-iters", "iteration limit per start"},
        {"tol-grad", "stop when the largest gradient component is below this"},
        {"no-lattice-start", "use random starts only", true},
        {"trajectory", "record the accepted energies of the best start", true}}},
      {Command::growth, "growth",
       "Minimal energies for increasing N with the normalizations E/N^2, E/N^(1+s/d) and E/(N^2 log N) "
       "used to inspect the large-N asymptotics.",
       {{"N", "increasing list of point counts, comma separated"},
        {"restarts", "number of starts per N"},
        {"max-iters", "iteration limit per start"},
        {"tol-grad", "gradient stopping threshold"},
        {"no-lattice-start", "use random starts only", true}}},
      {Command::validate, "validate",
       "Run the closed-form and identity checks: exact one-dimensional minimal energies, the Hurwitz "
       "multiplication formula, Poisson summation and the constant shift between lattice sums and the kernel.",
       {{"suite", "all, 1d, poisson, shift or specfun"}, {"json", "write the JSON report to this file"}}},
      {Command::specfun_eval, "specfun-eval",
       "Evaluate one special function. Also available as 'specfun eval'.",
       {{"function", "gamma_upper, gamma_upper_dsigma, gamma, log_gamma, erfc, e1, digamma, trigamma, "
                     "hurwitz_zeta, hurwitz_zeta_ds, hurwitz_zeta_dq, riemann_zeta, riemann_zeta_ds, "
                     "euler_gamma, stieltjes_gamma1"},
        {"args", "comma separated arguments"}}},
  };
  return subs;
}

// Joins "kernel eval" and "specfun eval" into their hyphenated forms.
std::vector<std::string> normalize_argv(int argc, const char* const* argv) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  if (args.size() >= 2 && args[1] == "eval" && (args[0] == "kernel" || args[0] == "specfun")) {
    args[0] += "-eval";
    args.erase(args.begin() + 1);
  }
  return args;
}

Lattice load_lattice(const std::string& spec) {
  for (const auto& name : Lattice::preset_names()) {
    if (name == spec) return Lattice::preset(spec);
  }
  std::ifstream in(spec);
  if (!in) throw Error(ErrorCode::IoError, "cannot open lattice file '" + spec + "'");
  try {
    return Lattice::from_json(json::parse(in));
  } catch (const json::exception& e) {
    throw Error(ErrorCode::IoError, "lattice file '" + spec + "': " + e.what());
  }
}

Eigen::MatrixXd load_points(const std::string& path, int dimension) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open points file '" + path + "'");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::IoError, "points file '" + path + "': " + e.what());
  }
  const json& arr = j.is_object() ? j.at("points") : j;
  if (!arr.is_array() || arr.empty()) throw Error(ErrorCode::IoError, "points file '" + path + "' has no points");
  Eigen::MatrixXd pts(static_cast<Eigen::Index>(arr.size()), dimension);
  for (std::size_t i = 0; i < arr.size(); ++i) {
    const json& row = arr[i];
    if (row.is_number() && dimension == 1) {
      pts(static_cast<Eigen::Index>(i), 0) = row.get<double>();
      continue;
    }
    if (!row.is_array() || static_cast<int>(row.size()) != dimension) {
      throw Error(ErrorCode::DimensionMismatch, "point " + std::to_string(i) + " does not have " +
                                                    std::to_string(dimension) + " coordinates");
    }
    for (int c = 0; c < dimension; ++c) pts(static_cast<Eigen::Index>(i), c) = row[static_cast<std::size_t>(c)].get<double>();
  }
  return pts;
}

Eigen::VectorXd to_point(const std::vector<double>& values, int dimension, const std::string& flag) {
  if (values.size() == 1) return Eigen::VectorXd::Constant(dimension, values[0]);
  if (static_cast<int>(values.size()) != dimension) {
    throw Error(ErrorCode::UsageError, "--" + flag + ": expected " + std::to_string(dimension) + " coordinates");
  }
  return Eigen::Map<const Eigen::VectorXd>(values.data(), dimension);
}

json envelope(const RunConfig& cfg) {
  return {{"version", kVersion}, {"command", to_string(cfg.command)}, {"potential", cfg.potential}};
}

class CsvWriter {
 public:
  explicit CsvWriter(std::ostream& os) : os_(os) { os_.imbue(std::locale::classic()); }
  void row(const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) os_ << (i ? "," : "") << cells[i];
    os_ << '\n';
  }

 private:
  std::ostream& os_;
};

using SpecfunEntry = std::pair<int, std::function<double(const std::vector<double>&)>>;

const std::map<std::string, SpecfunEntry>& specfun_table() {
  using A = const std::vector<double>&;
  static const std::map<std::string, SpecfunEntry> table = {
      {"gamma_upper", {2, [](A a) { return specfun::gamma_upper(a[0], a[1]); }}},
      {"gamma_upper_dsigma", {2, [](A a) { return specfun::gamma_upper_dsigma(a[0], a[1]); }}},
      {"gamma", {1, [](A a) { return specfun::gamma(a[0]); }}},
      {"log_gamma", {1, [](A a) { return specfun::log_gamma(a[0]); }}},
      {"erfc", {1, [](A a) { return specfun::erfc(a[0]); }}},
      {"e1", {1, [](A a) { return specfun::exp_integral_e1(a[0]); }}},
      {"digamma", {1, [](A a) { return specfun::digamma(a[0]); }}},
      {"trigamma", {1, [](A a) { return specfun::trigamma(a[0]); }}},
      {"hurwitz_zeta", {2, [](A a) { return specfun::hurwitz_zeta(a[0], a[1]); }}},
      {"hurwitz_zeta_ds", {2, [](A a) { return specfun::hurwitz_zeta_ds(a[0], a[1]); }}},
      {"hurwitz_zeta_dq", {2, [](A a) { return specfun::hurwitz_zeta_dq(a[0], a[1]); }}},
      {"riemann_zeta", {1, [](A a) { return specfun::riemann_zeta(a[0]); }}},
      {"riemann_zeta_ds", {1, [](A a) { return specfun::riemann_zeta_ds(a[0]); }}},
      {"euler_gamma", {0, [](A) { return specfun::euler_gamma(); }}},
      {"stieltjes_gamma1", {0, [](A) { return specfun::stieltjes_gamma1(); }}},
  };
  return table;
}

void write_output(const RunConfig& cfg, std::ostream& out, const std::function<void(std::ostream&)>& body) {
  if (cfg.out.empty()) {
    body(out);
    return;
  }
  std::ofstream file(cfg.out);
  if (!file) throw Error(ErrorCode::IoError, "cannot write '" + cfg.out + "'");
  body(file);
}

void emit_json(const RunConfig& cfg, std::ostream& out, const json& j) {
  write_output(cfg, out, [&](std::ostream& os) { os << j.dump(2) << '\n'; });
}

MinimizeOptions minimize_options(const RunConfig& cfg) {
  MinimizeOptions o;
  o.restarts = cfg.restarts;
  o.max_iters = cfg.max_iters;
  o.seed = cfg.seed;
  o.tol_grad = cfg.tol_grad;
  o.tol = cfg.tol;
  o.eta = cfg.eta;
  o.lattice_start = cfg.lattice_start;
  o.record_trajectory = cfg.trajectory;
  o.threads = cfg.threads;
  return o;
}

int run_kernel_eval(const RunConfig& cfg, std::ostream& out) {
  const auto lattice = load_lattice(cfg.lattice);
  const int d = lattice.dimension();
  Eigen::VectorXd x = to_point(cfg.x, d, "x");
  Eigen::VectorXd y = to_point(cfg.y, d, "y");
  if (!cfg.cartesian) {
    x = lattice.to_cartesian(x);
    y = lattice.to_cartesian(y);
  }
  const auto pot = PotentialSpec::parse(cfg.potential);
  const auto plan = plan_ewald(lattice, pot, cfg.tol, cfg.eta);
  const auto kv = evaluate_kernel(lattice, plan, x, y);
  std::optional<Eigen::VectorXd> grad;
  if (cfg.gradient && !kv.is_infinite()) grad = kernel_gradient(lattice, plan, x, y);
  if (cfg.format == Format::csv) {
    write_output(cfg, out, [&](std::ostream& os) {
      CsvWriter csv(os);
      std::vector<std::string> head = {"value", "abs_err_bound", "terms_direct", "terms_dual"};
      std::vector<std::string> row = {format_number(kv.value), format_number(kv.abs_err_bound),
                                      std::to_string(kv.terms_direct), std::to_string(kv.terms_dual)};
      if (grad) {
        for (int c = 0; c < d; ++c) {
          head.push_back("grad_" + std::to_string(c));
          row.push_back(format_number((*grad)[c]));
        }
      }
      csv.row(head);
      csv.row(row);
    });
    return 0;
  }
  json j = envelope(cfg);
  j.update(kv.to_json());
  if (grad) j["gradient"] = std::vector<double>(grad->data(), grad->data() + grad->size());
  j["lattice"] = lattice.to_json();
  j["plan"] = plan.to_json();
  emit_json(cfg, out, j);
  return 0;
}

int run_energy(const RunConfig& cfg, std::ostream& out) {
  const auto lattice = load_lattice(cfg.lattice);
  const Eigen::MatrixXd raw = load_points(cfg.points, lattice.dimension());
  const Configuration config =
      cfg.cartesian ? Configuration::from_cartesian(lattice, raw) : Configuration(lattice, raw);
  const auto pot = PotentialSpec::parse(cfg.potential);
  const auto plan = plan_ewald(lattice, pot, cfg.tol, cfg.eta);
  const auto report = total_energy(config, pot, plan, EnergyOptions{cfg.threads}, cfg.gradient);
  if (cfg.format == Format::csv) {
    write_output(cfg, out, [&](std::ostream& os) {
      CsvWriter csv(os);
      csv.row({"N", "energy", "degenerate_pairs"});
      csv.row({std::to_string(config.size()), format_number(report.energy),
               std::to_string(report.degenerate_pairs.size())});
    });
    return 0;
  }
  json j = envelope(cfg);
  j.update(report.to_json());
  j["configuration"] = config.to_json();
  emit_json(cfg, out, j);
  return 0;
}

int run_minimize(const RunConfig& cfg, std::ostream& out) {
  const auto lattice = load_lattice(cfg.lattice);
  const auto pot = PotentialSpec::parse(cfg.potential);
  const auto result = minimize(lattice, pot, cfg.n, minimize_options(cfg));
  if (cfg.format == Format::csv) {
    write_output(cfg, out, [&](std::ostream& os) {
      CsvWriter csv(os);
      csv.row({"restart", "energy", "iterations", "converged", "lattice_start"});
      for (std::size_t i = 0; i < result.restarts.size(); ++i) {
        const auto& r = result.restarts[i];
        csv.row({std::to_string(i), format_number(r.energy), std::to_string(r.iterations),
                 r.converged ? "true" : "false", r.lattice_start ? "true" : "false"});
      }
    });
    return 0;
  }
  json j = envelope(cfg);
  j["N"] = cfg.n;
  j["seed"] = cfg.seed;
  j.update(result.to_json());
  emit_json(cfg, out, j);
  return 0;
}

int run_growth(const RunConfig& cfg, std::ostream& out) {
  const auto lattice = load_lattice(cfg.lattice);
  const auto pot = PotentialSpec::parse(cfg.potential);
  const auto rows = growth_diagnostic(lattice, pot, cfg.n_list, minimize_options(cfg));
  if (cfg.format == Format::csv) {
    write_output(cfg, out, [&](std::ostream& os) {
      CsvWriter csv(os);
      csv.row({"N", "E", "E_per_N2", "E_per_N1_plus_s_over_d", "E_per_N2_logN"});
      for (const auto& r : rows) {
        csv.row({std::to_string(r.n), format_number(r.energy), format_number(r.per_n2),
                 format_number(r.per_n_1_plus_s_over_d), format_number(r.per_n2_log_n)});
      }
    });
    return 0;
  }
  json j = envelope(cfg);
  j["plan"] = plan_ewald(lattice, pot, cfg.tol, cfg.eta).to_json();
  json arr = json::array();
  for (const auto& r : rows) {
    arr.push_back({{"N", r.n},
                   {"E", r.energy},
                   {"E_per_N2", r.per_n2},
                   {"E_per_N1_plus_s_over_d", r.per_n_1_plus_s_over_d},
                   {"E_per_N2_logN", r.per_n2_log_n}});
  }
  j["rows"] = arr;
  emit_json(cfg, out, j);
  return 0;
}

int run_validate(const RunConfig& cfg, std::ostream& out) {
  const auto results = validate::run_suite(cfg.suite, cfg.threads);
  const bool ok = validate::all_passed(results);
  if (cfg.format == Format::csv) {
    write_output(cfg, out, [&](std::ostream& os) {
      CsvWriter csv(os);
      csv.row({"name", "lhs", "rhs", "abs_err", "rel_err", "tolerance", "passed", "observation"});
      for (const auto& r : results) {
        csv.row({r.name, format_number(r.lhs), format_number(r.rhs), format_number(r.abs_err),
                 format_number(r.rel_err), format_number(r.tolerance), r.passed ? "true" : "false",
                 r.observation ? "true" : "false"});
      }
    });
  } else {
    json j = {{"version", kVersion}, {"command", "validate"}, {"suite", cfg.suite}, {"passed", ok}};
    json arr = json::array();
    for (const auto& r : results) arr.push_back(r.to_json());
    j["results"] = arr;
    emit_json(cfg, out, j);
  }
  return ok ? 0 : 1;
}

int run_specfun(const RunConfig& cfg, std::ostream& out) {
  const auto& table = specfun_table();
  const auto it = table.find(cfg.function);
  const double value = it->second.second(cfg.args);
  if (cfg.format == Format::csv) {
    write_output(cfg, out, [&](std::ostream& os) {
      CsvWriter csv(os);
      csv.row({"function", "value"});
      csv.row({cfg.function, format_number(value)});
    });
    return 0;
  }
  json j = {{"version", kVersion}, {"command", "specfun-eval"}, {"function", cfg.function}, {"args", cfg.args},
            {"value", value}};
  emit_json(cfg, out, j);
  return 0;
}

}  // namespace

std::string to_string(Command command) {
  for (const auto& s : subcommands()) {
    if (s.command == command) return s.name;
  }
  return "unknown";
}

RunConfig parse_args(int argc, const char* const* argv) {
  const auto args = normalize_argv(argc, argv);
  CLI::App app{"Periodic lattice energies: renormalized kernels, minimal energies and checks", "periodic"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);

  // name -> text for every option, per subcommand.
  std::map<std::string, std::map<std::string, std::string>> values;
  std::map<std::string, std::map<std::string, bool>> flags;
  std::map<std::string, std::map<std::string, CLI::Option*>> handles;
  std::map<std::string, CLI::App*> subs;

  for (const auto& spec : subcommands()) {
    CLI::App* sub = app.add_subcommand(spec.name, spec.help);
    subs[spec.name] = sub;
    std::vector<OptionSpec> all = common_options();
    all.insert(all.end(), spec.options.begin(), spec.options.end());
    for (const auto& o : all) {
      if (o.is_flag) {
        handles[spec.name][o.name] = sub->add_flag("--" + o.name, flags[spec.name][o.name], o.help);
      } else {
        handles[spec.name][o.name] = sub->add_option("--" + o.name, values[spec.name][o.name], o.help);
      }
    }
  }

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    throw HelpRequested{app.help()};
  } catch (const CLI::CallForAllHelp&) {
    throw HelpRequested{app.help("", CLI::AppFormatMode::All)};
  } catch (const CLI::CallForVersion&) {
    throw HelpRequested{std::string(kVersion) + "\n"};
  } catch (const CLI::ParseError& e) {
    throw Error(ErrorCode::UsageError, e.what());
  }

  const SubcommandSpec* chosen = nullptr;
  for (const auto& spec : subcommands()) {
    if (subs[spec.name]->parsed()) chosen = &spec;
  }
  if (!chosen) throw Error(ErrorCode::UsageError, "a subcommand is required");
  const std::string& name = chosen->name;

  // Merge: config file, environment, explicit flags.
  std::map<std::string, std::string> merged;
  if (handles[name]["config"]->count() > 0) {
    const std::string path = values[name]["config"];
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::UsageError, "--config: cannot open '" + path + "'");
    json j;
    try {
      j = json::parse(in);
    } catch (const json::exception& e) {
      throw Error(ErrorCode::UsageError, "--config: " + std::string(e.what()));
    }
    if (!j.is_object()) throw Error(ErrorCode::UsageError, "--config: expected a JSON object");
    for (auto it = j.begin(); it != j.end(); ++it) {
      std::string key = it.key();
      std::replace(key.begin(), key.end(), '_', '-');
      if (!handles[name].count(key) || key == "config") {
        throw Error(ErrorCode::UsageError, "--config: unknown key '" + it.key() + "' for " + name);
      }
      merged[key] = json_to_text(it.value());
    }
  }
  if (const char* env = std::getenv("PERIODIC_TOL")) merged["tol"] = env;
  if (const char* env = std::getenv("PERIODIC_THREADS")) merged["threads"] = env;
  for (const auto& [key, opt] : handles[name]) {
    if (opt->count() == 0 || key == "config") continue;
    auto f = flags[name].find(key);
    merged[key] = f != flags[name].end() ? (f->second ? "true" : "false") : values[name][key];
  }

  RunConfig cfg;
  cfg.command = chosen->command;
  auto has = [&](const std::string& k) { return merged.count(k) > 0; };
  if (has("lattice")) cfg.lattice = merged["lattice"];
  if (has("potential")) cfg.potential = merged["potential"];
  if (has("tol")) cfg.tol = parse_double("tol", merged["tol"]);
  if (has("eta")) cfg.eta = parse_double("eta", merged["eta"]);
  if (has("seed")) {
    const long long s = parse_integer("seed", merged["seed"]);
    if (s < 0) usage("seed", "must be non-negative");
    cfg.seed = static_cast<std::uint64_t>(s);
  }
  if (has("out")) cfg.out = merged["out"];
  if (has("json")) {
    cfg.out = merged["json"];
    cfg.format = Format::json;
  }
  if (cfg.command == Command::growth) cfg.format = Format::csv;
  if (has("format")) {
    if (merged["format"] == "json") {
      cfg.format = Format::json;
    } else if (merged["format"] == "csv") {
      cfg.format = Format::csv;
    } else {
      usage("format", "expected json or csv");
    }
  }
  if (has("threads")) {
    const long long t = parse_integer("threads", merged["threads"]);
    if (t < 0) usage("threads", "must be non-negative");
    cfg.threads = static_cast<int>(t);
  }
  if (has("cartesian")) cfg.cartesian = parse_bool("cartesian", merged["cartesian"]);
  if (has("gradient")) cfg.gradient = parse_bool("gradient", merged["gradient"]);
  if (has("x")) cfg.x = parse_doubles("x", merged["x"]);
  if (has("y")) cfg.y = parse_doubles("y", merged["y"]);
  if (has("points")) cfg.points = merged["points"];
  if (has("restarts")) cfg.restarts = static_cast<int>(parse_integer("restarts", merged["restarts"]));
  if (has("max-iters")) cfg.max_iters = static_cast<int>(parse_integer("max-iters", merged["max-iters"]));
  if (has("tol-grad")) cfg.tol_grad = parse_double("tol-grad", merged["tol-grad"]);
  if (has("no-lattice-start")) cfg.lattice_start = !parse_bool("no-lattice-start", merged["no-lattice-start"]);
  if (has("trajectory")) cfg.trajectory = parse_bool("trajectory", merged["trajectory"]);
  if (has("suite")) cfg.suite = merged["suite"];
  if (has("function")) cfg.function = merged["function"];
  if (has("args") && !merged["args"].empty()) cfg.args = parse_doubles("args", merged["args"]);
  if (has("N")) {
    for (const auto& part : split(merged["N"], ',')) {
      cfg.n_list.push_back(static_cast<int>(parse_integer("N", part)));
    }
    cfg.n = cfg.n_list.front();
  }

  // Validation before any computation.
  try {
    (void)PotentialSpec::parse(cfg.potential);
  } catch (const Error& e) {
    usage("potential", e.what());
  }
  if (!(cfg.tol > 0.0)) usage("tol", "must be positive");
  if (!(cfg.eta > 0.0)) usage("eta", "must be positive");
  if (cfg.restarts < 1) usage("restarts", "must be at least 1");
  if (cfg.max_iters < 0) usage("max-iters", "must be non-negative");
  if (!(cfg.tol_grad > 0.0)) usage("tol-grad", "must be positive");
  switch (cfg.command) {
    case Command::kernel_eval:
      if (cfg.x.empty()) usage("x", "required");
      if (cfg.y.empty()) usage("y", "required");
      break;
    case Command::energy:
      if (cfg.points.empty()) usage("points", "required");
      break;
    case Command::minimize:
      if (cfg.n_list.size() != 1) usage("N", "a single point count is required");
      if (cfg.n < 2) usage("N", "must be at least 2");
      break;
    case Command::growth:
      if (cfg.n_list.empty()) usage("N", "required");
      for (std::size_t i = 0; i < cfg.n_list.size(); ++i) {
        if (cfg.n_list[i] < 2) usage("N", "every entry must be at least 2");
        if (i > 0 && cfg.n_list[i] <= cfg.n_list[i - 1]) usage("N", "entries must be increasing");
      }
      break;
    case Command::validate:
      if (cfg.suite != "all" && cfg.suite != "1d" && cfg.suite != "poisson" && cfg.suite != "shift" &&
          cfg.suite != "specfun") {
        usage("suite", "expected all, 1d, poisson, shift or specfun");
      }
      break;
    case Command::specfun_eval: {
      const auto& table = specfun_table();
      const auto it = table.find(cfg.function);
      if (it == table.end()) usage("function", "unknown function '" + cfg.function + "'");
      if (static_cast<int>(cfg.args.size()) != it->second.first) {
        usage("args", cfg.function + " takes " + std::to_string(it->second.first) + " argument(s)");
      }
      break;
    }
  }
  return cfg;
}

int run(const RunConfig& config, std::ostream& out, std::ostream& err) {
  try {
    switch (config.command) {
      case Command::kernel_eval:
        return run_kernel_eval(config, out);
      case Command::energy:
        return run_energy(config, out);
      case Command::minimize:
        return run_minimize(config, out);
      case Command::growth:
        return run_growth(config, out);
      case Command::validate:
        return run_validate(config, out);
      case Command::specfun_eval:
        return run_specfun(config, out);
    }
  } catch (const Error& e) {
    err << "periodic " << to_string(config.command) << ": " << e.what() << '\n';
    const bool input = e.code() == ErrorCode::UsageError || e.code() == ErrorCode::IoError ||
                       e.code() == ErrorCode::DimensionMismatch || e.code() == ErrorCode::SingularBasis;
    return input ? 2 : 1;
  }
  return 1;
}

int main_entry(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  RunConfig cfg;
  try {
    cfg = parse_args(argc, argv);
  } catch (const HelpRequested& h) {
    out << h.text;
    return 0;
  } catch (const Error& e) {
    err << "periodic: " << e.what() << "\nRun 'periodic --help' for usage.\n";
    return 2;
  }
  return run(cfg, out, err);
}

}  // namespace periodic::cli
