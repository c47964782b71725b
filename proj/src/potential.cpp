#include "periodic/potential.hpp"

#include <charconv>
#include <cmath>
#include <sstream>

#include "periodic/error.hpp"

namespace periodic {

namespace {

double parse_positive(const std::string& text, const std::string& what) {
  double value = 0.0;
  const char* begin = text.data();
  const char* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc() || ptr != end || text.empty()) {
    throw Error(ErrorCode::InvalidArgument, "cannot parse " + what + " from '" + text + "'");
  }
  return value;
}

std::string format_number(double v) {
  std::ostringstream os;
  os.imbue(std::locale::classic());
  os.precision(17);
  os << v;
  return os.str();
}

}  // namespace

PotentialSpec::PotentialSpec(Family family) : family_(family) {
  if (const auto* r = std::get_if<Riesz>(&family_); r && !(r->s > 0.0 && std::isfinite(r->s))) {
    throw Error(ErrorCode::InvalidArgument, "Riesz exponent s must be positive");
  }
  if (const auto* r = std::get_if<LogRiesz>(&family_); r && !(r->s > 0.0 && std::isfinite(r->s))) {
    throw Error(ErrorCode::InvalidArgument, "log-Riesz exponent s must be positive");
  }
  if (const auto* g = std::get_if<Gaussian>(&family_); g && !(g->c > 0.0 && std::isfinite(g->c))) {
    throw Error(ErrorCode::InvalidArgument, "Gaussian width c must be positive");
  }
}

PotentialSpec PotentialSpec::parse(const std::string& text) {
  const auto colon = text.find(':');
  const std::string name = text.substr(0, colon);
  const std::string arg = colon == std::string::npos ? "" : text.substr(colon + 1);
  if (name == "log" && colon == std::string::npos) return log();
  if (name == "riesz") return riesz(parse_positive(arg, "Riesz exponent"));
  if (name == "logriesz") return log_riesz(parse_positive(arg, "log-Riesz exponent"));
  if (name == "gaussian") return gaussian(parse_positive(arg, "Gaussian width"));
  throw Error(ErrorCode::InvalidArgument,
              "unknown potential '" + text + "' (expected riesz:S, logriesz:S, log or gaussian:C)");
}

std::string PotentialSpec::to_string() const {
  return std::visit(
      [](const auto& f) -> std::string {
        using T = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<T, Riesz>) return "riesz:" + format_number(f.s);
        if constexpr (std::is_same_v<T, LogRiesz>) return "logriesz:" + format_number(f.s);
        if constexpr (std::is_same_v<T, Log>) return "log";
        if constexpr (std::is_same_v<T, Gaussian>) return "gaussian:" + format_number(f.c);
      },
      family_);
}

std::optional<double> PotentialSpec::exponent() const {
  if (const auto* r = std::get_if<Riesz>(&family_)) return r->s;
  if (const auto* r = std::get_if<LogRiesz>(&family_)) return r->s;
  return std::nullopt;
}

bool PotentialSpec::singular_at_lattice_points() const { return !std::holds_alternative<Gaussian>(family_); }

}  // namespace periodic
