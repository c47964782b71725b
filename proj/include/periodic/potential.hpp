#pragma once

#include <optional>
#include <string>
#include <variant>

namespace periodic {

/// |x|^{-s}, s > 0.
struct Riesz {
  double s;
  bool operator==(const Riesz&) const = default;
};

/// |x|^{-s} log(|x|^{-2}), s > 0.
struct LogRiesz {
  double s;
  bool operator==(const LogRiesz&) const = default;
};

/// log(|x|^{-2}).
struct Log {
  bool operator==(const Log&) const = default;
};

/// exp(-c |x|^2), c > 0.
struct Gaussian {
  double c;
  bool operator==(const Gaussian&) const = default;
};

class PotentialSpec {
 public:
  using Family = std::variant<Riesz, LogRiesz, Log, Gaussian>;

  /// Throws Error{InvalidArgument} if s <= 0 or c <= 0.
  explicit PotentialSpec(Family family);

  static PotentialSpec riesz(double s) { return PotentialSpec(Riesz{s}); }
  static PotentialSpec log_riesz(double s) { return PotentialSpec(LogRiesz{s}); }
  static PotentialSpec log() { return PotentialSpec(Log{}); }
  static PotentialSpec gaussian(double c) { return PotentialSpec(Gaussian{c}); }

  /// Parses "riesz:S", "logriesz:S", "log", "gaussian:C".
  static PotentialSpec parse(const std::string& text);
  std::string to_string() const;

  const Family& family() const { return family_; }
  /// Exponent s for Riesz and LogRiesz.
  std::optional<double> exponent() const;
  /// Riesz, LogRiesz and Log blow up when x - y is a lattice vector.
  bool singular_at_lattice_points() const;

  bool operator==(const PotentialSpec&) const = default;

 private:
  Family family_;
};

}  // namespace periodic
