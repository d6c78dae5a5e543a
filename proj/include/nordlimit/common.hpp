#pragma once

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace nordlimit {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A state left the admissible set (eta <= 0, p <= 0, NaN, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Sound speed squared not in (0, c^2).
class CausalityError : public Error {
 public:
  using Error::Error;
};

/// Invalid numeric parameter (kappa <= 0, bad grid size, ...).
class ParameterError : public Error {
 public:
  using Error::Error;
};

class RootFindError : public Error {
 public:
  RootFindError(const std::string& what, double lo, double hi)
      : Error(what), lo_(lo), hi_(hi) {}
  double lo() const { return lo_; }
  double hi() const { return hi_; }

 private:
  double lo_;
  double hi_;
};

/// |v| >= c somewhere on the grid.
class SuperluminalError : public Error {
 public:
  using Error::Error;
};

class SingularMatrixError : public Error {
 public:
  using Error::Error;
};

/// Speed of light. Either finite and positive or the distinguished value
/// infinity, for which every c^-2 factor vanishes identically.
class LightSpeed {
 public:
  constexpr LightSpeed() = default;
  explicit LightSpeed(double c) : c_(c) {
    if (!(c > 0.0)) throw ParameterError("speed of light must be positive");
  }
  static LightSpeed infinite() { return LightSpeed(); }

  bool isInfinite() const { return std::isinf(c_); }
  double value() const { return c_; }
  /// c^-2, exactly zero for c = infinity.
  double invSq() const { return isInfinite() ? 0.0 : 1.0 / (c_ * c_); }
  double sq() const { return c_ * c_; }

  std::string str() const;

 private:
  double c_ = std::numeric_limits<double>::infinity();
};

struct PhysicalConstants {
  double gravG = 1.0;
  double kappa = 1.0;
  LightSpeed c;

  /// Throws ParameterError unless kappa > 0 and G > 0.
  void validate() const;
  PhysicalConstants withC(LightSpeed cc) const {
    PhysicalConstants out = *this;
    out.c = cc;
    return out;
  }
};

inline constexpr double kPi = 3.14159265358979323846;

}  // namespace nordlimit
