#include "nordlimit/common.hpp"

#include <sstream>

namespace nordlimit {

std::string LightSpeed::str() const {
  if (isInfinite()) return "inf";
  std::ostringstream os;
  os.precision(17);
  os << c_;
  return os.str();
}

void PhysicalConstants::validate() const {
  if (!(kappa > 0.0) || !std::isfinite(kappa))
    throw ParameterError("kappa must be > 0 (the screened Poisson operator is singular at kappa = 0)");
  if (!(gravG > 0.0) || !std::isfinite(gravG)) throw ParameterError("G must be > 0");
}

}  // namespace nordlimit
