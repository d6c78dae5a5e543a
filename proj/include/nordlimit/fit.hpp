#pragma once

#include <vector>

namespace nordlimit {

struct LogLogFit {
  double slope = 0.0;
  double intercept = 0.0;
  // RMS of the natural-log residuals about the fitted line.
  double residual = 0.0;
};

// Least-squares line through (log x, log y). Needs >= 2 points with x, y > 0.
LogLogFit fitLogLog(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace nordlimit
