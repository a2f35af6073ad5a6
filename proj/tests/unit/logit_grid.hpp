#pragma once

#include <utility>
#include <vector>

#include "gamelab/stats.hpp"

namespace testutil {

// Brute-force maximiser of the two-parameter logit likelihood (slope, constant).
// A coarse grid, then repeated finer grids centred on the best point; the
// likelihood is concave so the zoom cannot lose the maximum.
inline std::pair<std::vector<double>, double> grid_logit_2d(const std::vector<double>& y, const gamelab::Matrix& x,
                                                            double half_width = 10.0, double final_step = 1e-6) {
  double c0 = 0, c1 = 0, step = 0.05, hw = half_width;
  double best = -1e300;
  while (true) {
    double b0 = c0, b1 = c1;
    for (double a = c0 - hw; a <= c0 + hw + 1e-12; a += step) {
      for (double b = c1 - hw; b <= c1 + hw + 1e-12; b += step) {
        const std::vector<double> beta{a, b};
        const double ll = gamelab::logit_log_likelihood(y, x, beta);
        if (ll > best) {
          best = ll;
          b0 = a;
          b1 = b;
        }
      }
    }
    c0 = b0;
    c1 = b1;
    if (step <= final_step) break;
    hw = 3 * step;
    step /= 10;
  }
  return {{c0, c1}, best};
}

}  // namespace testutil
