#include "kgseries/algebra_constant.hpp"

#include <algorithm>
#include <cmath>

#include "kgseries/field.hpp"
#include "kgseries/initial_data.hpp"

namespace kgs {

std::vector<std::pair<FieldSnapshot, FieldSnapshot>> algebra_test_pairs(const GridSpec& grid) {
  grid.validate();
  std::vector<std::pair<FieldSnapshot, FieldSnapshot>> pairs;
  // Bump widths are in absolute units but capped so the bump stays well
  // inside one period.
  const double s1 = std::min(1.0, 0.08 * grid.L);
  const double s2 = std::min(1.4, 0.12 * grid.L);
  const FieldSnapshot b1 = gaussian_bump(grid, 0.30, s1, 1.0);
  const FieldSnapshot b2 = gaussian_bump(grid, 0.55, s2, 1.0);
  pairs.emplace_back(b1, b1);
  pairs.emplace_back(b1, b2);
  pairs.emplace_back(b2, b2);

  const int jmax = std::min(2, grid.n / 2 - 1);
  for (int j = 1; j <= jmax; ++j) {
    std::vector<int> idx(grid.d, 0);
    idx[0] = j;
    const FieldSnapshot mode = single_mode(grid, idx, 1.0);
    pairs.emplace_back(mode, mode);
    pairs.emplace_back(b1, mode);
  }

  const int band = std::max(1, std::min(4, grid.n / 8));
  const FieldSnapshot r1 = band_limited(grid, 101, band, 1.0);
  const FieldSnapshot r2 = band_limited(grid, 102, band, 1.0);
  const FieldSnapshot r3 = band_limited(grid, 103, band, 1.0);
  pairs.emplace_back(r1, r2);
  pairs.emplace_back(r1, r3);
  pairs.emplace_back(r2, r3);
  pairs.emplace_back(r1, r1);
  pairs.emplace_back(b1, r1);
  return pairs;
}

double estimate_algebra_constant(const GridSpec& grid, double q) {
  double best = 0.0;
  for (const auto& [f, g] : algebra_test_pairs(grid)) {
    const double nf = sobolev_norm(f, q);
    const double ng = sobolev_norm(g, q);
    if (nf == 0.0 || ng == 0.0) continue;
    const std::vector<const FieldSnapshot*> factors{&f, &g};
    const FieldSnapshot fg = pointwise_product(factors);
    best = std::max(best, sobolev_norm(fg, q) / (nf * ng));
  }
  return best;
}

}  // namespace kgs
