#pragma once

#include <utility>
#include <vector>

#include "kgseries/grid.hpp"

namespace kgs {

/// The deterministic band-limited test family used to estimate the H^q
/// algebra constant: moderate Gaussian bumps, low single modes, and seeded
/// band-limited draws, in a fixed order.
std::vector<std::pair<FieldSnapshot, FieldSnapshot>> algebra_test_pairs(const GridSpec& grid);

/// Empirical estimate of the smallest c with ||f g||_{H^q} <= c ||f||_{H^q}
/// ||g||_{H^q}: the supremum of the ratio over algebra_test_pairs(grid).
/// This is an estimate (a finite family lower-bounds the true constant),
/// and callers treat it as such.
double estimate_algebra_constant(const GridSpec& grid, double q);

}  // namespace kgs
