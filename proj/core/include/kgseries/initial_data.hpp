#pragma once

#include <cstdint>
#include <string>

#include "kgseries/grid.hpp"

namespace kgs {

/// Periodized Gaussian bump exp(-dist(x, center)^2 / (2 sigma^2)) with the
/// torus distance, scaled by amp. center is in box units [0, 1).
FieldSnapshot gaussian_bump(const GridSpec& grid, double center, double sigma, double amp);

/// Single Fourier mode amp * cos(k_j . x + phase) with j per-axis integers.
FieldSnapshot single_mode(const GridSpec& grid, const std::vector<int>& j, double amp,
                          double phase = 0.0);

/// Deterministic random band-limited field: sum over modes 0 < |j|_inf <= band
/// of seeded amplitudes in [-amp, amp] and phases, plus a seeded constant
/// offset. Identical (seed, grid, band, amp) inputs give identical fields.
FieldSnapshot band_limited(const GridSpec& grid, std::uint64_t seed, int band, double amp);

/// Parses a data spec string:
///   "zero"
///   "gaussian:center=<c>,sigma=<s>,amp=<a>"
///   "mode:j=<int>[/<int>/<int>],amp=<a>,phase=<ph>"
///   "bandlimited:seed=<u64>,band=<int>,amp=<a>"
/// Unknown shapes or malformed fields raise FormatError.
FieldSnapshot parse_data_spec(const GridSpec& grid, const std::string& spec);

/// Cauchy data from two spec strings, rescaled (if normalize > 0) so that
/// ||phi0||_{H^{q+1}} + ||phi1||_{H^q} equals `normalize`.
CauchyData make_cauchy_data(const GridSpec& grid, const std::string& phi0_spec,
                            const std::string& phi1_spec, double q, double normalize = 0.0);

}  // namespace kgs
