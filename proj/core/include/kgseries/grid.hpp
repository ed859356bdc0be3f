#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "kgseries/errors.hpp"

namespace kgs {

/// Periodic lattice discretizing the torus [0, L)^d with n sites per axis
/// (n even) and Klein-Gordon mass m. Sites are row-major, x_i = i * L / n.
/// Lattice wavevectors are k = 2*pi*j/L with j in {-n/2, ..., n/2-1} per axis.
struct GridSpec {
  int d = 1;
  int n = 2;
  double L = 1.0;
  double m = 1.0;

  void validate() const {
    if (d < 1 || d > 3)
      throw ConfigError("grid dimension must be in [1,3], got " + std::to_string(d));
    if (n < 2 || n % 2 != 0)
      throw ConfigError("grid size must be even and >= 2, got " + std::to_string(n));
    if (!(L > 0.0)) throw ConfigError("box length must be positive");
    if (!(m > 0.0)) throw ConfigError("mass must be positive");
  }

  std::size_t sites() const {
    std::size_t s = 1;
    for (int a = 0; a < d; ++a) s *= static_cast<std::size_t>(n);
    return s;
  }
  double spacing() const { return L / n; }
  double volume() const { return std::pow(L, d); }
  double cell_volume() const { return std::pow(spacing(), d); }

  bool operator==(const GridSpec& o) const {
    return d == o.d && n == o.n && L == o.L && m == o.m;
  }
  bool operator!=(const GridSpec& o) const { return !(*this == o); }
};

/// Real field values on a grid at one instant, row-major.
struct FieldSnapshot {
  GridSpec grid;
  std::vector<double> values;

  FieldSnapshot() = default;
  explicit FieldSnapshot(const GridSpec& g) : grid(g), values(g.sites(), 0.0) {}
  FieldSnapshot(const GridSpec& g, std::vector<double> v) : grid(g), values(std::move(v)) {
    validate();
  }

  void validate() const {
    grid.validate();
    if (values.size() != grid.sites())
      throw ShapeError("snapshot carries " + std::to_string(values.size()) +
                       " values for a grid of " + std::to_string(grid.sites()) + " sites");
  }
};

/// Initial position/velocity pair (phi0, phi1) on a shared grid.
struct CauchyData {
  FieldSnapshot phi0;
  FieldSnapshot phi1;

  const GridSpec& grid() const { return phi0.grid; }
  void validate() const {
    phi0.validate();
    phi1.validate();
    if (phi0.grid != phi1.grid)
      throw ShapeError("Cauchy data components live on different grids");
  }
};

/// Uniform time grid t_j = j * dt, j = 0..count-1, spanning [0, T] with
/// T an integer multiple of dt.
struct TimeGrid {
  double T = 0.0;
  double dt = 0.0;
  std::size_t count = 1;
};

inline TimeGrid make_time_grid(double T, double dt) {
  if (!(dt > 0.0)) throw ConfigError("time step must be positive");
  if (T < 0.0) throw ConfigError("horizon must be nonnegative");
  const double steps_real = T / dt;
  const auto steps = static_cast<std::size_t>(std::llround(steps_real));
  if (std::abs(steps_real - static_cast<double>(steps)) > 1e-9 * (steps_real + 1.0))
    throw ConfigError("horizon T must be an integer multiple of dt");
  return TimeGrid{T, dt, steps + 1};
}

/// Real field sampled on a uniform time grid. `values` is always populated;
/// `dvalues` (d/dt) and `d2values` (d^2/dt^2) are present when the producer
/// has closed forms for them and empty otherwise.
struct TimeSampledField {
  GridSpec grid;
  TimeGrid time;
  std::vector<std::vector<double>> values;
  std::vector<std::vector<double>> dvalues;
  std::vector<std::vector<double>> d2values;

  std::size_t sample_count() const { return values.size(); }
  double sample_time(std::size_t j) const { return static_cast<double>(j) * time.dt; }

  bool has_dvalues() const { return !dvalues.empty(); }
  bool has_d2values() const { return !d2values.empty(); }

  void validate() const {
    grid.validate();
    if (values.size() != time.count)
      throw ShapeError("field carries " + std::to_string(values.size()) +
                       " samples for a time grid of " + std::to_string(time.count));
    const std::size_t s = grid.sites();
    for (const auto& v : values)
      if (v.size() != s) throw ShapeError("sample size does not match grid");
    if (!dvalues.empty() && dvalues.size() != values.size())
      throw ShapeError("derivative track sample count mismatch");
    if (!d2values.empty() && d2values.size() != values.size())
      throw ShapeError("second-derivative track sample count mismatch");
  }
};

}  // namespace kgs
