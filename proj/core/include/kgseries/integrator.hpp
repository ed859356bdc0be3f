#pragma once

#include <string>

#include "kgseries/grid.hpp"

namespace kgs {

enum class Scheme { strang, leapfrog };

std::string scheme_name(Scheme s);
Scheme parse_scheme(const std::string& name);  // FormatError on unknown name

/// Second-order time stepper for (box + m^2) phi + lambda phi^p = 0.
///
/// strang: exact per-mode linear rotation over half steps around a full
/// nonlinear kick; no linear stability bound (the linear flow is exact).
/// leapfrog: kick-drift-kick with the full force; stable iff
/// dt * omega_max < 2 (checked at configuration time).
struct IntegratorConfig {
  Scheme scheme = Scheme::strang;
  int p = 2;
  double lambda = 0.0;
  double T = 1.0;
  double dt = 1e-3;       // internal step
  int record_every = 1;   // sample spacing in steps
  double blowup_factor = 1e8;  // sup-norm growth treated as divergence

  void validate(const GridSpec& grid) const;
};

/// Integrates the Cauchy data over [0, T], recording value and d/dt tracks
/// every record_every steps (sample 0 is the data verbatim). Throws
/// DivergenceError naming the scheme and dt if the sup norm blows past
/// blowup_factor * (1 + initial sup norm) or turns non-finite.
TimeSampledField integrate(const CauchyData& data, const IntegratorConfig& cfg);

/// Discrete energy sum_sites [pi^2/2 + |grad phi|^2/2 + m^2 phi^2/2
/// + lambda phi^(p+1)/(p+1)] * cell_volume, with the spectral gradient
/// (Nyquist planes excluded from the derivative, as usual).
double field_energy(const FieldSnapshot& phi, const FieldSnapshot& pi, double lambda, int p);

/// Energy at every recorded sample of a trajectory carrying a d/dt track.
std::vector<double> energy_series(const TimeSampledField& trajectory, double lambda, int p);

}  // namespace kgs
