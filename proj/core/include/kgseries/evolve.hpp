#pragma once

#include <vector>

#include "kgseries/grid.hpp"

namespace kgs {

/// omega_k = sqrt(|k|^2 + m^2) for the lattice wavevector k = 2*pi*j/L.
/// `j` has one integer per axis, each in {-n/2, ..., n/2-1} (RangeError
/// otherwise).
double dispersion(const GridSpec& grid, const std::vector<int>& j);

/// Free Klein-Gordon evolution of Cauchy data, per mode:
///   phi_hat(t) = cos(omega t) phi0_hat + sin(omega t)/omega phi1_hat.
/// Returns value, d/dt and d^2/dt^2 snapshots at time t.
struct EvolvedSnapshot {
  FieldSnapshot value;
  FieldSnapshot dvalue;
  FieldSnapshot d2value;
  double t = 0.0;
};
EvolvedSnapshot free_snapshot(const CauchyData& data, double t);

/// Free field sampled on [0, T] at spacing dt with all three tracks
/// populated analytically. The t = 0 value/derivative samples are the
/// Cauchy data verbatim (the datum is the sample).
TimeSampledField free_field(const CauchyData& data, double T, double dt);

/// Retarded solution of (box + m^2) u = -source with zero Cauchy data:
/// per mode, u_hat(t) = -int_0^t sin(omega (t-s))/omega source_hat(s) ds by
/// trapezoid on the source's samples. Derivative tracks are analytic
/// (du from the differentiated kernel, d2u from the mode ODE). Output
/// value and d/dt tracks vanish identically through the source's leading
/// zero samples.
TimeSampledField solve_retarded(const TimeSampledField& source);

}  // namespace kgs
