#pragma once

#include <complex>
#include <iosfwd>
#include <string>
#include <vector>

#include "kgseries/grid.hpp"

namespace kgs {

/// Discrete Sobolev norm on the torus:
///   ||f||_{H^q}^2 = V * sum_j (1 + |k_j|^2)^q |c_j|^2,  c_j = F_j / n^d,
/// which for q = 0 agrees with the cell-volume-weighted l2 sum over sites.
double sobolev_norm(const FieldSnapshot& f, double q);

/// Same norm from an already-computed unnormalized spectrum.
double sobolev_norm_spectral(const std::vector<std::complex<double>>& F,
                             const GridSpec& grid, double q);

/// max over samples of (||f||_{H^q}, ||df/dt||_{H^q}, ||d2f/dt2||_{H^{q-1}}).
/// Uses the field's analytic derivative tracks when present; otherwise falls
/// back to second-order time differencing, which needs at least 3 samples
/// (ResolutionError below that).
double triple_norm(const TimeSampledField& f, double q);

/// Site-wise product of p >= 1 snapshots on a shared grid (ShapeError on
/// mismatch, DivergenceError on non-finite output). With dealias = true the
/// factors are zero-padded in spectrum by (p+1)/2, multiplied on the fine
/// grid, and the result truncated back with all |j| = n/2 Nyquist planes
/// zeroed, so retained modes are alias-free.
FieldSnapshot pointwise_product(const std::vector<const FieldSnapshot*>& factors,
                                bool dealias = false);

/// Sample-wise product of time-sampled fields (value tracks only; sample
/// grids must agree exactly).
TimeSampledField pointwise_product(const std::vector<const TimeSampledField*>& factors,
                                   bool dealias = false);

double max_abs(const FieldSnapshot& f);
double max_abs(const TimeSampledField& f);

/// CSV snapshot layout: header "d,n,L,m,t" then one row-major value per line.
void write_snapshot_csv(const FieldSnapshot& f, double t, std::ostream& os);
void write_snapshot_csv(const FieldSnapshot& f, double t, const std::string& path);
struct SnapshotWithTime {
  FieldSnapshot snapshot;
  double t = 0.0;
};
SnapshotWithTime read_snapshot_csv(std::istream& is);
SnapshotWithTime read_snapshot_csv(const std::string& path);

}  // namespace kgs
