#include "kgseries/evolve.hpp"

#include <cmath>
#include <complex>

#include "kgseries/errors.hpp"
#include "kgseries/spectral.hpp"

namespace kgs {

double dispersion(const GridSpec& grid, const std::vector<int>& j) {
  grid.validate();
  if (static_cast<int>(j.size()) != grid.d)
    throw ShapeError("wavevector carries " + std::to_string(j.size()) +
                     " components for a " + std::to_string(grid.d) + "-d grid");
  double k2 = 0.0;
  for (int ja : j) {
    if (ja < -grid.n / 2 || ja > grid.n / 2 - 1)
      throw RangeError("mode index " + std::to_string(ja) + " outside {-n/2,...,n/2-1}");
    const double k = 2.0 * M_PI * ja / grid.L;
    k2 += k * k;
  }
  return std::sqrt(k2 + grid.m * grid.m);
}

EvolvedSnapshot free_snapshot(const CauchyData& data, double t) {
  data.validate();
  const GridSpec& grid = data.grid();
  const SpectralTransform& tr = transform_for(grid);
  const auto F0 = tr.forward(data.phi0.values);
  const auto F1 = tr.forward(data.phi1.values);
  const std::size_t S = tr.spectral_size();
  std::vector<std::complex<double>> Fv(S), Fd(S), Fdd(S);
  for (std::size_t i = 0; i < S; ++i) {
    const double w = tr.omega()[i];
    const double c = std::cos(w * t);
    const double s = std::sin(w * t);
    Fv[i] = c * F0[i] + (s / w) * F1[i];
    Fd[i] = -w * s * F0[i] + c * F1[i];
    Fdd[i] = -w * w * Fv[i];
  }
  EvolvedSnapshot out;
  out.t = t;
  out.value = FieldSnapshot(grid, tr.inverse(Fv));
  out.dvalue = FieldSnapshot(grid, tr.inverse(Fd));
  out.d2value = FieldSnapshot(grid, tr.inverse(Fdd));
  if (t == 0.0) {
    out.value.values = data.phi0.values;
    out.dvalue.values = data.phi1.values;
  }
  return out;
}

TimeSampledField free_field(const CauchyData& data, double T, double dt) {
  data.validate();
  const GridSpec& grid = data.grid();
  const TimeGrid tg = make_time_grid(T, dt);
  const SpectralTransform& tr = transform_for(grid);
  const auto F0 = tr.forward(data.phi0.values);
  const auto F1 = tr.forward(data.phi1.values);
  const std::size_t S = tr.spectral_size();

  TimeSampledField out;
  out.grid = grid;
  out.time = tg;
  out.values.resize(tg.count);
  out.dvalues.resize(tg.count);
  out.d2values.resize(tg.count);

  std::vector<std::complex<double>> Fv(S), Fd(S), Fdd(S);
  for (std::size_t jt = 0; jt < tg.count; ++jt) {
    const double t = static_cast<double>(jt) * dt;
    for (std::size_t i = 0; i < S; ++i) {
      const double w = tr.omega()[i];
      const double c = std::cos(w * t);
      const double s = std::sin(w * t);
      Fv[i] = c * F0[i] + (s / w) * F1[i];
      Fd[i] = -w * s * F0[i] + c * F1[i];
      Fdd[i] = -w * w * Fv[i];
    }
    out.values[jt] = tr.inverse(Fv);
    out.dvalues[jt] = tr.inverse(Fd);
    out.d2values[jt] = tr.inverse(Fdd);
  }
  out.values[0] = data.phi0.values;
  out.dvalues[0] = data.phi1.values;
  return out;
}

TimeSampledField solve_retarded(const TimeSampledField& source) {
  source.validate();
  const GridSpec& grid = source.grid;
  const SpectralTransform& tr = transform_for(grid);
  const std::size_t S = tr.spectral_size();
  const std::size_t count = source.sample_count();
  const double dt = source.time.dt;

  // Leading samples that are identically zero force exactly-zero output
  // through the first nonzero sample (the kernel vanishes at t = s).
  std::size_t zero_prefix = 0;
  while (zero_prefix < count) {
    bool all_zero = true;
    for (double v : source.values[zero_prefix])
      if (v != 0.0) {
        all_zero = false;
        break;
      }
    if (!all_zero) break;
    ++zero_prefix;
  }

  std::vector<std::vector<std::complex<double>>> Fs(count);
  for (std::size_t j = 0; j < count; ++j) Fs[j] = tr.forward(source.values[j]);

  TimeSampledField out;
  out.grid = grid;
  out.time = source.time;
  out.values.resize(count);
  out.dvalues.resize(count);
  out.d2values.resize(count);

  // Per-mode cumulative trapezoid sums C = int cos(w s) s_hat ds and
  // S = int sin(w s) s_hat ds, combined through the angle-difference
  // identity sin(w(t-s)) = sin(wt)cos(ws) - cos(wt)sin(ws).
  std::vector<std::complex<double>> C(S, 0.0), Sm(S, 0.0);
  std::vector<std::complex<double>> Fu(S), Fdu(S), Fddu(S);
  std::vector<double> cos_prev(S), sin_prev(S);
  for (std::size_t i = 0; i < S; ++i) {
    cos_prev[i] = 1.0;
    sin_prev[i] = 0.0;
  }
  for (std::size_t j = 0; j < count; ++j) {
    const double t = static_cast<double>(j) * dt;
    for (std::size_t i = 0; i < S; ++i) {
      const double w = tr.omega()[i];
      const double ct = std::cos(w * t);
      const double st = std::sin(w * t);
      if (j > 0) {
        C[i] += 0.5 * dt * (cos_prev[i] * Fs[j - 1][i] + ct * Fs[j][i]);
        Sm[i] += 0.5 * dt * (sin_prev[i] * Fs[j - 1][i] + st * Fs[j][i]);
      }
      cos_prev[i] = ct;
      sin_prev[i] = st;
      Fu[i] = -(st * C[i] - ct * Sm[i]) / w;
      Fdu[i] = -(ct * C[i] + st * Sm[i]);
      Fddu[i] = -Fs[j][i] - w * w * Fu[i];
    }
    if (j <= zero_prefix) {
      // The kernel vanishes at t = s, and the exact causal derivative is
      // also zero through the onset sample; the trapezoid endpoint term
      // would otherwise leak -dt/2 * source into d/dt there.
      out.values[j].assign(grid.sites(), 0.0);
      out.dvalues[j].assign(grid.sites(), 0.0);
    } else {
      out.values[j] = tr.inverse(Fu);
      out.dvalues[j] = tr.inverse(Fdu);
    }
    out.d2values[j] = tr.inverse(Fddu);
    for (double v : out.values[j])
      if (!std::isfinite(v)) throw DivergenceError("retarded solve produced non-finite values");
  }
  return out;
}

}  // namespace kgs
