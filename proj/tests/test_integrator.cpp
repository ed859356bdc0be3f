#include <cmath>
#include <string>
#include <vector>

#include "doctest.h"
#include "kgseries/errors.hpp"
#include "kgseries/evolve.hpp"
#include "kgseries/field.hpp"
#include "kgseries/fit.hpp"
#include "kgseries/initial_data.hpp"
#include "kgseries/integrator.hpp"

using namespace kgs;

namespace {

GridSpec grid1d(int n, double L = 2.0 * M_PI, double m = 1.0) {
  GridSpec g;
  g.d = 1;
  g.n = n;
  g.L = L;
  g.m = m;
  return g;
}

double final_diff(const TimeSampledField& a, const TimeSampledField& b) {
  double e = 0.0;
  for (std::size_t i = 0; i < a.values.back().size(); ++i)
    e = std::max(e, std::abs(a.values.back()[i] - b.values.back()[i]));
  return e;
}

}  // namespace

TEST_CASE("scheme names round trip") {
  CHECK(parse_scheme("strang") == Scheme::strang);
  CHECK(parse_scheme("leapfrog") == Scheme::leapfrog);
  CHECK(scheme_name(Scheme::strang) == "strang");
  CHECK_THROWS_AS((void)parse_scheme("rk4"), FormatError);
}

TEST_CASE("config validation") {
  GridSpec g = grid1d(32);
  IntegratorConfig cfg;
  cfg.T = 1.0;
  cfg.dt = 1e-2;
  CHECK_NOTHROW(cfg.validate(g));

  IntegratorConfig bad = cfg;
  bad.dt = 0.3;  // does not divide T
  CHECK_THROWS_AS(bad.validate(g), ConfigError);

  bad = cfg;
  bad.record_every = 7;  // does not divide 100 steps
  CHECK_THROWS_AS(bad.validate(g), ConfigError);

  // leapfrog linear stability: needs dt * omega_max < 2, omega_max ~ 16.03
  bad = cfg;
  bad.scheme = Scheme::leapfrog;
  bad.dt = 0.2;
  bad.T = 1.0;
  CHECK_THROWS_AS(bad.validate(g), ConfigError);
  bad.dt = 0.1;
  CHECK_NOTHROW(bad.validate(g));
}

TEST_CASE("lambda = 0: the split propagator is the free flow") {
  GridSpec g = grid1d(32);
  CauchyData data{band_limited(g, 51, 4, 1.0), band_limited(g, 52, 4, 1.0)};
  IntegratorConfig cfg;
  cfg.scheme = Scheme::strang;
  cfg.lambda = 0.0;
  cfg.T = 1.0;
  cfg.dt = 1e-2;

  TimeSampledField numeric = integrate(data, cfg);
  TimeSampledField exact = free_field(data, cfg.T, cfg.dt);
  double e = 0.0;
  for (std::size_t j = 0; j < numeric.sample_count(); ++j) {
    for (std::size_t i = 0; i < g.sites(); ++i) {
      e = std::max(e, std::abs(numeric.values[j][i] - exact.values[j][i]));
      e = std::max(e, std::abs(numeric.dvalues[j][i] - exact.dvalues[j][i]));
    }
  }
  CHECK(e < 1e-11);
}

TEST_CASE("energy closed forms") {
  GridSpec g = grid1d(32, 2.0 * M_PI, 1.5);
  const double A = 0.7;
  const double k = 3.0;  // mode 3 on L = 2*pi
  FieldSnapshot phi = single_mode(g, {3}, A);
  FieldSnapshot pi(g);

  // E = A^2 V (k^2 + m^2) / 4 for a pure cosine at rest, lambda = 0
  const double expect = A * A * g.volume() * (k * k + g.m * g.m) / 4.0;
  CHECK(field_energy(phi, pi, 0.0, 2) == doctest::Approx(expect).epsilon(1e-12));

  // cubic site sum of cos^3 vanishes on the lattice, so lambda does not
  // shift the energy of a pure mode at p = 2
  CHECK(field_energy(phi, pi, 0.4, 2) == doctest::Approx(expect).epsilon(1e-12));

  // p = 3 adds lambda A^4 (3/8) V / 4
  const double quartic = 0.4 * A * A * A * A * (3.0 / 8.0) * g.volume() / 4.0;
  CHECK(field_energy(phi, pi, 0.4, 3) == doctest::Approx(expect + quartic).epsilon(1e-12));
}

TEST_CASE("energy is conserved along both schemes") {
  GridSpec g = grid1d(32);
  CauchyData data{band_limited(g, 61, 3, 0.5), band_limited(g, 62, 3, 0.5)};
  for (Scheme scheme : {Scheme::strang, Scheme::leapfrog}) {
    IntegratorConfig cfg;
    cfg.scheme = scheme;
    cfg.lambda = 0.25;
    cfg.T = 1.0;
    cfg.dt = 1e-3;
    cfg.record_every = 50;
    TimeSampledField traj = integrate(data, cfg);
    std::vector<double> energy = energy_series(traj, cfg.lambda, cfg.p);
    double drift = 0.0;
    for (double e : energy) drift = std::max(drift, std::abs(e - energy[0]));
    CHECK(drift / std::abs(energy[0]) < 1e-5);
  }
}

TEST_CASE("self-convergence at second order") {
  GridSpec g = grid1d(16);
  CauchyData data{band_limited(g, 71, 3, 0.8), band_limited(g, 72, 3, 0.8)};
  for (Scheme scheme : {Scheme::strang, Scheme::leapfrog}) {
    IntegratorConfig ref_cfg;
    ref_cfg.scheme = scheme;
    ref_cfg.lambda = 0.5;
    ref_cfg.T = 0.5;
    ref_cfg.dt = 1.0 / 1024.0;
    TimeSampledField ref = integrate(data, ref_cfg);

    std::vector<double> dts, errs;
    for (double dt : {1.0 / 64.0, 1.0 / 128.0, 1.0 / 256.0}) {
      IntegratorConfig cfg = ref_cfg;
      cfg.dt = dt;
      errs.push_back(final_diff(integrate(data, cfg), ref));
      dts.push_back(dt);
    }
    LineFit fit = fit_loglog(dts, errs, 0.0);
    CHECK(fit.slope == doctest::Approx(2.0).epsilon(0.1));
  }
}

TEST_CASE("leapfrog retraces its path under velocity reversal") {
  GridSpec g = grid1d(32);
  CauchyData data{band_limited(g, 81, 3, 0.7), band_limited(g, 82, 3, 0.7)};
  IntegratorConfig cfg;
  cfg.scheme = Scheme::leapfrog;
  cfg.lambda = 0.3;
  cfg.T = 0.5;
  cfg.dt = 1.0 / 256.0;

  TimeSampledField fwd = integrate(data, cfg);
  CauchyData turned{FieldSnapshot{g, fwd.values.back()}, FieldSnapshot{g, fwd.dvalues.back()}};
  for (double& v : turned.phi1.values) v = -v;
  TimeSampledField back = integrate(turned, cfg);

  double e = 0.0;
  for (std::size_t i = 0; i < g.sites(); ++i) {
    e = std::max(e, std::abs(back.values.back()[i] - data.phi0.values[i]));
    e = std::max(e, std::abs(back.dvalues.back()[i] + data.phi1.values[i]));
  }
  CHECK(e < 1e-10);
}

TEST_CASE("subsampled recording reproduces the dense trajectory samples") {
  GridSpec g = grid1d(16);
  CauchyData data{band_limited(g, 91, 3, 0.6), band_limited(g, 92, 3, 0.6)};
  IntegratorConfig dense;
  dense.lambda = 0.2;
  dense.T = 0.25;
  dense.dt = 1.0 / 128.0;
  IntegratorConfig sparse = dense;
  sparse.record_every = 8;

  TimeSampledField a = integrate(data, dense);
  TimeSampledField b = integrate(data, sparse);
  REQUIRE(b.sample_count() == (a.sample_count() - 1) / 8 + 1);
  for (std::size_t j = 0; j < b.sample_count(); ++j) {
    REQUIRE(b.values[j] == a.values[8 * j]);    // bitwise: same step arithmetic
    REQUIRE(b.dvalues[j] == a.dvalues[8 * j]);
  }
}

TEST_CASE("blow-up raises a divergence error naming the scheme") {
  GridSpec g = grid1d(16);
  FieldSnapshot big = gaussian_bump(g, 0.5, 0.8, 4.0);
  CauchyData data{big, FieldSnapshot(g)};
  IntegratorConfig cfg;
  cfg.scheme = Scheme::strang;
  cfg.lambda = -80.0;  // focusing nonlinearity, guaranteed escape
  cfg.T = 4.0;
  cfg.dt = 1e-2;
  cfg.blowup_factor = 1e4;
  try {
    (void)integrate(data, cfg);
    FAIL("expected DivergenceError");
  } catch (const DivergenceError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("strang") != std::string::npos);
    CHECK(msg.find("dt=") != std::string::npos);
  }
}

TEST_CASE("energy series requires the derivative track") {
  GridSpec g = grid1d(16);
  CauchyData data{band_limited(g, 93, 2, 0.5), FieldSnapshot(g)};
  TimeSampledField traj = integrate(data, IntegratorConfig{.T = 0.25, .dt = 1.0 / 32.0});
  traj.dvalues.clear();
  CHECK_THROWS_AS((void)energy_series(traj, 0.0, 2), ShapeError);
}
