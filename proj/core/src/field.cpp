#include "kgseries/field.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "kgseries/spectral.hpp"

namespace kgs {

double sobolev_norm_spectral(const std::vector<std::complex<double>>& F,
                             const GridSpec& grid, double q) {
  const SpectralTransform& tr = transform_for(grid);
  const double inv_sites = 1.0 / static_cast<double>(grid.sites());
  double acc = 0.0;
  for (std::size_t i = 0; i < tr.spectral_size(); ++i) {
    const double c2 = std::norm(F[i]) * inv_sites * inv_sites;
    acc += tr.parseval_weight()[i] * std::pow(1.0 + tr.k2()[i], q) * c2;
  }
  return std::sqrt(grid.volume() * acc);
}

double sobolev_norm(const FieldSnapshot& f, double q) {
  f.validate();
  return sobolev_norm_spectral(transform_for(f.grid).forward(f.values), f.grid, q);
}

namespace {

double snapshot_norm(const GridSpec& grid, const std::vector<double>& values, double q) {
  return sobolev_norm_spectral(transform_for(grid).forward(values), grid, q);
}

// Second-order differences for missing derivative tracks.
std::vector<double> diff_track(const TimeSampledField& f, std::size_t j) {
  const auto& v = f.values;
  const double dt = f.time.dt;
  const std::size_t last = v.size() - 1;
  std::vector<double> out(f.grid.sites());
  if (j == 0) {
    for (std::size_t i = 0; i < out.size(); ++i)
      out[i] = (-3.0 * v[0][i] + 4.0 * v[1][i] - v[2][i]) / (2.0 * dt);
  } else if (j == last) {
    for (std::size_t i = 0; i < out.size(); ++i)
      out[i] = (3.0 * v[last][i] - 4.0 * v[last - 1][i] + v[last - 2][i]) / (2.0 * dt);
  } else {
    for (std::size_t i = 0; i < out.size(); ++i)
      out[i] = (v[j + 1][i] - v[j - 1][i]) / (2.0 * dt);
  }
  return out;
}

std::vector<double> diff2_track(const TimeSampledField& f, std::size_t j) {
  // Interior samples only; callers clamp j to [1, last-1].
  const auto& v = f.values;
  const double dt2 = f.time.dt * f.time.dt;
  std::vector<double> out(f.grid.sites());
  for (std::size_t i = 0; i < out.size(); ++i)
    out[i] = (v[j + 1][i] - 2.0 * v[j][i] + v[j - 1][i]) / dt2;
  return out;
}

}  // namespace

double triple_norm(const TimeSampledField& f, double q) {
  f.validate();
  const std::size_t count = f.sample_count();
  const bool need_diff = !f.has_dvalues() || !f.has_d2values();
  if (need_diff && count < 3)
    throw ResolutionError("triple norm needs at least 3 time samples to difference, got " +
                          std::to_string(count));
  double best = 0.0;
  for (std::size_t j = 0; j < count; ++j) {
    best = std::max(best, snapshot_norm(f.grid, f.values[j], q));
    if (f.has_dvalues()) {
      best = std::max(best, snapshot_norm(f.grid, f.dvalues[j], q));
    } else {
      best = std::max(best, snapshot_norm(f.grid, diff_track(f, j), q));
    }
    if (f.has_d2values()) {
      best = std::max(best, snapshot_norm(f.grid, f.d2values[j], q - 1.0));
    } else if (j >= 1 && j + 1 < count) {
      best = std::max(best, snapshot_norm(f.grid, diff2_track(f, j), q - 1.0));
    }
  }
  return best;
}

namespace {

void check_product_finite(const std::vector<double>& v) {
  for (double x : v)
    if (!std::isfinite(x))
      throw DivergenceError("pointwise product produced non-finite values");
}

// Padded grid used for alias-free products of p factors.
GridSpec padded_grid(const GridSpec& g, std::size_t p) {
  GridSpec fine = g;
  const double factor = (static_cast<double>(p) + 1.0) / 2.0;
  int n_pad = static_cast<int>(std::ceil(g.n * factor));
  if (n_pad % 2 != 0) ++n_pad;
  fine.n = n_pad;
  return fine;
}

std::vector<double> dealiased_product_values(const GridSpec& grid,
                                             const std::vector<const std::vector<double>*>& factors) {
  const SpectralTransform& base = transform_for(grid);
  const GridSpec fine_grid = padded_grid(grid, factors.size());
  const SpectralTransform& fine = transform_for(fine_grid);
  const int n = grid.n;
  const int n_pad = fine_grid.n;
  const double up = std::pow(static_cast<double>(n_pad) / n, grid.d);

  // Stored-index embedding map base -> fine (Nyquist planes dropped).
  std::vector<std::ptrdiff_t> embed(base.spectral_size(), -1);
  for (std::size_t i = 0; i < base.spectral_size(); ++i) {
    bool nyquist = false;
    std::size_t fine_idx = 0;
    for (int a = 0; a < grid.d; ++a) {
      const int mode = base.mode_index(a)[i];
      if (mode == n / 2 || mode == -n / 2) {
        nyquist = true;
        break;
      }
      const int extent = (a == grid.d - 1) ? (n_pad / 2 + 1) : n_pad;
      const int j = mode >= 0 ? mode : mode + n_pad;
      fine_idx = fine_idx * static_cast<std::size_t>(extent) + static_cast<std::size_t>(j);
    }
    if (!nyquist) embed[i] = static_cast<std::ptrdiff_t>(fine_idx);
  }

  std::vector<double> prod(fine_grid.sites(), 1.0);
  std::vector<std::complex<double>> F(base.spectral_size());
  std::vector<std::complex<double>> Ff(fine.spectral_size());
  std::vector<double> fine_vals(fine_grid.sites());
  for (const auto* vals : factors) {
    base.forward(vals->data(), F.data());
    std::fill(Ff.begin(), Ff.end(), std::complex<double>(0.0, 0.0));
    for (std::size_t i = 0; i < base.spectral_size(); ++i)
      if (embed[i] >= 0) Ff[static_cast<std::size_t>(embed[i])] = F[i] * up;
    fine.inverse(Ff.data(), fine_vals.data());
    for (std::size_t s = 0; s < prod.size(); ++s) prod[s] *= fine_vals[s];
  }

  fine.forward(prod.data(), Ff.data());
  const double down = 1.0 / up;
  std::fill(F.begin(), F.end(), std::complex<double>(0.0, 0.0));
  for (std::size_t i = 0; i < base.spectral_size(); ++i)
    if (embed[i] >= 0) F[i] = Ff[static_cast<std::size_t>(embed[i])] * down;
  return base.inverse(F);
}

}  // namespace

FieldSnapshot pointwise_product(const std::vector<const FieldSnapshot*>& factors,
                                bool dealias) {
  if (factors.empty()) throw ConfigError("pointwise product needs at least one factor");
  const GridSpec& grid = factors.front()->grid;
  for (const auto* f : factors) {
    f->validate();
    if (f->grid != grid) throw ShapeError("product factors live on different grids");
  }
  FieldSnapshot out(grid);
  if (dealias) {
    std::vector<const std::vector<double>*> vals;
    vals.reserve(factors.size());
    for (const auto* f : factors) vals.push_back(&f->values);
    out.values = dealiased_product_values(grid, vals);
  } else {
    out.values.assign(grid.sites(), 1.0);
    for (const auto* f : factors)
      for (std::size_t i = 0; i < out.values.size(); ++i) out.values[i] *= f->values[i];
  }
  check_product_finite(out.values);
  return out;
}

TimeSampledField pointwise_product(const std::vector<const TimeSampledField*>& factors,
                                   bool dealias) {
  if (factors.empty()) throw ConfigError("pointwise product needs at least one factor");
  const TimeSampledField& first = *factors.front();
  for (const auto* f : factors) {
    f->validate();
    if (f->grid != first.grid) throw ShapeError("product factors live on different grids");
    if (f->sample_count() != first.sample_count() || f->time.dt != first.time.dt)
      throw ShapeError("product factors sampled on different time grids");
  }
  TimeSampledField out;
  out.grid = first.grid;
  out.time = first.time;
  out.values.resize(first.sample_count());
  for (std::size_t j = 0; j < first.sample_count(); ++j) {
    if (dealias) {
      std::vector<const std::vector<double>*> vals;
      vals.reserve(factors.size());
      for (const auto* f : factors) vals.push_back(&f->values[j]);
      out.values[j] = dealiased_product_values(first.grid, vals);
    } else {
      out.values[j].assign(first.grid.sites(), 1.0);
      for (const auto* f : factors)
        for (std::size_t i = 0; i < out.values[j].size(); ++i)
          out.values[j][i] *= f->values[j][i];
    }
    check_product_finite(out.values[j]);
  }
  return out;
}

double max_abs(const FieldSnapshot& f) {
  double best = 0.0;
  for (double x : f.values) best = std::max(best, std::abs(x));
  return best;
}

double max_abs(const TimeSampledField& f) {
  double best = 0.0;
  for (const auto& sample : f.values)
    for (double x : sample) best = std::max(best, std::abs(x));
  return best;
}

namespace {
std::string fmt_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}
}  // namespace

void write_snapshot_csv(const FieldSnapshot& f, double t, std::ostream& os) {
  f.validate();
  os << f.grid.d << ',' << f.grid.n << ',' << fmt_double(f.grid.L) << ','
     << fmt_double(f.grid.m) << ',' << fmt_double(t) << '\n';
  for (double v : f.values) os << fmt_double(v) << '\n';
}

void write_snapshot_csv(const FieldSnapshot& f, double t, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw FormatError("cannot open '" + path + "' for writing");
  write_snapshot_csv(f, t, os);
}

SnapshotWithTime read_snapshot_csv(std::istream& is) {
  std::string header;
  if (!std::getline(is, header)) throw FormatError("snapshot stream is empty");
  std::istringstream hs(header);
  GridSpec grid;
  double t = 0.0;
  char c1, c2, c3, c4;
  if (!(hs >> grid.d >> c1 >> grid.n >> c2 >> grid.L >> c3 >> grid.m >> c4 >> t) ||
      c1 != ',' || c2 != ',' || c3 != ',' || c4 != ',')
    throw FormatError("malformed snapshot header: '" + header + "'");
  grid.validate();
  FieldSnapshot f(grid);
  std::string line;
  std::size_t i = 0;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    if (i >= f.values.size()) throw FormatError("snapshot carries more values than sites");
    try {
      f.values[i] = std::stod(line);
    } catch (const std::exception&) {
      throw FormatError("malformed snapshot value: '" + line + "'");
    }
    ++i;
  }
  if (i != f.values.size())
    throw FormatError("snapshot carries " + std::to_string(i) + " values for " +
                      std::to_string(f.values.size()) + " sites");
  return SnapshotWithTime{std::move(f), t};
}

SnapshotWithTime read_snapshot_csv(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw FormatError("cannot open '" + path + "' for reading");
  return read_snapshot_csv(is);
}

}  // namespace kgs
