#include "kgseries/initial_data.hpp"

#include <cmath>
#include <cstdlib>
#include <map>
#include <sstream>

#include "kgseries/field.hpp"

namespace kgs {

namespace {

// splitmix64: tiny deterministic generator, stable across platforms.
struct SplitMix64 {
  std::uint64_t state;
  explicit SplitMix64(std::uint64_t seed) : state(seed) {}
  std::uint64_t next() {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }
  double uniform() {  // in [0, 1)
    return static_cast<double>(next() >> 11) * 0x1.0p-53;
  }
  double symmetric() { return 2.0 * uniform() - 1.0; }  // in [-1, 1)
};

double torus_dist(double x, double c, double L) {
  double r = std::fmod(std::abs(x - c), L);
  return std::min(r, L - r);
}

}  // namespace

FieldSnapshot gaussian_bump(const GridSpec& grid, double center, double sigma, double amp) {
  grid.validate();
  if (!(sigma > 0.0)) throw ConfigError("gaussian sigma must be positive");
  FieldSnapshot f(grid);
  const double h = grid.spacing();
  const double c = center * grid.L;
  std::vector<int> idx(grid.d, 0);
  for (std::size_t s = 0; s < f.values.size(); ++s) {
    std::size_t rem = s;
    double r2 = 0.0;
    for (int a = grid.d - 1; a >= 0; --a) {
      const int i = static_cast<int>(rem % grid.n);
      rem /= grid.n;
      const double dist = torus_dist(i * h, c, grid.L);
      r2 += dist * dist;
    }
    f.values[s] = amp * std::exp(-r2 / (2.0 * sigma * sigma));
  }
  return f;
}

FieldSnapshot single_mode(const GridSpec& grid, const std::vector<int>& j, double amp,
                          double phase) {
  grid.validate();
  if (static_cast<int>(j.size()) != grid.d)
    throw ShapeError("mode index carries " + std::to_string(j.size()) +
                     " components for a " + std::to_string(grid.d) + "-d grid");
  for (int ja : j)
    if (ja < -grid.n / 2 || ja > grid.n / 2 - 1)
      throw RangeError("mode index " + std::to_string(ja) + " outside {-n/2,...,n/2-1}");
  FieldSnapshot f(grid);
  const double h = grid.spacing();
  for (std::size_t s = 0; s < f.values.size(); ++s) {
    std::size_t rem = s;
    double kx = 0.0;
    for (int a = grid.d - 1; a >= 0; --a) {
      const int i = static_cast<int>(rem % grid.n);
      rem /= grid.n;
      kx += (2.0 * M_PI * j[a] / grid.L) * (i * h);
    }
    f.values[s] = amp * std::cos(kx + phase);
  }
  return f;
}

FieldSnapshot band_limited(const GridSpec& grid, std::uint64_t seed, int band, double amp) {
  grid.validate();
  if (band < 0 || band > grid.n / 2 - 1)
    throw ConfigError("band must lie in [0, n/2-1], got " + std::to_string(band));
  SplitMix64 rng(seed);
  FieldSnapshot f(grid);
  // Constant offset plus one seeded cosine per retained mode, axis-major so
  // the draw order is reproducible.
  const double offset = amp * rng.symmetric();
  for (double& v : f.values) v = offset;
  std::vector<int> j(grid.d, -band);
  while (true) {
    // A cosine with free phase spans the +-j pair, so draw only for the
    // canonical half (first nonzero component positive).
    bool canonical = false;
    for (int a = 0; a < grid.d; ++a) {
      if (j[a] != 0) {
        canonical = j[a] > 0;
        break;
      }
    }
    if (canonical) {
      const double a_j = amp * rng.symmetric();
      const double ph = M_PI * rng.symmetric();
      FieldSnapshot mode = single_mode(grid, j, a_j, ph);
      for (std::size_t s = 0; s < f.values.size(); ++s) f.values[s] += mode.values[s];
    }
    int a = grid.d;
    while (a > 0) {
      --a;
      if (++j[a] <= band) break;
      j[a] = -band;
      if (a == 0) return f;
    }
  }
}

namespace {

std::map<std::string, std::string> parse_fields(const std::string& body) {
  std::map<std::string, std::string> out;
  std::istringstream is(body);
  std::string item;
  while (std::getline(is, item, ',')) {
    const auto eq = item.find('=');
    if (eq == std::string::npos)
      throw FormatError("data spec field '" + item + "' is not key=value");
    out[item.substr(0, eq)] = item.substr(eq + 1);
  }
  return out;
}

double field_as_double(const std::map<std::string, std::string>& fields,
                       const std::string& key, double fallback) {
  auto it = fields.find(key);
  if (it == fields.end()) return fallback;
  char* end = nullptr;
  const double v = std::strtod(it->second.c_str(), &end);
  if (end == it->second.c_str() || *end != '\0')
    throw FormatError("data spec field " + key + "='" + it->second + "' is not a number");
  return v;
}

}  // namespace

FieldSnapshot parse_data_spec(const GridSpec& grid, const std::string& spec) {
  const auto colon = spec.find(':');
  const std::string shape = spec.substr(0, colon);
  const std::string body = colon == std::string::npos ? "" : spec.substr(colon + 1);
  if (shape == "zero") {
    if (!body.empty()) throw FormatError("'zero' takes no fields");
    return FieldSnapshot(grid);
  }
  const auto fields = parse_fields(body);
  if (shape == "gaussian") {
    return gaussian_bump(grid, field_as_double(fields, "center", 0.5),
                         field_as_double(fields, "sigma", 0.1 * grid.L),
                         field_as_double(fields, "amp", 1.0));
  }
  if (shape == "mode") {
    std::vector<int> j;
    auto it = fields.find("j");
    std::string jspec = it == fields.end() ? "1" : it->second;
    std::istringstream js(jspec);
    std::string part;
    while (std::getline(js, part, '/')) {
      try {
        j.push_back(std::stoi(part));
      } catch (const std::exception&) {
        throw FormatError("mode index '" + part + "' is not an integer");
      }
    }
    return single_mode(grid, j, field_as_double(fields, "amp", 1.0),
                       field_as_double(fields, "phase", 0.0));
  }
  if (shape == "bandlimited") {
    const double seed = field_as_double(fields, "seed", 1.0);
    const double band = field_as_double(fields, "band", 2.0);
    return band_limited(grid, static_cast<std::uint64_t>(seed), static_cast<int>(band),
                        field_as_double(fields, "amp", 1.0));
  }
  throw FormatError("unknown data shape '" + shape + "'");
}

CauchyData make_cauchy_data(const GridSpec& grid, const std::string& phi0_spec,
                            const std::string& phi1_spec, double q, double normalize) {
  CauchyData data;
  data.phi0 = parse_data_spec(grid, phi0_spec);
  data.phi1 = parse_data_spec(grid, phi1_spec);
  if (normalize > 0.0) {
    const double norm = sobolev_norm(data.phi0, q + 1.0) + sobolev_norm(data.phi1, q);
    if (norm == 0.0) throw ConfigError("cannot normalize identically zero Cauchy data");
    const double scale = normalize / norm;
    for (double& v : data.phi0.values) v *= scale;
    for (double& v : data.phi1.values) v *= scale;
  }
  return data;
}

}  // namespace kgs
