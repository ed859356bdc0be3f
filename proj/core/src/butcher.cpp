#include "kgseries/butcher.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "kgseries/algebra_constant.hpp"
#include "kgseries/evolve.hpp"
#include "kgseries/field.hpp"
#include "kgseries/parallel.hpp"
#include "kgseries/spectral.hpp"

namespace kgs {

void SeriesConfig::validate() const {
  if (p < 2) throw ConfigError("nonlinearity exponent p must be >= 2");
  grid.validate();
  data.validate();
  if (data.grid() != grid) throw ShapeError("Cauchy data grid differs from series grid");
  make_time_grid(T, dt);
  if (!(q > grid.d / 2.0))
    throw ConfigError("Sobolev index q must exceed d/2 for the algebra property");
  if (max_order < 0) throw ConfigError("max_order must be >= 0");
  if (c_q < 0.0) throw ConfigError("algebra constant must be nonnegative");
  if (!std::isfinite(lambda)) throw ConfigError("lambda must be finite");
}

double convergence_threshold(int p, double m, double T, double c_q, double data_norm) {
  if (p < 2) throw ConfigError("nonlinearity exponent p must be >= 2");
  if (!(m > 0.0)) throw ConfigError("mass must be positive");
  if (!(c_q > 0.0)) throw ConfigError("algebra constant must be positive");
  if (T < 0.0 || data_norm < 0.0) throw ConfigError("T and data norm must be nonnegative");
  if (data_norm == 0.0) return std::numeric_limits<double>::infinity();
  const double M = std::max(m, 1.0 / m);
  const double radius = std::pow(p - 1.0, p - 1) /
                        (std::pow(static_cast<double>(p), p) * std::pow(c_q, p - 1) *
                         std::pow(M, 2.0 * (p - 1)));
  return radius / ((1.0 + M * T) * std::pow(data_norm, p - 1));
}

const CoefficientTable::Entry* CoefficientTable::find(const std::string& class_key) const {
  auto it = entries_.find(class_key);
  return it == entries_.end() ? nullptr : &it->second;
}

CoefficientTable::Entry& CoefficientTable::insert(std::string class_key,
                                                  TimeSampledField field) {
  auto [it, fresh] = entries_.emplace(std::move(class_key), Entry{std::move(field), {}});
  return it->second;
}

SeriesEngine::SeriesEngine(SeriesConfig cfg) : cfg_(std::move(cfg)) {
  cfg_.validate();
  data_norm_ =
      sobolev_norm(cfg_.data.phi0, cfg_.q + 1.0) + sobolev_norm(cfg_.data.phi1, cfg_.q);
  c_q_ = cfg_.c_q > 0.0 ? cfg_.c_q : estimate_algebra_constant(cfg_.grid, cfg_.q);
  table_.insert("o", free_field(cfg_.data, cfg_.T, cfg_.dt));
}

double SeriesEngine::threshold() const {
  return convergence_threshold(cfg_.p, cfg_.grid.m, cfg_.T, c_q_, data_norm_);
}

const std::vector<TreeClass>& SeriesEngine::classes(int order) {
  auto it = classes_.find(order);
  if (it == classes_.end())
    it = classes_.emplace(order, enumerate_classes(cfg_.p, order)).first;
  return it->second;
}

TimeSampledField SeriesEngine::compute_class(const PTree& rep) {
  std::vector<const TimeSampledField*> factors;
  factors.reserve(rep.decompose().size());
  for (const PTree& child : rep.decompose()) {
    const auto* entry = table_.find(child.key());
    if (!entry)
      throw RangeError("coefficient table is missing child class " + child.key());
    factors.push_back(&entry->field);
  }
  return solve_retarded(pointwise_product(factors, cfg_.dealias));
}

void SeriesEngine::ensure_order(int N) {
  for (int n = 1; n <= N; ++n) {
    const auto& cls = classes(n);
    std::vector<std::pair<std::string, const PTree*>> missing;
    for (const TreeClass& c : cls) {
      std::string key = c.rep.key();
      if (!table_.contains(key)) missing.emplace_back(std::move(key), &c.rep);
    }
    if (missing.empty()) continue;
    std::vector<TimeSampledField> computed(missing.size());
    parallel_for(missing.size(),
                 [&](std::size_t i) { computed[i] = compute_class(*missing[i].second); });
    for (std::size_t i = 0; i < missing.size(); ++i)
      table_.insert(std::move(missing[i].first), std::move(computed[i]));
  }
}

const TimeSampledField& SeriesEngine::coefficient(const PTree& b) {
  const PTree rep = commutative_rep(b);
  ensure_order(rep.order());
  const auto* entry = table_.find(rep.key());
  if (!entry) throw RangeError("coefficient table is missing class " + rep.key());
  return entry->field;
}

double SeriesEngine::coefficient_norm(const PTree& b) {
  const PTree rep = commutative_rep(b);
  ensure_order(rep.order());
  auto* entry = const_cast<CoefficientTable::Entry*>(table_.find(rep.key()));
  if (!entry) throw RangeError("coefficient table is missing class " + rep.key());
  if (!entry->triple_norm) entry->triple_norm = triple_norm(entry->field, cfg_.q);
  return *entry->triple_norm;
}

TimeSampledField SeriesEngine::partial_sum(int N) { return partial_sum(N, cfg_.lambda); }

TimeSampledField SeriesEngine::partial_sum(int N, double lambda) {
  if (N < 0) throw ConfigError("partial sum order must be >= 0");
  if (!std::isfinite(lambda)) throw ConfigError("lambda must be finite");
  ensure_order(N);
  TimeSampledField out = coefficient(PTree::leaf());
  for (int n = 1; n <= N; ++n) {
    const double weight_order = std::pow(lambda, n);
    for (const TreeClass& c : classes(n)) {
      const auto* entry = table_.find(c.rep.key());
      const double w = weight_order * static_cast<double>(c.multiplicity);
      const TimeSampledField& f = entry->field;
      for (std::size_t j = 0; j < out.sample_count(); ++j) {
        for (std::size_t s = 0; s < out.values[j].size(); ++s) {
          out.values[j][s] += w * f.values[j][s];
          out.dvalues[j][s] += w * f.dvalues[j][s];
          out.d2values[j][s] += w * f.d2values[j][s];
        }
      }
    }
  }
  return out;
}

BoundReport SeriesEngine::bound_check(const PTree& b) {
  const PTree rep = commutative_rep(b);
  BoundReport report;
  report.key = rep.key();
  report.order = rep.order();
  report.triple_norm = coefficient_norm(rep);

  const double m = cfg_.grid.m;
  const double M = std::max(m, 1.0 / m);
  const double base = M * M * data_norm_;
  const double step = std::pow(c_q_, cfg_.p - 1) * (1.0 + M * cfg_.T);

  if (rep.is_leaf()) {
    report.recursion_rhs = base;
  } else {
    double prod = 1.0;
    for (const PTree& child : rep.decompose()) prod *= coefficient_norm(child);
    report.recursion_rhs = step * prod;
  }
  report.closed_rhs = std::pow(step, rep.order()) *
                      std::pow(base, rep.order() * (cfg_.p - 1) + 1);
  report.recursion_pass = report.triple_norm <= report.recursion_rhs;
  report.closed_pass = report.triple_norm <= report.closed_rhs;
  return report;
}

namespace {

TimeSampledField compute_uncached_rec(const SeriesConfig& cfg, const PTree& rep) {
  if (rep.is_leaf()) return free_field(cfg.data, cfg.T, cfg.dt);
  std::vector<TimeSampledField> children;
  children.reserve(rep.decompose().size());
  for (const PTree& child : rep.decompose())
    children.push_back(compute_uncached_rec(cfg, child));
  std::vector<const TimeSampledField*> factors;
  for (const auto& c : children) factors.push_back(&c);
  return solve_retarded(pointwise_product(factors, cfg.dealias));
}

}  // namespace

TimeSampledField compute_coefficient_uncached(const SeriesConfig& cfg, const PTree& b) {
  cfg.validate();
  return compute_uncached_rec(cfg, commutative_rep(b));
}

TimeSampledField residual_field(const TimeSampledField& f, double lambda, int p,
                                bool dealias) {
  f.validate();
  if (f.sample_count() < 3)
    throw ResolutionError("residual needs at least 3 time samples, got " +
                          std::to_string(f.sample_count()));
  const SpectralTransform& tr = transform_for(f.grid);
  const std::size_t S = tr.spectral_size();
  const std::size_t count = f.sample_count();
  const std::size_t sites = f.grid.sites();
  const long double inv_dt2 =
      1.0L / (static_cast<long double>(f.time.dt) * static_cast<long double>(f.time.dt));

  TimeSampledField out;
  out.grid = f.grid;
  out.time = f.time;
  out.values.assign(count, std::vector<double>(sites, 0.0));

  std::vector<std::complex<double>> D(S);
  std::vector<double> diff2(sites);
  for (std::size_t j = 1; j + 1 < count; ++j) {
    // The second difference cancels catastrophically at fine dt, so it is
    // taken on the stored samples in extended precision (the samples are
    // exact in long double); the result is small and rounds relatively.
    for (std::size_t s = 0; s < sites; ++s) {
      const long double a = f.values[j + 1][s];
      const long double b = f.values[j][s];
      const long double c = f.values[j - 1][s];
      diff2[s] = static_cast<double>((a - 2.0L * b + c) * inv_dt2);
    }
    const std::vector<std::complex<double>> F = tr.forward(f.values[j]);
    for (std::size_t i = 0; i < S; ++i) {
      const double w2 = tr.omega()[i] * tr.omega()[i];
      D[i] = w2 * F[i];
    }
    out.values[j] = tr.inverse(D);
    for (std::size_t s = 0; s < sites; ++s) out.values[j][s] += diff2[s];
    if (lambda != 0.0) {
      FieldSnapshot snap(f.grid, f.values[j]);
      std::vector<const FieldSnapshot*> factors(static_cast<std::size_t>(p), &snap);
      const FieldSnapshot power = pointwise_product(factors, dealias);
      for (std::size_t s = 0; s < out.values[j].size(); ++s)
        out.values[j][s] += lambda * power.values[s];
    }
  }
  return out;
}

double residual(const TimeSampledField& f, double q, double lambda, int p, bool dealias) {
  return max_interior_sobolev(residual_field(f, lambda, p, dealias), q - 1.0);
}

double max_interior_sobolev(const TimeSampledField& f, double s) {
  f.validate();
  if (f.sample_count() < 3)
    throw ResolutionError("interior norm needs at least 3 time samples");
  double best = 0.0;
  for (std::size_t j = 1; j + 1 < f.sample_count(); ++j)
    best = std::max(best, sobolev_norm(FieldSnapshot(f.grid, f.values[j]), s));
  return best;
}

TimeSampledField subtract(const TimeSampledField& a, const TimeSampledField& b) {
  if (a.grid != b.grid || a.sample_count() != b.sample_count() || a.time.dt != b.time.dt)
    throw ShapeError("subtraction operands live on different sample grids");
  TimeSampledField out;
  out.grid = a.grid;
  out.time = a.time;
  out.values = a.values;
  for (std::size_t j = 0; j < out.values.size(); ++j)
    for (std::size_t s = 0; s < out.values[j].size(); ++s) out.values[j][s] -= b.values[j][s];
  return out;
}

}  // namespace kgs
