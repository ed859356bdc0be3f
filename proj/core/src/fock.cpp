#include "kgseries/fock.hpp"

#include <cmath>
#include <cstdint>
#include <limits>
#include <string>

#include "kgseries/errors.hpp"
#include "kgseries/fit.hpp"

namespace kgs {

namespace {

constexpr std::size_t kMaxFockDim = 4096;
constexpr std::complex<double> kI{0.0, 1.0};

std::size_t checked_dim(int n_max, int modes) {
  std::size_t dim = 1;
  for (int i = 0; i < modes; ++i) {
    dim *= static_cast<std::size_t>(n_max) + 1;
    if (dim > kMaxFockDim) {
      throw ConfigError("Fock dimension (n_max+1)^modes exceeds the supported limit " +
                        std::to_string(kMaxFockDim));
    }
  }
  return dim;
}

ModeOperator matrix_power(const ModeOperator& A, int e) {
  ModeOperator out = A;
  for (int i = 1; i < e; ++i) out = out * A;
  return out;
}

std::size_t step_count(double t, double t0, double dtau) {
  if (!(dtau > 0.0)) throw ConfigError("dtau must be positive");
  if (t < t0) throw ConfigError("evaluation time precedes t0");
  double span = t - t0;
  auto steps = static_cast<std::size_t>(std::llround(span / dtau));
  if (std::abs(static_cast<double>(steps) * dtau - span) >
      1e-9 * std::max(1.0, std::abs(span))) {
    throw ConfigError("t - t0 must be an integer multiple of dtau");
  }
  return steps;
}

}  // namespace

void QuantumLatticeSpec::validate() const {
  if (d != 1) throw ConfigError("quantum lattice supports d = 1 only");
  if (modes < 1 || modes % 2 == 0) {
    throw ConfigError("modes must be a positive odd count (symmetric wavevector set)");
  }
  if (n_max < 1) throw ConfigError("n_max must be >= 1");
  if (!(L > 0.0)) throw ConfigError("box length L must be positive");
  if (!(m > 0.0)) throw ConfigError("mass m must be positive");
  if (!std::isfinite(t0)) throw ConfigError("t0 must be finite");
  (void)checked_dim(n_max, modes);
}

std::size_t QuantumLatticeSpec::dim() const { return checked_dim(n_max, modes); }

double QuantumLatticeSpec::wavenumber(int mi) const {
  return 2.0 * M_PI * static_cast<double>(mode_j(mi)) / L;
}

double QuantumLatticeSpec::omega(int mi) const {
  double k = wavenumber(mi);
  return std::sqrt(k * k + m * m);
}

bool QuantumLatticeSpec::operator==(const QuantumLatticeSpec& o) const {
  return d == o.d && modes == o.modes && n_max == o.n_max && L == o.L && m == o.m &&
         t0 == o.t0;
}

ModeOperator ladder(const QuantumLatticeSpec& spec, int j, Ladder kind) {
  spec.validate();
  if (j < -spec.half_band() || j > spec.half_band()) {
    throw RangeError("mode index j=" + std::to_string(j) +
                     " outside the retained set |j| <= " +
                     std::to_string(spec.half_band()));
  }
  int mi = j + spec.half_band();
  std::size_t dim = spec.dim();
  std::size_t stride = 1;
  for (int i = 0; i < mi; ++i) stride *= static_cast<std::size_t>(spec.n_max) + 1;

  ModeOperator A = ModeOperator::Zero(static_cast<Eigen::Index>(dim),
                                      static_cast<Eigen::Index>(dim));
  for (std::size_t s = 0; s < dim; ++s) {
    auto occ = static_cast<int>((s / stride) % (static_cast<std::size_t>(spec.n_max) + 1));
    if (kind == Ladder::annihilate) {
      if (occ > 0) {
        A(static_cast<Eigen::Index>(s - stride), static_cast<Eigen::Index>(s)) =
            std::sqrt(static_cast<double>(occ));
      }
    } else {
      if (occ < spec.n_max) {
        A(static_cast<Eigen::Index>(s + stride), static_cast<Eigen::Index>(s)) =
            std::sqrt(static_cast<double>(occ) + 1.0);
      }
    }
  }
  return A;
}

ModeOperator number_operator(const QuantumLatticeSpec& spec) {
  spec.validate();
  std::size_t dim = spec.dim();
  ModeOperator N = ModeOperator::Zero(static_cast<Eigen::Index>(dim),
                                      static_cast<Eigen::Index>(dim));
  for (std::size_t s = 0; s < dim; ++s) {
    std::size_t rest = s;
    int total = 0;
    for (int mi = 0; mi < spec.modes; ++mi) {
      total += static_cast<int>(rest % (static_cast<std::size_t>(spec.n_max) + 1));
      rest /= static_cast<std::size_t>(spec.n_max) + 1;
    }
    N(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(s)) = total;
  }
  return N;
}

ModeOperator free_field_op(const QuantumLatticeSpec& spec, double t, double x) {
  spec.validate();
  std::size_t dim = spec.dim();
  ModeOperator phi = ModeOperator::Zero(static_cast<Eigen::Index>(dim),
                                        static_cast<Eigen::Index>(dim));
  for (int mi = 0; mi < spec.modes; ++mi) {
    double w = spec.omega(mi);
    double theta = w * (t - spec.t0) - spec.wavenumber(mi) * x;
    double c = 1.0 / std::sqrt(2.0 * w * spec.volume());
    ModeOperator a = ladder(spec, spec.mode_j(mi), Ladder::annihilate);
    phi += c * std::exp(-kI * theta) * a;
    phi += c * std::exp(kI * theta) * a.adjoint();
  }
  return phi;
}

std::complex<double> pauli_jordan(const QuantumLatticeSpec& spec, double z0, double zx) {
  spec.validate();
  std::complex<double> sum{0.0, 0.0};
  for (int mi = 0; mi < spec.modes; ++mi) {
    double w = spec.omega(mi);
    double theta = w * z0 - spec.wavenumber(mi) * zx;
    sum += (std::exp(-kI * theta) - std::exp(kI * theta)) / (2.0 * w * spec.volume());
  }
  return sum;
}

double retarded_kernel(const QuantumLatticeSpec& spec, double z0, double zx) {
  spec.validate();
  if (z0 <= 0.0) return 0.0;
  double sum = 0.0;
  for (int mi = 0; mi < spec.modes; ++mi) {
    double w = spec.omega(mi);
    sum += std::sin(w * z0) * std::cos(spec.wavenumber(mi) * zx) / w;
  }
  return sum / spec.volume();
}

int required_field_factors(int p, int order) {
  if (p < 2) throw ConfigError("field-factor count requires p >= 2");
  if (order < 0) throw ConfigError("field-factor count requires order >= 0");
  return (p + 1) * (order + 1) + 1;
}

SafeSubspace safe_subspace(const QuantumLatticeSpec& spec, int field_factors) {
  spec.validate();
  if (field_factors < 0) throw ConfigError("field_factors must be >= 0");
  int n_safe = spec.n_max - field_factors / 2;
  if (n_safe < 0) {
    throw TruncationError("occupation cutoff n_max=" + std::to_string(spec.n_max) +
                          " too small for " + std::to_string(field_factors) +
                          " field factors (need n_max >= " +
                          std::to_string(field_factors / 2) + ")");
  }
  SafeSubspace sub;
  sub.n_safe = n_safe;
  std::size_t dim = spec.dim();
  for (std::size_t s = 0; s < dim; ++s) {
    std::size_t rest = s;
    int total = 0;
    for (int mi = 0; mi < spec.modes; ++mi) {
      total += static_cast<int>(rest % (static_cast<std::size_t>(spec.n_max) + 1));
      rest /= static_cast<std::size_t>(spec.n_max) + 1;
    }
    if (total <= n_safe) sub.members.push_back(static_cast<int>(s));
  }
  return sub;
}

double max_entry_on(const SafeSubspace& sub, const ModeOperator& A) {
  double best = 0.0;
  for (int r : sub.members) {
    for (int c : sub.members) {
      best = std::max(best, std::abs(A(r, c)));
    }
  }
  return best;
}

QuantumEvaluator::QuantumEvaluator(const QuantumLatticeSpec& spec, int p, double t,
                                   double dtau, int n_sites)
    : spec_(spec), p_(p), t_(t), dtau_(dtau), n_sites_(n_sites) {
  spec_.validate();
  if (p_ < 2) throw ConfigError("evaluator requires p >= 2");
  if (n_sites_ < 1) throw ConfigError("n_sites must be >= 1");
  steps_ = step_count(t_, spec_.t0, dtau_);
  dy_ = spec_.L / static_cast<double>(n_sites_);
  dim_ = spec_.dim();
  ladders_.resize(2 * static_cast<std::size_t>(spec_.modes));
  fields_.resize((steps_ + 1) * static_cast<std::size_t>(n_sites_));
  hams_.resize(steps_ + 1);
}

QuantumEvaluator QuantumEvaluator::for_order(const QuantumLatticeSpec& spec, int p,
                                             double t, double dtau, int order) {
  int n_sites = spec.half_band() * required_field_factors(p, order) + 1;
  return QuantumEvaluator(spec, p, t, dtau, n_sites);
}

const ModeOperator& QuantumEvaluator::ladder_cached(int mi, Ladder kind) {
  std::size_t slot = 2 * static_cast<std::size_t>(mi) + (kind == Ladder::create ? 1 : 0);
  if (!ladders_[slot]) ladders_[slot] = ladder(spec_, spec_.mode_j(mi), kind);
  return *ladders_[slot];
}

const ModeOperator& QuantumEvaluator::field_at(std::size_t i, int s) {
  std::size_t slot = i * static_cast<std::size_t>(n_sites_) + static_cast<std::size_t>(s);
  if (!fields_[slot]) {
    double t = tau(i);
    double x = site(s);
    ModeOperator phi = ModeOperator::Zero(static_cast<Eigen::Index>(dim_),
                                          static_cast<Eigen::Index>(dim_));
    for (int mi = 0; mi < spec_.modes; ++mi) {
      double w = spec_.omega(mi);
      double theta = w * (t - spec_.t0) - spec_.wavenumber(mi) * x;
      double c = 1.0 / std::sqrt(2.0 * w * spec_.volume());
      phi += c * std::exp(-kI * theta) * ladder_cached(mi, Ladder::annihilate);
      phi += c * std::exp(kI * theta) * ladder_cached(mi, Ladder::create);
    }
    fields_[slot] = std::move(phi);
  }
  return *fields_[slot];
}

const ModeOperator& QuantumEvaluator::hamiltonian_at(std::size_t i) {
  if (!hams_[i]) {
    ModeOperator H = ModeOperator::Zero(static_cast<Eigen::Index>(dim_),
                                        static_cast<Eigen::Index>(dim_));
    for (int s = 0; s < n_sites_; ++s) {
      H += matrix_power(field_at(i, s), p_ + 1);
    }
    hams_[i] = (dy_ / static_cast<double>(p_ + 1)) * H;
  }
  return *hams_[i];
}

const ModeOperator& QuantumEvaluator::tree_at(const PTree& b, std::size_t i, int s) {
  std::string key = b.key() + "#" + std::to_string(i) + "#" + std::to_string(s);
  auto it = trees_.find(key);
  if (it != trees_.end()) return it->second;

  ModeOperator result;
  if (b.is_leaf()) {
    result = field_at(i, s);
  } else {
    if (b.root_arity() != p_) {
      throw ArityError("tree arity " + std::to_string(b.root_arity()) +
                       " does not match p=" + std::to_string(p_));
    }
    result = ModeOperator::Zero(static_cast<Eigen::Index>(dim_),
                                static_cast<Eigen::Index>(dim_));
    const std::vector<PTree>& children = b.decompose();
    for (std::size_t i2 = 0; i2 <= i; ++i2) {
      double wq = (i2 == 0 || i2 == i) ? 0.5 : 1.0;  // trapezoid on [t0, tau_i]
      if (i == 0) break;                             // zero-measure integral
      for (int s2 = 0; s2 < n_sites_; ++s2) {
        double g = retarded_kernel(spec_, tau(i) - tau(i2), site(s) - site(s2));
        if (g == 0.0) continue;
        ModeOperator prod = tree_at(children[0], i2, s2);
        for (std::size_t q = 1; q < children.size(); ++q) {
          prod = prod * tree_at(children[q], i2, s2);
        }
        result += (wq * dtau_ * dy_ * g) * prod;
      }
    }
    result = -result;
  }
  auto [pos, inserted] = trees_.emplace(std::move(key), std::move(result));
  (void)inserted;
  return pos->second;
}

ModeOperator QuantumEvaluator::tree_operator(const PTree& b, double x) {
  if (b.is_leaf()) return free_field_op(spec_, t_, x);
  if (b.root_arity() != p_) {
    throw ArityError("tree arity " + std::to_string(b.root_arity()) +
                     " does not match p=" + std::to_string(p_));
  }
  ModeOperator acc = ModeOperator::Zero(static_cast<Eigen::Index>(dim_),
                                        static_cast<Eigen::Index>(dim_));
  const std::vector<PTree>& children = b.decompose();
  for (std::size_t i2 = 0; i2 <= steps_ && steps_ > 0; ++i2) {
    double wq = (i2 == 0 || i2 == steps_) ? 0.5 : 1.0;
    for (int s2 = 0; s2 < n_sites_; ++s2) {
      double g = retarded_kernel(spec_, t_ - tau(i2), x - site(s2));
      if (g == 0.0) continue;
      ModeOperator prod = tree_at(children[0], i2, s2);
      for (std::size_t q = 1; q < children.size(); ++q) {
        prod = prod * tree_at(children[q], i2, s2);
      }
      acc += (wq * dtau_ * dy_ * g) * prod;
    }
  }
  return -acc;
}

ModeOperator QuantumEvaluator::tree_sum(int order, double x) {
  ModeOperator acc = ModeOperator::Zero(static_cast<Eigen::Index>(dim_),
                                        static_cast<Eigen::Index>(dim_));
  for (const PTree& b : enumerate_trees(p_, order)) {
    acc += tree_operator(b, x);
  }
  return acc;
}

void QuantumEvaluator::ensure_dyson(int alpha) {
  if (dyson_.empty()) {
    std::vector<ModeOperator> level(steps_ + 1);
    for (std::size_t i = 0; i <= steps_; ++i) {
      level[i] = ModeOperator::Identity(static_cast<Eigen::Index>(dim_),
                                        static_cast<Eigen::Index>(dim_));
    }
    dyson_.push_back(std::move(level));
  }
  while (dyson_.size() <= static_cast<std::size_t>(alpha)) {
    const std::vector<ModeOperator>& prev = dyson_.back();
    std::vector<ModeOperator> level(steps_ + 1);
    // rectangle rule on the strict lower simplex:
    //   K_a(tau_i) = dtau * sum_{i' < i} H(tau_i') K_{a-1}(tau_i')
    level[0] = ModeOperator::Zero(static_cast<Eigen::Index>(dim_),
                                  static_cast<Eigen::Index>(dim_));
    for (std::size_t i = 1; i <= steps_; ++i) {
      level[i] = level[i - 1] + dtau_ * (hamiltonian_at(i - 1) * prev[i - 1]);
    }
    dyson_.push_back(std::move(level));
  }
}

ModeOperator QuantumEvaluator::dyson_term(int alpha, int sign) {
  if (alpha < 0) throw ConfigError("dyson grade must be >= 0");
  if (sign != 1 && sign != -1) throw ConfigError("sign must be +1 or -1");
  ensure_dyson(alpha);
  std::complex<double> pre{1.0, 0.0};
  for (int i = 0; i < alpha; ++i) pre *= -kI * static_cast<double>(sign);
  return pre * dyson_[static_cast<std::size_t>(alpha)][steps_];
}

ModeOperator QuantumEvaluator::dyson_partial(int order, double lambda, int sign) {
  ModeOperator acc = ModeOperator::Zero(static_cast<Eigen::Index>(dim_),
                                        static_cast<Eigen::Index>(dim_));
  double power = 1.0;
  for (int alpha = 0; alpha <= order; ++alpha) {
    acc += power * dyson_term(alpha, sign);
    power *= lambda;
  }
  return acc;
}

ModeOperator QuantumEvaluator::conjugated_field_component(int grade, double x, int sign) {
  if (grade < 0) throw ConfigError("grade must be >= 0");
  ModeOperator phi = free_field_op(spec_, t_, x);
  ModeOperator acc = ModeOperator::Zero(static_cast<Eigen::Index>(dim_),
                                        static_cast<Eigen::Index>(dim_));
  for (int a = 0; a <= grade; ++a) {
    int b = grade - a;
    acc += dyson_term(a, sign).adjoint() * phi * dyson_term(b, sign);
  }
  return acc;
}

ModeOperator QuantumEvaluator::conjugated_field(int order, double x, double lambda,
                                                int sign) {
  ModeOperator acc = ModeOperator::Zero(static_cast<Eigen::Index>(dim_),
                                        static_cast<Eigen::Index>(dim_));
  double power = 1.0;
  for (int g = 0; g <= order; ++g) {
    acc += power * conjugated_field_component(g, x, sign);
    power *= lambda;
  }
  return acc;
}

ModeOperator QuantumEvaluator::unitarity_defect(int m, int sign) {
  if (m < 0) throw ConfigError("grade must be >= 0");
  ModeOperator acc = ModeOperator::Zero(static_cast<Eigen::Index>(dim_),
                                        static_cast<Eigen::Index>(dim_));
  for (int a = 0; a <= m; ++a) {
    int b = m - a;
    acc += dyson_term(a, sign) * dyson_term(b, sign).adjoint();
  }
  if (m == 0) {
    acc -= ModeOperator::Identity(static_cast<Eigen::Index>(dim_),
                                  static_cast<Eigen::Index>(dim_));
  }
  return acc;
}

ModeOperator QuantumEvaluator::commutator_route_grade1(double x, int sign) {
  if (sign != 1 && sign != -1) throw ConfigError("sign must be +1 or -1");
  ModeOperator acc = ModeOperator::Zero(static_cast<Eigen::Index>(dim_),
                                        static_cast<Eigen::Index>(dim_));
  for (std::size_t i = 0; i <= steps_ && steps_ > 0; ++i) {
    double wq = (i == 0 || i == steps_) ? 0.5 : 1.0;
    for (int s = 0; s < n_sites_; ++s) {
      std::complex<double> delta = pauli_jordan(spec_, t_ - tau(i), x - site(s));
      if (delta == std::complex<double>{0.0, 0.0}) continue;
      acc += (wq * dtau_ * dy_ * delta) * matrix_power(field_at(i, s), p_);
    }
  }
  return (-kI * static_cast<double>(sign)) * acc;
}

ModeOperator tree_operator(const QuantumLatticeSpec& spec, int p, const PTree& b,
                           double t, double x, double dtau) {
  QuantumEvaluator ev = QuantumEvaluator::for_order(spec, p, t, dtau, b.order());
  return ev.tree_operator(b, x);
}

ModeOperator dyson_U(const QuantumLatticeSpec& spec, int p, double t, int order,
                     double dtau, double lambda, int sign) {
  QuantumEvaluator ev = QuantumEvaluator::for_order(spec, p, t, dtau, order);
  return ev.dyson_partial(order, lambda, sign);
}

ModeOperator heisenberg_field(const QuantumLatticeSpec& spec, int p, double t, double x,
                              int order, double dtau, double lambda, int sign) {
  QuantumEvaluator ev = QuantumEvaluator::for_order(spec, p, t, dtau, order);
  return ev.conjugated_field(order, x, lambda, sign);
}

namespace {

GradedCheck finish_check(int m, std::vector<double> dtaus, std::vector<double> devs) {
  GradedCheck check;
  check.order_m = m;
  check.dtaus = std::move(dtaus);
  check.deviations = std::move(devs);
  const double floor = 1e-12;
  check.exact = true;
  for (double d : check.deviations) {
    if (d > floor) check.exact = false;
  }
  if (!check.exact && check.deviations.size() >= 2) {
    check.fitted_rate = fit_loglog(check.dtaus, check.deviations, 1e-14).slope;
  } else {
    check.fitted_rate = std::numeric_limits<double>::quiet_NaN();
  }
  return check;
}

}  // namespace

GradedCheck verify_unitarity(const QuantumLatticeSpec& spec, int p, double t, int m,
                             double dtau0, int levels, int sign) {
  if (levels < 1) throw ConfigError("refinement needs at least one level");
  SafeSubspace sub = safe_subspace(spec, required_field_factors(p, m));
  std::vector<double> dtaus, devs;
  for (int l = 0; l < levels; ++l) {
    double dtau = dtau0 / std::pow(2.0, l);
    QuantumEvaluator ev = QuantumEvaluator::for_order(spec, p, t, dtau, m);
    dtaus.push_back(dtau);
    devs.push_back(max_entry_on(sub, ev.unitarity_defect(m, sign)));
  }
  return finish_check(m, std::move(dtaus), std::move(devs));
}

GradedCheck verify_series_identity(const QuantumLatticeSpec& spec, int p, double t,
                                   double x, int m, double dtau0, int levels, int sign) {
  if (levels < 1) throw ConfigError("refinement needs at least one level");
  SafeSubspace sub = safe_subspace(spec, required_field_factors(p, m));
  std::vector<double> dtaus, devs;
  for (int l = 0; l < levels; ++l) {
    double dtau = dtau0 / std::pow(2.0, l);
    QuantumEvaluator ev = QuantumEvaluator::for_order(spec, p, t, dtau, m);
    ModeOperator lhs = ev.tree_sum(m, x);
    ModeOperator rhs = ev.conjugated_field_component(m, x, sign);
    dtaus.push_back(dtau);
    devs.push_back(max_entry_on(sub, lhs - rhs));
  }
  return finish_check(m, std::move(dtaus), std::move(devs));
}

double grade1_shortcut_deviation(const QuantumLatticeSpec& spec, int p, double t,
                                 double x, double dtau, int sign) {
  SafeSubspace sub = safe_subspace(spec, required_field_factors(p, 1));
  QuantumEvaluator ev = QuantumEvaluator::for_order(spec, p, t, dtau, 1);
  ModeOperator lhs = ev.tree_sum(1, x);
  ModeOperator rhs = ev.commutator_route_grade1(x, sign);
  return max_entry_on(sub, lhs - rhs);
}

}  // namespace kgs
