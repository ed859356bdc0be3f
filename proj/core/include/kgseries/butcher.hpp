#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "kgseries/grid.hpp"
#include "kgseries/ptree.hpp"

namespace kgs {

/// Configuration of the truncated tree series for
///   (box + m^2) phi + lambda phi^p = 0
/// on a periodic grid over the horizon [0, T].
struct SeriesConfig {
  int p = 2;
  double lambda = 0.0;
  GridSpec grid;
  CauchyData data;
  double T = 1.0;
  double dt = 1e-2;
  double q = 1.0;     // Sobolev index, must exceed d/2
  int max_order = 3;
  double c_q = 0.0;   // algebra constant; 0 means "estimate from the grid"
  bool dealias = false;

  void validate() const;
};

/// lambda bound below which the closed per-order bounds sum to a convergent
/// geometric series: (p-1)^(p-1) / (p^p c^(p-1) M^(2(p-1))) divided by
/// (1 + M T) * data_norm^(p-1), with M = max(m, 1/m). Returns +inf when
/// data_norm == 0 (every coefficient beyond the free field vanishes).
double convergence_threshold(int p, double m, double T, double c_q, double data_norm);

/// Cache of coefficient fields keyed by commutativity-class representative
/// key (planar keys canonicalize on lookup), with per-entry norm cache.
class CoefficientTable {
public:
  struct Entry {
    TimeSampledField field;
    std::optional<double> triple_norm;
  };

  bool contains(const std::string& class_key) const { return entries_.count(class_key) > 0; }
  const Entry* find(const std::string& class_key) const;
  Entry& insert(std::string class_key, TimeSampledField field);
  std::size_t size() const { return entries_.size(); }

private:
  std::map<std::string, Entry> entries_;
};

/// Per-tree bound report: the computed triple norm against the one-step
/// recursion bound and the closed geometric bound.
struct BoundReport {
  std::string key;
  int order = 0;
  double triple_norm = 0.0;
  double recursion_rhs = 0.0;  // (1+MT) c^(p-1) prod child norms; M^2 data_norm for the leaf
  double closed_rhs = 0.0;     // (c^(p-1)(1+MT))^|b| (M^2 data_norm)^(|b|(p-1)+1)
  bool recursion_pass = false;
  bool closed_pass = false;
};

/// Computes and caches tree coefficient fields:
///   coefficient(leaf) = free field of the Cauchy data,
///   coefficient(graft(b1..bp)) = retarded solve of -(prod_i coefficient(bi)),
/// deduplicated across planar trees by commutativity class (children are
/// multiplied in canonical sorted order, so permutation variants are
/// bitwise identical by construction).
class SeriesEngine {
public:
  explicit SeriesEngine(SeriesConfig cfg);

  const SeriesConfig& config() const { return cfg_; }
  double algebra_constant() const { return c_q_; }
  /// ||phi0||_{H^{q+1}} + ||phi1||_{H^q}, the norms Cauchy data carries in
  /// its natural spaces.
  double data_norm() const { return data_norm_; }
  double threshold() const;

  /// Commutativity classes of the given order with planar multiplicities.
  const std::vector<TreeClass>& classes(int order);

  /// Coefficient field of b (computed on demand, memoized by class).
  const TimeSampledField& coefficient(const PTree& b);
  double coefficient_norm(const PTree& b);

  /// Computes every class with order <= N (independent classes of one order
  /// run in parallel; insertion order is deterministic).
  void ensure_order(int N);

  /// sum over |b| <= N of lambda^|b| * multiplicity * coefficient, added in
  /// increasing order and lexicographic class key. All three tracks summed.
  /// Coefficients are lambda-independent, so one engine serves a lambda
  /// sweep via the override.
  TimeSampledField partial_sum(int N);
  TimeSampledField partial_sum(int N, double lambda);

  BoundReport bound_check(const PTree& b);

private:
  TimeSampledField compute_class(const PTree& rep);

  SeriesConfig cfg_;
  double c_q_ = 0.0;
  double data_norm_ = 0.0;
  CoefficientTable table_;
  std::map<int, std::vector<TreeClass>> classes_;
};

/// Recomputes coefficient(b) from scratch with no shared cache; bitwise
/// equal to the engine's memoized value.
TimeSampledField compute_coefficient_uncached(const SeriesConfig& cfg, const PTree& b);

/// Defect samples [centered d^2/dt^2 + (-Lap + m^2)] f + lambda f^p at
/// interior time samples (endpoint samples are zero). The spatial part is
/// spectral; the time part is the discrete second difference, so the defect
/// of an exact solution shrinks at O(dt^2).
TimeSampledField residual_field(const TimeSampledField& f, double lambda, int p,
                                bool dealias = false);

/// max over interior samples of ||residual_field sample||_{H^{q-1}}.
double residual(const TimeSampledField& f, double q, double lambda, int p,
                bool dealias = false);

/// max over interior samples of ||f sample||_{H^s} (used to reduce defect
/// fields after subtracting a floor).
double max_interior_sobolev(const TimeSampledField& f, double s);

/// Sample-wise difference a - b on identical grids (value track only).
TimeSampledField subtract(const TimeSampledField& a, const TimeSampledField& b);

}  // namespace kgs
