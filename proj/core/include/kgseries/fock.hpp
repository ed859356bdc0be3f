#pragma once

#include <Eigen/Dense>
#include <complex>
#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "kgseries/ptree.hpp"

namespace kgs {

/// Finite-mode, occupation-truncated bosonic lattice on a 1-d torus.
///
/// Retained wavevectors are k_j = 2*pi*j/L for |j| <= (modes-1)/2 (modes is
/// odd so the set is symmetric), each mode truncated at occupation n_max.
/// Fock dimension is (n_max+1)^modes; basis index encodes occupations
/// little-endian in mode-list order, so index 0 is the vacuum.
struct QuantumLatticeSpec {
  int d = 1;        // only 1 supported
  int modes = 1;    // number of retained wavevectors, odd
  int n_max = 4;    // occupation cutoff per mode
  double L = 1.0;   // box length
  double m = 1.0;   // mass
  double t0 = 0.0;  // reference time for interaction-picture phases

  void validate() const;
  std::size_t dim() const;                  // (n_max+1)^modes, range-checked
  int half_band() const { return (modes - 1) / 2; }
  int mode_j(int mi) const { return mi - half_band(); }  // mi in [0, modes)
  double wavenumber(int mi) const;
  double omega(int mi) const;
  double volume() const { return L; }
  bool operator==(const QuantumLatticeSpec& o) const;
};

using ModeOperator = Eigen::MatrixXcd;

enum class Ladder { annihilate, create };

/// Truncated ladder operator of mode j (integer index, |j| <= half_band).
/// RangeError if j is not in the retained set.
ModeOperator ladder(const QuantumLatticeSpec& spec, int j, Ladder kind);

/// Diagonal total-occupation operator.
ModeOperator number_operator(const QuantumLatticeSpec& spec);

/// Free field at time t, position x:
///   sum_j (a_j e^{-i theta} + a_j^dag e^{+i theta}) / sqrt(2 omega_j V),
/// theta = omega_j (t - t0) - k_j x. Self-adjoint by construction.
ModeOperator free_field_op(const QuantumLatticeSpec& spec, double t, double x);

/// Discrete commutator function
///   Delta(z) = sum_j (e^{-i(omega_j z0 - k_j zx)} - e^{+i(...)}) / (2 omega_j V).
/// Purely imaginary, antisymmetric, zero at equal times.
std::complex<double> pauli_jordan(const QuantumLatticeSpec& spec, double z0, double zx);

/// Causal kernel: 0 for z0 <= 0, else (1/V) sum_j sin(omega_j z0) cos(k_j zx) / omega_j.
/// Equals (i * pauli_jordan(z)).real() for z0 > 0 and matches the per-mode
/// sin(omega (t-s))/omega weight of the classical retarded solve.
double retarded_kernel(const QuantumLatticeSpec& spec, double z0, double zx);

/// Worst-case number of field factors multiplied together anywhere in an
/// order-`order` identity check: (p+1)*(order+1) + 1.
int required_field_factors(int p, int order);

/// Span of occupation states with total particle number <= n_safe, where
/// n_safe = n_max - floor(field_factors/2). A product of F ladder factors
/// taken between two states of this block follows occupation paths that
/// peak no higher than n_safe + floor(F/2) <= n_max, so every matrix
/// element on the block is exactly cutoff-free (in particular
/// [a_k, a_k^dag] = Id there).
struct SafeSubspace {
  int n_safe = 0;
  std::vector<int> members;  // basis indices, increasing
};

/// TruncationError if n_max is too small for the requested factor count.
SafeSubspace safe_subspace(const QuantumLatticeSpec& spec, int field_factors);

/// max |A(i,j)| over the block rows/columns.
double max_entry_on(const SafeSubspace& sub, const ModeOperator& A);

/// Shared evaluation context at fixed final time t and time step dtau
/// (t - t0 must be an integer multiple of dtau). All time integrals run on
/// the grid tau_i = t0 + i*dtau; spatial integrals are exact lattice sums
/// over n_sites equispaced points (n_sites > half_band * field factor count
/// makes every mode-sum orthogonality exact).
///
/// Quadrature conventions: tree-operator time integrals use the trapezoid
/// rule; the time-ordered exponential uses the rectangle rule on the strict
/// lower simplex tau_1 > tau_2 > ... All evaluation is sequential and
/// deterministic.
///
/// `sign` selects the phase convention of the time-ordered exponential:
/// +1 means U = Texp(-i lambda int H), -1 flips i (a deliberate wrong-sign
/// control).
class QuantumEvaluator {
public:
  QuantumEvaluator(const QuantumLatticeSpec& spec, int p, double t, double dtau,
                   int n_sites);
  static QuantumEvaluator for_order(const QuantumLatticeSpec& spec, int p, double t,
                                    double dtau, int order);

  const QuantumLatticeSpec& spec() const { return spec_; }
  int p() const { return p_; }
  double t() const { return t_; }
  double dtau() const { return dtau_; }
  std::size_t steps() const { return steps_; }
  int n_sites() const { return n_sites_; }
  double tau(std::size_t i) const { return spec_.t0 + static_cast<double>(i) * dtau_; }
  double site(int s) const { return static_cast<double>(s) * dy_; }

  const ModeOperator& field_at(std::size_t i, int s);
  /// H(tau_i) = (dy/(p+1)) sum_s field(i,s)^(p+1).
  const ModeOperator& hamiltonian_at(std::size_t i);
  /// Quantized tree coefficient at grid node (tau_i, y_s); leaf -> field,
  /// otherwise -trapezoid_{t0..tau_i} sum_s' kernel * ordered child product.
  const ModeOperator& tree_at(const PTree& b, std::size_t i, int s);
  /// Same, at top time t and arbitrary position x.
  ModeOperator tree_operator(const PTree& b, double x);
  /// Sum of tree_operator over every planar tree of the given order
  /// (operator products do not commute, so planar trees are summed as-is).
  ModeOperator tree_sum(int order, double x);

  /// lambda-grade alpha of the time-ordered exponential (no lambda power).
  ModeOperator dyson_term(int alpha, int sign);
  /// Partial sum sum_{alpha<=order} lambda^alpha * dyson_term(alpha).
  ModeOperator dyson_partial(int order, double lambda, int sign);

  /// Grade-g component of U^dag phi U: sum_{a+b=g} term_a^dag phi(t,x) term_b.
  ModeOperator conjugated_field_component(int grade, double x, int sign);
  /// Partial sum of the conjugated field through lambda-order `order`.
  ModeOperator conjugated_field(int order, double x, double lambda, int sign);

  /// Grade-m coefficient of U U^dag: sum_{a+b=m} term_a term_b^dag.
  ModeOperator unitarity_defect(int m, int sign);

  /// Commutator-reduced form of the grade-1 conjugated-field component,
  /// evaluated with the same trapezoid weights as the tree route but through
  /// the scalar commutator function instead of the causal kernel:
  ///   -i*sign * trapezoid_i sum_s dy * Delta(t-tau_i, x-y_s) * field^p.
  ModeOperator commutator_route_grade1(double x, int sign);

private:
  const ModeOperator& ladder_cached(int mi, Ladder kind);
  void ensure_dyson(int alpha);

  QuantumLatticeSpec spec_;
  int p_;
  double t_;
  double dtau_;
  std::size_t steps_;
  int n_sites_;
  double dy_;
  std::size_t dim_;
  std::vector<std::optional<ModeOperator>> ladders_;  // 2*modes slots
  std::vector<std::optional<ModeOperator>> fields_;   // (steps+1)*n_sites
  std::vector<std::optional<ModeOperator>> hams_;     // steps+1
  std::unordered_map<std::string, ModeOperator> trees_;
  std::vector<std::vector<ModeOperator>> dyson_;      // dyson_[alpha][i], sign-free
};

/// One-shot conveniences (each builds a private evaluator).
ModeOperator tree_operator(const QuantumLatticeSpec& spec, int p, const PTree& b,
                           double t, double x, double dtau);
ModeOperator dyson_U(const QuantumLatticeSpec& spec, int p, double t, int order,
                     double dtau, double lambda = 1.0, int sign = 1);
ModeOperator heisenberg_field(const QuantumLatticeSpec& spec, int p, double t, double x,
                              int order, double dtau, double lambda = 1.0,
                              int sign = 1);

/// Deviation report of a graded identity across dtau refinement levels
/// (dtau halves per level). fitted_rate is the log-log slope of deviation
/// vs dtau over levels above the roundoff floor; exact is set when every
/// level sits at the floor.
struct GradedCheck {
  int order_m = 0;
  std::vector<double> dtaus;
  std::vector<double> deviations;
  double fitted_rate = 0.0;
  bool exact = false;
};

/// Grade-m coefficient of U U^dag vs delta_{m,0} Id, on the safe block.
GradedCheck verify_unitarity(const QuantumLatticeSpec& spec, int p, double t, int m,
                             double dtau0, int levels, int sign = 1);

/// Grade-m tree sum vs grade-m conjugated-field component, on the safe block.
GradedCheck verify_series_identity(const QuantumLatticeSpec& spec, int p, double t,
                                   double x, int m, double dtau0, int levels,
                                   int sign = 1);

/// Max safe-block deviation between the grade-1 tree sum and the
/// commutator-reduced route at matched quadrature (roundoff-level when the
/// sign convention is right, O(1) when it is flipped).
double grade1_shortcut_deviation(const QuantumLatticeSpec& spec, int p, double t,
                                 double x, double dtau, int sign = 1);

}  // namespace kgs
