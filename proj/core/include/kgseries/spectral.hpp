#pragma once

#include <complex>
#include <cstddef>
#include <vector>

#include "kgseries/grid.hpp"

namespace kgs {

/// Real-to-complex DFT pair on a GridSpec plus per-mode metadata.
///
/// Conventions: forward() returns unnormalized sums
///   F_j = sum_x f(x) e^{-i k_j . x},
/// inverse() divides by n^d, so inverse(forward(f)) == f up to roundoff and
/// the Fourier-series coefficient of mode j is c_j = F_j / n^d. Storage is
/// conjugate-symmetric: the last axis keeps indices 0..n/2 only, and
/// parseval_weight() says how many full-spectrum modes a stored entry
/// represents (2 for entries whose conjugate partner is not stored).
class SpectralTransform {
public:
  explicit SpectralTransform(const GridSpec& grid);
  ~SpectralTransform();
  SpectralTransform(const SpectralTransform&) = delete;
  SpectralTransform& operator=(const SpectralTransform&) = delete;

  const GridSpec& grid() const { return grid_; }
  std::size_t spectral_size() const { return spectral_size_; }

  void forward(const double* in, std::complex<double>* out) const;
  void inverse(const std::complex<double>* in, double* out) const;

  std::vector<std::complex<double>> forward(const std::vector<double>& in) const;
  std::vector<double> inverse(const std::vector<std::complex<double>>& in) const;

  /// |k|^2 of each stored mode.
  const std::vector<double>& k2() const { return k2_; }
  /// omega_k = sqrt(|k|^2 + m^2) of each stored mode.
  const std::vector<double>& omega() const { return omega_; }
  /// 1 if the stored mode is its own conjugate partner plane, else 2.
  const std::vector<double>& parseval_weight() const { return weight_; }
  /// Integer mode index j_a per axis for each stored mode (Nyquist as +n/2).
  const std::vector<int>& mode_index(int axis) const { return mode_index_[axis]; }
  /// k_a = 2*pi*j_a/L per axis for each stored mode.
  const std::vector<double>& k_axis(int axis) const { return k_axis_[axis]; }

private:
  GridSpec grid_;
  std::size_t spectral_size_ = 0;
  void* plan_fwd_ = nullptr;
  void* plan_inv_ = nullptr;
  std::vector<double> k2_, omega_, weight_;
  std::vector<std::vector<int>> mode_index_;
  std::vector<std::vector<double>> k_axis_;
};

/// Shared per-grid transform registry (plans are reused across calls; FFTW
/// plan creation is serialized internally, execution is reentrant).
const SpectralTransform& transform_for(const GridSpec& grid);

}  // namespace kgs
