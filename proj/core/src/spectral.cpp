#include "kgseries/spectral.hpp"

#include <fftw3.h>

#include <map>
#include <memory>
#include <mutex>
#include <tuple>

namespace kgs {

namespace {
std::mutex& plan_mutex() {
  static std::mutex m;
  return m;
}
constexpr double kTwoPi = 6.283185307179586476925286766559;
}  // namespace

SpectralTransform::SpectralTransform(const GridSpec& grid) : grid_(grid) {
  grid_.validate();
  const int d = grid_.d;
  const int n = grid_.n;
  std::vector<int> dims(d, n);

  spectral_size_ = 1;
  for (int a = 0; a < d - 1; ++a) spectral_size_ *= static_cast<std::size_t>(n);
  spectral_size_ *= static_cast<std::size_t>(n / 2 + 1);

  std::vector<double> scratch_real(grid_.sites());
  std::vector<std::complex<double>> scratch_cplx(spectral_size_);
  {
    std::lock_guard<std::mutex> lock(plan_mutex());
    plan_fwd_ = fftw_plan_dft_r2c(d, dims.data(), scratch_real.data(),
                                  reinterpret_cast<fftw_complex*>(scratch_cplx.data()),
                                  FFTW_ESTIMATE | FFTW_UNALIGNED);
    plan_inv_ = fftw_plan_dft_c2r(d, dims.data(),
                                  reinterpret_cast<fftw_complex*>(scratch_cplx.data()),
                                  scratch_real.data(), FFTW_ESTIMATE | FFTW_UNALIGNED);
  }

  k2_.resize(spectral_size_);
  omega_.resize(spectral_size_);
  weight_.resize(spectral_size_);
  mode_index_.assign(d, std::vector<int>(spectral_size_));
  k_axis_.assign(d, std::vector<double>(spectral_size_));

  const int last_extent = n / 2 + 1;
  for (std::size_t idx = 0; idx < spectral_size_; ++idx) {
    std::size_t rem = idx;
    double k2 = 0.0;
    for (int a = d - 1; a >= 0; --a) {
      const int extent = (a == d - 1) ? last_extent : n;
      const int j = static_cast<int>(rem % extent);
      rem /= extent;
      const int mode = (j <= n / 2) ? j : j - n;
      const double k = kTwoPi * mode / grid_.L;
      mode_index_[a][idx] = mode;
      k_axis_[a][idx] = k;
      k2 += k * k;
      if (a == d - 1) weight_[idx] = (j == 0 || j == n / 2) ? 1.0 : 2.0;
    }
    k2_[idx] = k2;
    omega_[idx] = std::sqrt(k2 + grid_.m * grid_.m);
  }
}

SpectralTransform::~SpectralTransform() {
  std::lock_guard<std::mutex> lock(plan_mutex());
  if (plan_fwd_) fftw_destroy_plan(static_cast<fftw_plan>(plan_fwd_));
  if (plan_inv_) fftw_destroy_plan(static_cast<fftw_plan>(plan_inv_));
}

void SpectralTransform::forward(const double* in, std::complex<double>* out) const {
  // Out-of-place r2c leaves the input untouched.
  fftw_execute_dft_r2c(static_cast<fftw_plan>(plan_fwd_), const_cast<double*>(in),
                       reinterpret_cast<fftw_complex*>(out));
}

void SpectralTransform::inverse(const std::complex<double>* in, double* out) const {
  // c2r may destroy its input, so run on a private copy.
  std::vector<std::complex<double>> tmp(in, in + spectral_size_);
  fftw_execute_dft_c2r(static_cast<fftw_plan>(plan_inv_),
                       reinterpret_cast<fftw_complex*>(tmp.data()), out);
  const double scale = 1.0 / static_cast<double>(grid_.sites());
  const std::size_t sites = grid_.sites();
  for (std::size_t i = 0; i < sites; ++i) out[i] *= scale;
}

std::vector<std::complex<double>> SpectralTransform::forward(
    const std::vector<double>& in) const {
  std::vector<std::complex<double>> out(spectral_size_);
  forward(in.data(), out.data());
  return out;
}

std::vector<double> SpectralTransform::inverse(
    const std::vector<std::complex<double>>& in) const {
  std::vector<double> out(grid_.sites());
  inverse(in.data(), out.data());
  return out;
}

const SpectralTransform& transform_for(const GridSpec& grid) {
  using Key = std::tuple<int, int, double, double>;
  static std::mutex registry_mutex;
  static std::map<Key, std::unique_ptr<SpectralTransform>> registry;
  const Key key{grid.d, grid.n, grid.L, grid.m};
  std::lock_guard<std::mutex> lock(registry_mutex);
  auto it = registry.find(key);
  if (it == registry.end())
    it = registry.emplace(key, std::make_unique<SpectralTransform>(grid)).first;
  return *it->second;
}

}  // namespace kgs
