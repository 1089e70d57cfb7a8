#include "raresage/knowledge/sparsity.hpp"

#include <algorithm>
#include <cmath>
#include <complex>

#include <fftw3.h>

#include "raresage/error.hpp"

namespace raresage::soz {

namespace {

constexpr std::size_t kMinSignal = 16;

}  // namespace

double gini_index(std::span<const double> values) {
  if (values.empty()) throw ValidationError("gini index of an empty vector");
  std::vector<double> a(values.begin(), values.end());
  double total = 0.0;
  for (double v : a) {
    if (!(v >= 0.0) || !std::isfinite(v)) throw ValidationError("gini index needs finite nonnegative values");
    total += v;
  }
  if (total == 0.0) throw UndefinedError("gini index of an all-zero vector");
  std::sort(a.begin(), a.end());
  // Ranks k and n+1-k carry opposite weights; pairing them makes equal
  // entries cancel exactly, so a constant vector gives 0 with no rounding.
  const std::size_t n = a.size();
  double acc = 0.0;
  for (std::size_t i = 0; i < n / 2; ++i) {
    acc += static_cast<double>(n - 1 - 2 * i) * (a[n - 1 - i] - a[i]);
  }
  return acc / (static_cast<double>(n) * total);
}

std::vector<double> spectrum_magnitudes(std::span<const double> signal) {
  const std::size_t n = signal.size();
  if (n < kMinSignal) throw ValidationError("signal shorter than 16 samples");
  std::vector<double> in(signal.begin(), signal.end());
  std::vector<std::complex<double>> out(n / 2 + 1);
  fftw_plan plan = fftw_plan_dft_r2c_1d(static_cast<int>(n), in.data(),
                                        reinterpret_cast<fftw_complex*>(out.data()), FFTW_ESTIMATE);
  fftw_execute(plan);
  fftw_destroy_plan(plan);
  std::vector<double> mag;
  mag.reserve(n / 2);
  for (std::size_t k = 1; k <= n / 2; ++k) mag.push_back(std::abs(out[k]));
  return mag;
}

double sine_sparsity(std::span<const double> signal) {
  const auto mag = spectrum_magnitudes(signal);
  return gini_index(mag);
}

std::vector<double> pad_pow2(std::span<const double> signal) {
  std::size_t n = kMinSignal;
  while (n < signal.size()) n *= 2;
  std::vector<double> out(n, 0.0);
  std::copy(signal.begin(), signal.end(), out.begin());
  return out;
}

std::vector<double> haar_details(std::span<const double> signal) {
  const std::size_t n = signal.size();
  if (n < 2 || (n & (n - 1)) != 0) throw ValidationError("haar transform needs a power-of-two length");
  const double r = 1.0 / std::sqrt(2.0);
  std::vector<double> approx(signal.begin(), signal.end());
  std::vector<double> details;
  details.reserve(n - 1);
  while (approx.size() > 1) {
    const std::size_t half = approx.size() / 2;
    std::vector<double> next(half);
    for (std::size_t i = 0; i < half; ++i) {
      next[i] = (approx[2 * i] + approx[2 * i + 1]) * r;
      details.push_back((approx[2 * i] - approx[2 * i + 1]) * r);
    }
    approx = std::move(next);
  }
  return details;
}

double wavelet_sparsity(std::span<const double> signal) {
  auto details = haar_details(pad_pow2(signal));
  for (double& d : details) d = std::abs(d);
  return gini_index(details);
}

}  // namespace raresage::soz
