#include "emrec/dsp.hpp"

#include <cmath>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <utility>

#include "emrec/error.hpp"

namespace emrec {

namespace {

constexpr double kPi = 3.14159265358979323846264338327950288;

using Complex = std::complex<double>;
using CVec = std::vector<Complex>;

bool is_pow2(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

std::size_t next_pow2(std::size_t n) {
  std::size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

// Twiddle factors e^{-2*pi*i*k/n} for k < n/2 (forward direction).
struct Radix2Plan {
  std::size_t n = 0;
  CVec twiddles;
};

// Chirp tables for Bluestein's algorithm at length n. b_fft is the FFT of
// the symmetric chirp filter, padded to m = next_pow2(2n - 1).
struct BluesteinPlan {
  std::size_t n = 0;
  std::size_t m = 0;
  CVec chirp;  // e^{-i*pi*k^2/n}, k < n
  CVec b_fft;
};

// In-place radix-2 FFT, unnormalized in both directions.
void fft_pow2(CVec& a, const Radix2Plan& plan, bool inverse) {
  const std::size_t n = a.size();
  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a[i], a[j]);
  }
  for (std::size_t len = 2; len <= n; len <<= 1) {
    const std::size_t stride = n / len;
    for (std::size_t block = 0; block < n; block += len) {
      for (std::size_t k = 0; k < len / 2; ++k) {
        Complex w = plan.twiddles[k * stride];
        if (inverse) w = std::conj(w);
        const Complex u = a[block + k];
        const Complex v = a[block + k + len / 2] * w;
        a[block + k] = u + v;
        a[block + k + len / 2] = u - v;
      }
    }
  }
}

// Plans are immutable once built; the cache makes repeated transforms of the
// segment lengths used by featurization cheap.
std::shared_ptr<const Radix2Plan> radix2_plan(std::size_t n) {
  static std::mutex mutex;
  static std::map<std::size_t, std::shared_ptr<const Radix2Plan>> cache;
  std::lock_guard<std::mutex> lock(mutex);
  auto it = cache.find(n);
  if (it != cache.end()) return it->second;
  auto plan = std::make_shared<Radix2Plan>();
  plan->n = n;
  plan->twiddles.resize(n / 2);
  for (std::size_t k = 0; k < n / 2; ++k) {
    const double angle = -2.0 * kPi * static_cast<double>(k) / static_cast<double>(n);
    plan->twiddles[k] = Complex(std::cos(angle), std::sin(angle));
  }
  cache.emplace(n, plan);
  return plan;
}

std::shared_ptr<const BluesteinPlan> bluestein_plan(std::size_t n) {
  static std::mutex mutex;
  static std::map<std::size_t, std::shared_ptr<const BluesteinPlan>> cache;
  std::lock_guard<std::mutex> lock(mutex);
  auto it = cache.find(n);
  if (it != cache.end()) return it->second;

  auto plan = std::make_shared<BluesteinPlan>();
  plan->n = n;
  plan->m = next_pow2(2 * n - 1);
  plan->chirp.resize(n);
  // The chirp phase pi*k^2/n has period 2n in k^2; reducing k^2 mod 2n in
  // integers keeps the argument small and the table accurate for long inputs.
  const auto period = static_cast<std::uint64_t>(2 * n);
  for (std::size_t k = 0; k < n; ++k) {
    const std::uint64_t k2 = (static_cast<std::uint64_t>(k) * k) % period;
    const double angle = -kPi * static_cast<double>(k2) / static_cast<double>(n);
    plan->chirp[k] = Complex(std::cos(angle), std::sin(angle));
  }
  plan->b_fft.assign(plan->m, Complex(0.0, 0.0));
  plan->b_fft[0] = Complex(1.0, 0.0);
  for (std::size_t k = 1; k < n; ++k) {
    const Complex b = std::conj(plan->chirp[k]);
    plan->b_fft[k] = b;
    plan->b_fft[plan->m - k] = b;
  }
  fft_pow2(plan->b_fft, *radix2_plan(plan->m), false);

  cache.emplace(n, plan);
  return plan;
}

// Forward DFT of a complex sequence, any length.
CVec dft_complex(CVec x) {
  const std::size_t n = x.size();
  if (n == 1) return x;
  if (is_pow2(n)) {
    fft_pow2(x, *radix2_plan(n), false);
    return x;
  }
  const auto plan = bluestein_plan(n);
  const auto m = plan->m;
  CVec a(m, Complex(0.0, 0.0));
  for (std::size_t k = 0; k < n; ++k) a[k] = x[k] * plan->chirp[k];
  const auto mplan = radix2_plan(m);
  fft_pow2(a, *mplan, false);
  for (std::size_t i = 0; i < m; ++i) a[i] *= plan->b_fft[i];
  fft_pow2(a, *mplan, true);
  const double scale = 1.0 / static_cast<double>(m);
  CVec out(n);
  for (std::size_t k = 0; k < n; ++k) out[k] = plan->chirp[k] * a[k] * scale;
  return out;
}

CVec idft_complex(const CVec& spectrum) {
  const std::size_t n = spectrum.size();
  CVec x(n);
  for (std::size_t k = 0; k < n; ++k) x[k] = std::conj(spectrum[k]);
  x = dft_complex(std::move(x));
  const double scale = 1.0 / static_cast<double>(n);
  for (auto& v : x) v = std::conj(v) * scale;
  return x;
}

}  // namespace

std::vector<Complex> dft(std::span<const double> series) {
  if (series.empty()) throw LengthError("dft of an empty series");
  CVec x(series.size());
  for (std::size_t i = 0; i < series.size(); ++i) x[i] = Complex(series[i], 0.0);
  return dft_complex(std::move(x));
}

std::vector<double> idft(std::span<const Complex> spectrum) {
  if (spectrum.empty()) throw LengthError("idft of an empty spectrum");
  const CVec x = idft_complex(CVec(spectrum.begin(), spectrum.end()));
  std::vector<double> out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = x[i].real();
  return out;
}

namespace {

// Frequency of bin k for an N-point transform at fs.
double bin_frequency(std::size_t k, std::size_t n, double fs) {
  const std::size_t folded = std::min(k, n - k);
  return static_cast<double>(folded) * fs / static_cast<double>(n);
}

void split_axis(const std::vector<double>& axis, double fs, double low_cut, double high_cut,
                std::vector<double>& low_out, std::vector<double>& high_out) {
  const std::size_t n = axis.size();
  const bool full_band = high_cut == fs / 2.0;  // no residual above the high band
  const auto spectrum = dft(axis);
  CVec low(n, Complex(0.0, 0.0));
  CVec high(n, Complex(0.0, 0.0));
  for (std::size_t k = 0; k < n; ++k) {
    const double f = bin_frequency(k, n, fs);
    if (f < low_cut)
      low[k] = spectrum[k];
    else if (!full_band && f <= high_cut)
      high[k] = spectrum[k];
  }
  low_out = idft(low);
  if (full_band) {
    // low and high partition the spectrum, so the high band is the exact
    // complement in the time domain.
    high_out.resize(n);
    for (std::size_t i = 0; i < n; ++i) high_out[i] = axis[i] - low_out[i];
  } else {
    high_out = idft(high);
  }
}

}  // namespace

BandDecomposition band_split(const TriaxialSeries& s, double low_cut_hz, double high_cut_hz) {
  if (s.size() == 0) throw LengthError("band_split of an empty series");
  const double nyquist = s.fs_hz / 2.0;
  const double high_cut = std::min(high_cut_hz, nyquist);
  if (!(low_cut_hz > 0.0) || !(low_cut_hz < high_cut))
    throw ParameterError("band cutoffs must satisfy 0 < low < high <= fs/2");

  BandDecomposition out;
  out.high_cut_hz = high_cut;
  out.low.fs_hz = out.high.fs_hz = s.fs_hz;
  split_axis(s.x, s.fs_hz, low_cut_hz, high_cut, out.low.x, out.high.x);
  split_axis(s.y, s.fs_hz, low_cut_hz, high_cut, out.low.y, out.high.y);
  split_axis(s.z, s.fs_hz, low_cut_hz, high_cut, out.low.z, out.high.z);
  return out;
}

TriaxialSeries derivative(const TriaxialSeries& s) {
  const std::size_t n = s.size();
  if (n < 2) throw LengthError("derivative needs at least 2 samples");
  TriaxialSeries out;
  out.fs_hz = s.fs_hz;
  out.x.resize(n - 1);
  out.y.resize(n - 1);
  out.z.resize(n - 1);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    out.x[i] = (s.x[i + 1] - s.x[i]) * s.fs_hz;
    out.y[i] = (s.y[i + 1] - s.y[i]) * s.fs_hz;
    out.z[i] = (s.z[i + 1] - s.z[i]) * s.fs_hz;
  }
  return out;
}

std::vector<double> magnitude_series(const TriaxialSeries& s) {
  std::vector<double> out(s.size());
  for (std::size_t i = 0; i < s.size(); ++i)
    out[i] = std::sqrt(s.x[i] * s.x[i] + s.y[i] * s.y[i] + s.z[i] * s.z[i]);
  return out;
}

}  // namespace emrec
