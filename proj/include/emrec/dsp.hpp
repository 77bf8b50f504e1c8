#pragma once

#include <complex>
#include <span>
#include <vector>

#include "emrec/types.hpp"

namespace emrec {

// Full-length complex DFT of a real series. Any length >= 1 is supported
// (radix-2 FFT for powers of two, Bluestein's algorithm otherwise).
std::vector<std::complex<double>> dft(std::span<const double> series);

// Inverse DFT; returns the real part, the ~1e-9 imaginary residue of a
// masked real spectrum is discarded.
std::vector<double> idft(std::span<const std::complex<double>> spectrum);

struct BandDecomposition {
  TriaxialSeries low;   // |f| <  low_cut, DC included
  TriaxialSeries high;  // low_cut <= |f| <= high_cut
  double high_cut_hz = 0.0;
};

// Brick-wall spectral split per axis. The requested high cutoff is clamped
// to Nyquist; a bin at exactly low_cut belongs to the high band.
// low + high reconstructs the input wherever high_cut == fs/2; otherwise the
// residual above high_cut completes it.
BandDecomposition band_split(const TriaxialSeries& s, double low_cut_hz = 0.3,
                             double high_cut_hz = 20.0);

// First difference scaled by fs: out[i] = (in[i+1] - in[i]) * fs.
// Output is one sample shorter than the input.
TriaxialSeries derivative(const TriaxialSeries& s);

// Per-sample Euclidean norm sqrt(x^2 + y^2 + z^2).
std::vector<double> magnitude_series(const TriaxialSeries& s);

}  // namespace emrec
