#pragma once

#include <cmath>
#include <span>
#include <vector>

#include "emrec/rng.hpp"
#include "emrec/types.hpp"

namespace emrec::test {

// Relative comparison with a tiny absolute floor for near-zero values.
inline bool rel_close(double a, double b, double tol) {
  return std::abs(a - b) <= tol * std::max(std::abs(a), std::abs(b)) + 1e-12;
}

inline std::vector<double> random_series(Rng& rng, std::size_t n, double lo = -1.0,
                                         double hi = 1.0) {
  std::vector<double> v(n);
  for (auto& x : v) x = rng.next_range(lo, hi);
  return v;
}

inline TriaxialSeries random_triaxial(Rng& rng, std::size_t n, double fs = 30.0) {
  TriaxialSeries s;
  s.fs_hz = fs;
  s.x = random_series(rng, n);
  s.y = random_series(rng, n);
  s.z = random_series(rng, n);
  return s;
}

inline TriaxialSeries series_of(double fs, std::size_t n,
                                double (*fx)(double), double (*fy)(double),
                                double (*fz)(double)) {
  TriaxialSeries s;
  s.fs_hz = fs;
  s.x.resize(n);
  s.y.resize(n);
  s.z.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) / fs;
    s.x[i] = fx(t);
    s.y[i] = fy(t);
    s.z[i] = fz(t);
  }
  return s;
}

inline Segment make_segment(TriaxialSeries chest, TriaxialSeries thigh,
                            Label label = Label::kLyingNoEm) {
  Segment seg;
  seg.patient_id = "test";
  seg.minute_index = 0;
  seg.offset_s = 0.0;
  seg.chest = std::move(chest);
  seg.thigh = std::move(thigh);
  seg.label = label;
  return seg;
}

}  // namespace emrec::test
