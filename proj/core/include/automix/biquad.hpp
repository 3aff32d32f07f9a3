#pragma once

#include <complex>
#include <span>
#include <vector>

namespace automix {

/// Normalised second-order section (a0 == 1).
struct Biquad {
  double b0 = 1.0, b1 = 0.0, b2 = 0.0;
  double a1 = 0.0, a2 = 0.0;

  /// H(e^{jw}) at frequency `hz` for sample rate `fs`.
  std::complex<double> response(double hz, double fs) const;
  double magnitude_db(double hz, double fs) const;

  friend bool operator==(const Biquad&, const Biquad&) = default;
};

/// Filters `samples` in place (transposed direct form II, zero initial state).
void filter_in_place(const Biquad& section, std::span<double> samples);

std::vector<double> filter(const Biquad& section, std::span<const double> in);

}  // namespace automix
