#include "automix/biquad.hpp"

#include <cmath>
#include <numbers>

namespace automix {

std::complex<double> Biquad::response(double hz, double fs) const {
  const double w = 2.0 * std::numbers::pi * hz / fs;
  const std::complex<double> z1 = std::polar(1.0, -w);
  const std::complex<double> z2 = z1 * z1;
  return (b0 + b1 * z1 + b2 * z2) / (1.0 + a1 * z1 + a2 * z2);
}

double Biquad::magnitude_db(double hz, double fs) const {
  return 20.0 * std::log10(std::abs(response(hz, fs)));
}

void filter_in_place(const Biquad& s, std::span<double> samples) {
  double z1 = 0.0, z2 = 0.0;
  for (double& x : samples) {
    const double in = x;
    const double y = s.b0 * in + z1;
    z1 = s.b1 * in - s.a1 * y + z2;
    z2 = s.b2 * in - s.a2 * y;
    x = y;
  }
}

std::vector<double> filter(const Biquad& section, std::span<const double> in) {
  std::vector<double> out(in.begin(), in.end());
  filter_in_place(section, out);
  return out;
}

}  // namespace automix
