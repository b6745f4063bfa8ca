#pragma once

#include <compare>
#include <numbers>

namespace afmgate {

inline constexpr double two_pi = 2.0 * std::numbers::pi;

/// Angular frequency stored in rad/us (hbar = 1, time in us).
///
/// Laboratory values are quoted as ordinary frequencies ("2 pi x 8 MHz");
/// from_mhz / from_khz apply the 2 pi on ingestion, mhz() undoes it.
class Frequency {
 public:
  constexpr Frequency() = default;

  static constexpr Frequency from_rad_per_us(double w) { return Frequency{w}; }
  static constexpr Frequency from_mhz(double f) { return Frequency{two_pi * f}; }
  static constexpr Frequency from_khz(double f) { return from_mhz(1e-3 * f); }

  constexpr double value() const { return value_; }
  constexpr double mhz() const { return value_ / two_pi; }
  constexpr double khz() const { return 1e3 * mhz(); }

  constexpr Frequency operator-() const { return Frequency{-value_}; }
  constexpr Frequency operator+(Frequency o) const { return Frequency{value_ + o.value_}; }
  constexpr Frequency operator-(Frequency o) const { return Frequency{value_ - o.value_}; }
  constexpr Frequency operator*(double s) const { return Frequency{value_ * s}; }
  constexpr Frequency operator/(double s) const { return Frequency{value_ / s}; }
  constexpr double operator/(Frequency o) const { return value_ / o.value_; }
  friend constexpr Frequency operator*(double s, Frequency f) { return f * s; }

  constexpr auto operator<=>(const Frequency&) const = default;

 private:
  constexpr explicit Frequency(double w) : value_(w) {}
  double value_ = 0.0;
};

namespace literals {
constexpr Frequency operator""_MHz(long double f) {
  return Frequency::from_mhz(static_cast<double>(f));
}
constexpr Frequency operator""_MHz(unsigned long long f) {
  return Frequency::from_mhz(static_cast<double>(f));
}
constexpr Frequency operator""_kHz(long double f) {
  return Frequency::from_khz(static_cast<double>(f));
}
}  // namespace literals

}  // namespace afmgate
