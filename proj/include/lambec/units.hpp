#pragma once

#include <cmath>
#include <numbers>
#include <string>

#include "errors.hpp"

namespace lambec {

inline constexpr double pi = std::numbers::pi;
inline constexpr double two_pi = 2.0 * std::numbers::pi;

// SI constants. Energies in the quantum modules are angular frequencies
// (hbar = 1); hbar is only used where fields are converted to rates.
struct PhysicalConstants {
    double c = 299792458.0;
    double epsilon0 = 8.8541878128e-12;
    double hbar = 1.054571817e-34;
    static constexpr bool energies_are_angular_frequencies = true;
};

inline constexpr PhysicalConstants si{};

inline constexpr double hz_to_rad(double f_over_2pi) { return two_pi * f_over_2pi; }
inline constexpr double rad_to_hz(double w) { return w / two_pi; }

// Unit helpers for the quantities quoted in cgs-flavoured lab units.
inline constexpr double per_cm3_to_per_m3(double n) { return n * 1e6; }
inline constexpr double mw_per_cm2_to_w_per_m2(double i) { return i * 10.0; }
inline constexpr double uw_per_cm2_to_w_per_m2(double i) { return i * 1e-2; }

// Integer or half-integer value stored as twice its value.
class HalfInteger {
public:
    constexpr HalfInteger() = default;
    static constexpr HalfInteger from_twice(int twice) { return HalfInteger(twice); }

    static HalfInteger from_double(double v) {
        const double t = 2.0 * v;
        const double rt = std::round(t);
        if (!std::isfinite(v) || std::abs(t - rt) > 1e-9)
            throw DomainError("value " + std::to_string(v) + " is not a half-integer");
        return HalfInteger(static_cast<int>(rt));
    }

    constexpr int twice() const { return twice_; }
    constexpr double value() const { return 0.5 * twice_; }
    constexpr bool is_integer() const { return twice_ % 2 == 0; }

    friend constexpr bool operator==(HalfInteger, HalfInteger) = default;
    friend constexpr auto operator<=>(HalfInteger, HalfInteger) = default;

private:
    constexpr explicit HalfInteger(int twice) : twice_(twice) {}
    int twice_ = 0;
};

}  // namespace lambec
