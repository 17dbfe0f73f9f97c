#pragma once

#include <numbers>
#include <string>
#include <string_view>

namespace cqed {

/// Physical constants (exact SI values where defined).
namespace constants {
inline constexpr double c = 299792458.0;           // m/s
inline constexpr double h = 6.62607015e-34;        // J s
inline constexpr double hbar = h / (2.0 * std::numbers::pi);
inline constexpr double k_B = 1.380649e-23;        // J/K
inline constexpr double e = 1.602176634e-19;       // C
inline constexpr double G_Q = 2.0 * e * e / h;     // conductance quantum, S
}  // namespace constants

inline constexpr double two_pi = 2.0 * std::numbers::pi;

/// Ordinary frequency (Hz) to angular frequency (rad/s).
constexpr double angular(double hz) { return two_pi * hz; }
constexpr double ordinary(double rad_per_s) { return rad_per_s / two_pi; }

enum class Dimension { Length, Frequency, Time, Temperature, Resistance, Dimensionless };

/// Parses a quantity with an optional SI prefix and unit, e.g. "4.76mm",
/// "7GHz", "86us", "1.31K", "50ohm", "1.2%". A bare number is accepted and
/// taken in base units. Throws ValidationError on malformed input or a unit
/// that does not match `dim`.
double parse_quantity(std::string_view text, Dimension dim);

std::string_view dimension_name(Dimension dim);

}  // namespace cqed
