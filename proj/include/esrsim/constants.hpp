#pragma once

#include <numbers>

namespace esrsim::constants {

inline constexpr double pi = std::numbers::pi;
inline constexpr double two_pi = 2.0 * pi;

// CODATA 2018, SI units.
inline constexpr double planck_h = 6.62607015e-34;         // J s
inline constexpr double hbar = 1.054571817e-34;            // J s
inline constexpr double bohr_magneton = 9.2740100783e-24;  // J/T
inline constexpr double boltzmann = 1.380649e-23;          // J/K

}  // namespace esrsim::constants

namespace esrsim {

// All internal frequencies and rates are angular (rad/s); user-facing I/O is
// in Hz. These two helpers are the only sanctioned 2*pi boundary.
inline constexpr double hz_to_angular(double f_hz) { return constants::two_pi * f_hz; }
inline constexpr double angular_to_hz(double omega) { return omega / constants::two_pi; }

}  // namespace esrsim
