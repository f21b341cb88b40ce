#pragma once

#include <numbers>

namespace casimir::units {

inline constexpr double pi = std::numbers::pi;
inline constexpr double hbar = 1.054571817e-34;        // J s
inline constexpr double boltzmann = 1.380649e-23;      // J/K
inline constexpr double speed_of_light = 299792458.0;  // m/s
inline constexpr double epsilon0 = 8.8541878128e-12;   // F/m

/// 1 eV expressed as an angular frequency. All frequencies inside the library are rad/s;
/// this is the only place eV enters.
inline constexpr double ev_to_rad_per_s = 1.519267e15;

inline constexpr double nm = 1e-9;
inline constexpr double um = 1e-6;

constexpr double from_ev(double ev) { return ev * ev_to_rad_per_s; }
constexpr double to_ev(double omega) { return omega / ev_to_rad_per_s; }

}  // namespace casimir::units
