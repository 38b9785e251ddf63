#ifndef OPTOMECH_CONSTANTS_HPP
#define OPTOMECH_CONSTANTS_HPP

namespace optomech {

// CODATA 2018 exact / recommended values.
inline constexpr double k_hbar = 1.054571817e-34;     // J s
inline constexpr double k_boltzmann = 1.380649e-23;   // J/K
inline constexpr double k_speed_of_light = 299792458.0; // m/s
inline constexpr double k_elementary_charge = 1.602176634e-19; // C

// Local gravitational acceleration used throughout the mechanics.
inline constexpr double k_g_earth = 9.80; // m/s^2

inline constexpr double k_pi = 3.14159265358979323846;
inline constexpr double k_two_pi = 2.0 * k_pi;

} // namespace optomech

#endif
