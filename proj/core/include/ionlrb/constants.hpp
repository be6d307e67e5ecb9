// constants.hpp — physical constants and ion species data (SI units)

#pragma once

#include <stdexcept>
#include <string>

namespace ionlrb::constants {

inline constexpr double pi = 3.14159265358979323846;
inline constexpr double two_pi = 2.0 * pi;

inline constexpr double amu_kg = 1.66053906660e-27;
inline constexpr double elementary_charge = 1.602176634e-19;
inline constexpr double coulomb_constant = 8.9875517873681764e9;  // 1/(4 pi eps0)

// e^2 / (4 pi eps0), J*m
inline constexpr double e0_squared =
    elementary_charge * elementary_charge * coulomb_constant;

// Hz (frequency/2pi) -> rad/s
inline constexpr double hz_to_rad(double f_hz) { return two_pi * f_hz; }
inline constexpr double rad_to_hz(double w) { return w / two_pi; }

inline double ion_mass_kg(const std::string& species) {
    if (species == "9Be+") return 9.012183065 * amu_kg;
    if (species == "25Mg+") return 24.985836976 * amu_kg;
    if (species == "40Ca+") return 39.962590863 * amu_kg;
    if (species == "171Yb+") return 170.9363302 * amu_kg;
    throw std::invalid_argument("unknown ion species: " + species);
}

}  // namespace ionlrb::constants
