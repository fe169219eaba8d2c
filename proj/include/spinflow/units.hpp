#pragma once

// Physical constants and the unit conventions used throughout the library.
//
// Internally everything is expressed in SI angular frequencies (rad/s) with
// hbar = k_B = 1, i.e. energies and temperatures are angular frequencies.
// Config files and CSV outputs use ordinary frequencies (Hz, kHz, MHz),
// masses in amu, wavelengths in nm and temperatures in mK; conversions live
// here and nowhere else.

#include <cmath>

namespace spinflow::units {

inline constexpr double pi = 3.14159265358979323846;
inline constexpr double two_pi = 2.0 * pi;

// CODATA 2018
inline constexpr double hbar = 1.054571817e-34;        // J s
inline constexpr double k_boltzmann = 1.380649e-23;    // J/K
inline constexpr double amu = 1.66053906660e-27;       // kg
inline constexpr double elementary_charge = 1.602176634e-19;  // C
inline constexpr double epsilon0 = 8.8541878128e-12;   // F/m

// e^2 / (4 pi eps0), J m
inline constexpr double coulomb_energy_m =
    elementary_charge * elementary_charge / (4.0 * pi * epsilon0);

constexpr double hz_to_rad(double f_hz) { return two_pi * f_hz; }
constexpr double rad_to_hz(double w) { return w / two_pi; }
constexpr double khz_to_rad(double f_khz) { return two_pi * 1e3 * f_khz; }
constexpr double mhz_to_rad(double f_mhz) { return two_pi * 1e6 * f_mhz; }
constexpr double amu_to_kg(double m) { return m * amu; }
constexpr double nm_to_m(double l) { return l * 1e-9; }

// Temperature of a mode at angular frequency w (rad/s) with mean occupation
// nbar, in kelvin: k_B T = hbar w / log((nbar+1)/nbar).
inline double mode_temperature_K(double omega, double nbar) {
  if (nbar <= 0.0) return 0.0;
  return hbar * omega / (k_boltzmann * std::log((nbar + 1.0) / nbar));
}

inline double kelvin_to_mK(double t) { return t * 1e3; }

// Bose-Einstein occupation of a mode at angular frequency w for temperature
// T in kelvin.
inline double bose_occupation(double omega, double temperature_K) {
  if (temperature_K <= 0.0) return 0.0;
  const double x = hbar * omega / (k_boltzmann * temperature_K);
  return 1.0 / std::expm1(x);
}

// Coulomb length scale l = (e^2 / (4 pi eps0 M w_z^2))^(1/3) for reference
// mass M (kg) and axial angular frequency w_z (rad/s).
inline double coulomb_length_m(double mass_kg, double omega_z) {
  return std::cbrt(coulomb_energy_m / (mass_kg * omega_z * omega_z));
}

// Lamb-Dicke parameter eta = k * sqrt(hbar / (2 m w)) for wavevector
// projection k (1/m), mass m (kg) and mode angular frequency w (rad/s).
inline double lamb_dicke(double k, double mass_kg, double omega) {
  return k * std::sqrt(hbar / (2.0 * mass_kg * omega));
}

}  // namespace spinflow::units
