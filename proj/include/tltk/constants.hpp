#pragma once

// Physical constants (CODATA 2018) and common unit factors. All internal
// quantities are SI; unit conversion happens only at the configuration and
// serialization boundaries.

namespace tltk::constants {

inline constexpr double h = 6.62607015e-34;          // Planck constant, J s (exact)
inline constexpr double hbar = h / 6.283185307179586476925286766559;  // J s
inline constexpr double c = 299792458.0;             // speed of light, m/s (exact)
inline constexpr double eps0 = 8.8541878128e-12;     // vacuum permittivity, F/m
inline constexpr double e_charge = 1.602176634e-19;  // elementary charge, C (exact)
inline constexpr double m_electron = 9.1093837015e-31;  // electron mass, kg
inline constexpr double dalton = 1.66053906660e-27;  // atomic mass unit, kg

inline constexpr double pi = 3.14159265358979323846;

// Unit factors.
inline constexpr double kDa = 1000.0 * dalton;       // kilodalton in kg
inline constexpr double eV = e_charge;               // electronvolt in J
inline constexpr double angstrom3 = 1e-30;           // cubic angstrom in m^3

// Sodium bulk properties used for default cluster species.
inline constexpr double sodium_atom_mass = 22.98977 * dalton;  // kg
inline constexpr double sodium_density = 968.0;                // kg/m^3

}  // namespace tltk::constants
