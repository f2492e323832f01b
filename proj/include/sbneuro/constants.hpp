#pragma once

namespace sbneuro {

// CODATA 2018 values.
inline constexpr double k_elementary_charge = 1.602176634e-19;    // C
inline constexpr double k_boltzmann = 1.380649e-23;               // J/K
inline constexpr double k_vacuum_permittivity = 8.8541878128e-12; // F/m

/// kT/q in volts. Numerically equal to kT expressed in eV.
inline double thermal_voltage(double temperature_k)
{
    return k_boltzmann * temperature_k / k_elementary_charge;
}

// Arguments to std::exp are clamped to this magnitude so that saturated
// exponentials stay finite instead of overflowing to inf.
inline constexpr double k_max_exp_arg = 500.0;

} // namespace sbneuro
