#pragma once

#include "sbneuro/device.hpp"
#include "sbneuro/iv_curve.hpp"

#include <span>
#include <vector>

namespace sbneuro {

// =============================================================================
// SB-MOSFET compact model
//
// The device is a source Schottky diode, forward oriented along the drain
// current path, in series with the geometric channel resistance
// R_ch = rho_sheet * l_g / w and the external r_sd_ext. The gate terminals
// act only through the effective barrier height. All functions are pure.
// =============================================================================

/// Effective source barrier in eV:
///   max(phi_min, phi_b0 - gamma_tg*(v_tg - v_t0) - gamma_bg*v_bg).
/// Continuous and non-increasing in both gate voltages.
double effective_barrier(const DeviceParams& params, const BiasPoint& bias);

/// Thermionic saturation current a_eff * a_star * T^2 * exp(-phi/kT), in A.
double saturation_current(const DeviceParams& params, double phi_eff_ev);

/// Thermionic-emission diode law
///   I = I_sat(phi_eff) * (exp(v_junction / (n*kT/q)) - 1).
/// Sign follows v_junction. Exponent arguments are clamped to
/// +/- k_max_exp_arg, so the output saturates instead of overflowing.
double diode_current(const DeviceParams& params, double phi_eff_ev, double v_junction);

/// Constant gate/box leakage magnitude. Kept separate from the drain current.
double gate_leakage(const DeviceParams& params);

/// Drain current solving the series network
///   v_ds = v_diode(I) + I * (R_ch + r_sd_ext)
/// by safeguarded Newton iteration on a bracketing interval.
/// Exactly 0 at v_ds = 0; deterministic; the KVL residual of the returned
/// current is below 1e-15 * max(1, |v_ds|) volts. Monotone non-decreasing in
/// v_tg and v_ds. Throws NonConvergence if the 100-iteration cap is hit.
double drain_current(const DeviceParams& params, const BiasPoint& bias);

/// KVL residual v_ds - v_diode(i) - i*R in volts for an externally supplied
/// current. Lets callers re-check a solution independently of the solver.
double series_kvl_residual(const DeviceParams& params, const BiasPoint& bias, double i);

/// I_D over a strictly monotone v_tg sweep at fixed v_bg, v_ds.
IVCurve transfer_curve(const DeviceParams& params, std::span<const double> v_tg_sweep,
                       double v_bg, double v_ds);

/// I_D over a strictly monotone v_ds sweep at fixed v_tg, v_bg.
IVCurve output_curve(const DeviceParams& params, std::span<const double> v_ds_sweep,
                     double v_tg, double v_bg);

struct LengthScalingPoint {
    double inv_l_g; // 1/m
    double i_on;    // A
};

/// ON current versus inverse gate length, evaluated with l_g substituted
/// into the params. In the channel-resistance-limited regime (see
/// channel_limited_bias) the points fall on a line through the origin up to
/// the r_sd_ext correction.
std::vector<LengthScalingPoint> ion_vs_inverse_length(const DeviceParams& params,
                                                      std::span<const double> lengths,
                                                      const BiasPoint& bias);

/// Bias preset that drives the barrier to its floor so the channel resistor
/// dominates: deep top-gate overdrive, moderate drain bias.
BiasPoint channel_limited_bias();

struct VtShiftOptions {
    double i_crit = 1e-9;   // A, constant-current threshold criterion
    double v_ds = 0.2;      // V, drain probe bias
    double v_tg_min = -20.0; // V, bisection window
    double v_tg_max = 20.0;  // V
    double tol_v = 1e-10;    // V, bisection resolution
};

/// Shift of the constant-current threshold voltage at v_bg relative to
/// v_bg = 0, found by bisection on v_tg. Throws ThresholdOutOfRange when
/// i_crit is not crossed inside the window.
double back_gate_vt_shift(const DeviceParams& params, double v_bg,
                          const VtShiftOptions& options = {});

} // namespace sbneuro
