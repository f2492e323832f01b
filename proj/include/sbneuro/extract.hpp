#pragma once

#include "sbneuro/device.hpp"
#include "sbneuro/iv_curve.hpp"
#include "sbneuro/vccs.hpp"

#include <set>
#include <span>
#include <string>
#include <vector>

namespace sbneuro {

// =============================================================================
// Parameter extraction from measured or synthetic I-V sweeps
// =============================================================================

struct GmPoint {
    double v_tg = 0.0; // V
    double g_m = 0.0;  // S
};

struct MobilityPoint {
    double v_tg = 0.0;   // V
    double mu_eff = 0.0; // m^2/(V s)
};

/// Central differences dI_D/dV_TG at the interior points of a transfer curve.
/// Requires >= 3 records, strictly monotone v_tg, fixed v_bg and v_ds.
std::vector<GmPoint> compute_gm(const IVCurve& curve);

struct MobilityGeometry {
    double l_g = 0.0;        // m
    double w = 0.0;          // m
    double c_ox_areal = 0.0; // F/m^2
};

/// Linear-region transconductance method:
///   mu_eff = g_m * l_g / (w * c_ox_areal * v_ds).
/// Assumes small v_ds (not enforced). Throws ZeroVds.
std::vector<MobilityPoint> extract_mobility(std::span<const GmPoint> gm,
                                            const MobilityGeometry& geom, double v_ds);

struct RsdResult {
    double r_sd = 0.0;      // ohm, intercept of R_tot vs 1/overdrive
    double slope = 0.0;     // ohm*V
    double r_squared = 0.0; // of the extrapolation line
    std::vector<double> r_tot; // per-curve low-v_ds total resistance
};

/// Total-resistance extrapolation: per-curve low-v_ds slope R_tot fitted
/// against 1/(v_tg - v_t); the intercept is R_SD. Each curve must hold v_tg
/// fixed; >= 3 distinct overdrives required.
RsdResult extract_rsd(std::span<const IVCurve> low_vds_curves, double v_t = 0.0);

/// Threshold voltage by linear extrapolation of the tangent at the
/// maximum-g_m point to i_d = 0. Tie-break: smallest v_tg among equal
/// maxima. Throws DegenerateFit when g_m vanishes everywhere.
double extract_vt(const IVCurve& curve);

/// Aggregate of the per-curve extractions; mirrors the standard device
/// characterization summary.
struct ExtractedParams {
    std::vector<GmPoint> gm_curve;
    std::vector<MobilityPoint> mu_eff_curve;
    double r_sd = 0.0;        // ohm
    double v_t_extracted = 0.0; // V
    double c_ox_areal = 0.0;  // F/m^2
};

/// Runs compute_gm, extract_mobility, extract_vt and extract_rsd on one
/// transfer curve plus a family of low-v_ds output curves.
ExtractedParams characterize(const IVCurve& transfer, std::span<const IVCurve> low_vds_curves,
                             const DeviceParams& geometry);

// -----------------------------------------------------------------------------
// Compact-model calibration
// -----------------------------------------------------------------------------

struct FitOptions {
    int max_iterations = 200;
    double rel_tolerance = 1e-9;   // stop when the accepted-step RMS change is below this
    double i_floor = 1e-14;        // A, floor inside the log-current residual
    double lambda0 = 1e-3;         // initial damping
};

struct FitReport {
    DeviceParams fitted;
    double residual_rms_log = 0.0; // RMS of log10-current residuals
    int iterations = 0;
    bool converged = false;
    std::vector<double> residuals;        // per point, at the fitted params
    std::vector<double> residual_history; // RMS after every accepted step
};

/// Names accepted in fit_device's free set.
const std::set<std::string>& fittable_param_names();

/// Damped least squares on log10(|i| + i_floor) residuals with a
/// finite-difference Jacobian; damping x10 on a rejected step, /10 on an
/// accepted one; bound constraints enforced by projection. Returns the
/// best-so-far params with converged = false instead of throwing when the
/// iteration cap is hit.
FitReport fit_device(std::span<const IVCurve> curves, const DeviceParams& initial,
                     const std::set<std::string>& free_names, const FitOptions& options = {});

/// Least-squares continuous piecewise-linear fit of i_d(v_tg) on n_knots
/// uniformly spaced knots, then isotonic (non-decreasing) and non-negativity
/// projection. The curve must hold v_bg and v_ds fixed.
VccsModel fit_vccs(const IVCurve& curve, int n_knots);

// -----------------------------------------------------------------------------
// Small shared statistics helpers
// -----------------------------------------------------------------------------

struct LineFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r_squared = 0.0;
};

LineFit linear_fit(std::span<const double> x, std::span<const double> y);

/// Pool-adjacent-violators: the least-squares non-decreasing sequence.
std::vector<double> isotonic_non_decreasing(std::span<const double> values);

} // namespace sbneuro
