#include "sbneuro/sb_model.hpp"

#include "sbneuro/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace sbneuro {

namespace {

// Keeps the diode inverse n*vT*ln1p(I/i_sat) well defined even when the
// barrier exponential underflows.
constexpr double k_min_saturation_current = 1e-300;

double clamp_exp_arg(double x)
{
    return std::clamp(x, -k_max_exp_arg, k_max_exp_arg);
}

std::string bias_to_string(const BiasPoint& b)
{
    return "(v_tg=" + std::to_string(b.v_tg) + ", v_bg=" + std::to_string(b.v_bg) +
           ", v_ds=" + std::to_string(b.v_ds) + ")";
}

} // namespace

double effective_barrier(const DeviceParams& params, const BiasPoint& bias)
{
    double phi = params.phi_b0 - params.gamma_tg * (bias.v_tg - params.v_t0) -
                 params.gamma_bg * bias.v_bg;
    return std::max(params.phi_min, phi);
}

double saturation_current(const DeviceParams& params, double phi_eff_ev)
{
    // kT/q in volts equals kT in eV, so phi/vT is the dimensionless exponent.
    const double vt = params.thermal_voltage();
    const double prefactor =
        params.a_eff * params.a_star * params.temperature * params.temperature;
    double i_sat = prefactor * std::exp(clamp_exp_arg(-phi_eff_ev / vt));
    return std::max(i_sat, k_min_saturation_current);
}

double diode_current(const DeviceParams& params, double phi_eff_ev, double v_junction)
{
    if (phi_eff_ev < 0.0) {
        throw InvalidParams("diode_current: phi_eff must be >= 0");
    }
    const double n_vt = params.n_ideality * params.thermal_voltage();
    const double i_sat = saturation_current(params, phi_eff_ev);
    double i = i_sat * std::expm1(clamp_exp_arg(v_junction / n_vt));
    if (!std::isfinite(i)) {
        i = std::copysign(std::numeric_limits<double>::max(), v_junction);
    }
    return i;
}

double gate_leakage(const DeviceParams& params)
{
    return params.i_gate_leak;
}

double series_kvl_residual(const DeviceParams& params, const BiasPoint& bias, double i)
{
    const double n_vt = params.n_ideality * params.thermal_voltage();
    const double i_sat = saturation_current(params, effective_barrier(params, bias));
    return bias.v_ds - n_vt * std::log1p(i / i_sat) - i * params.series_resistance();
}

namespace {

// Safeguarded Newton on a monotone residual with a maintained bracket.
// Starts at `x0` (an endpoint), bisects whenever the Newton step leaves the
// bracket, and accepts once |f| <= tol. Throws NonConvergence on the
// iteration cap.
template <typename F, typename DF>
double solve_monotone(F&& f, DF&& df, double lo, double hi, double x0, double tol,
                      const std::string& what)
{
    double x = x0;
    double fx = f(x);
    constexpr int k_max_iter = 100;
    for (int iter = 0; iter < k_max_iter; ++iter) {
        if (std::abs(fx) <= tol) {
            return x;
        }
        if (fx > 0.0) {
            hi = x;
        } else {
            lo = x;
        }
        double x_next = x - fx / df(x);
        if (!(x_next > lo) || !(x_next < hi)) {
            x_next = 0.5 * (lo + hi); // bisect when Newton leaves the bracket
        }
        if (x_next == x) {
            break; // interval exhausted at double resolution
        }
        x = x_next;
        fx = f(x);
    }
    if (std::abs(fx) <= tol) {
        return x;
    }
    // The bracket may collapse to adjacent doubles with the residual a few
    // ULP above tol; accept only near-converged solutions.
    if (std::abs(fx) <= 16.0 * tol) {
        return x;
    }
    throw NonConvergence(what + ": no convergence, residual " + std::to_string(fx) + " V", fx);
}

} // namespace

double drain_current(const DeviceParams& params, const BiasPoint& bias)
{
    params.validate();
    const double v_ds = bias.v_ds;
    if (v_ds == 0.0) {
        return 0.0;
    }

    const double phi = effective_barrier(params, bias);
    const double r_series = params.series_resistance();
    if (r_series == 0.0) {
        return diode_current(params, phi, v_ds);
    }

    const double n_vt = params.n_ideality * params.thermal_voltage();
    const double i_sat = saturation_current(params, phi);
    const double tol = 1e-15 * std::max(1.0, std::abs(v_ds));
    const std::string what = "drain_current at bias " + bias_to_string(bias);

    if (v_ds > 0.0) {
        // Forward drive: the current is the well-conditioned unknown.
        // Residual is increasing and concave in i, so starting at the upper
        // endpoint the first Newton step lands left of the root and the
        // iteration then climbs monotonically.
        auto f = [&](double i) { return n_vt * std::log1p(i / i_sat) + i * r_series - v_ds; };
        auto df = [&](double i) { return n_vt / (i_sat + i) + r_series; };
        double i_diode_only = i_sat * std::expm1(std::min(v_ds / n_vt, 710.0));
        double hi = std::min(v_ds / r_series, i_diode_only); // min() discards an inf
        return solve_monotone(f, df, 0.0, hi, hi, tol, what);
    }

    // Reverse drive: the diode saturates and the current collapses onto
    // -i_sat, so solve for the junction voltage u instead and map back.
    // g is increasing and convex in u; Newton from the lower endpoint
    // (g < 0) climbs monotonically.
    auto diode_i = [&](double u) { return i_sat * std::expm1(u / n_vt); };
    auto g = [&](double u) { return u + diode_i(u) * r_series - v_ds; };
    auto dg = [&](double u) { return 1.0 + (i_sat * r_series / n_vt) * std::exp(u / n_vt); };
    double u = solve_monotone(g, dg, v_ds, 0.0, v_ds, tol, what);
    return diode_i(u);
}

namespace {

void check_sweep(std::span<const double> sweep, const char* name)
{
    if (sweep.empty()) {
        throw InputError(std::string(name) + ": sweep must be non-empty");
    }
    for (size_t i = 1; i < sweep.size(); ++i) {
        double d = sweep[i] - sweep[i - 1];
        double d0 = sweep[1] - sweep[0];
        if (d == 0.0 || (d > 0.0) != (d0 > 0.0)) {
            throw InputError(std::string(name) + ": sweep must be strictly monotone");
        }
    }
}

} // namespace

IVCurve transfer_curve(const DeviceParams& params, std::span<const double> v_tg_sweep,
                       double v_bg, double v_ds)
{
    check_sweep(v_tg_sweep, "transfer_curve");
    IVCurve curve;
    curve.records.reserve(v_tg_sweep.size());
    curve.meta["sweep"] = "v_tg";
    for (double v_tg : v_tg_sweep) {
        BiasPoint bias{v_tg, v_bg, v_ds};
        try {
            curve.records.push_back({bias, drain_current(params, bias)});
        } catch (const NonConvergence& e) {
            throw NonConvergence("transfer_curve at " + bias_to_string(bias) + ": " + e.what(),
                                 e.residual);
        }
    }
    return curve;
}

IVCurve output_curve(const DeviceParams& params, std::span<const double> v_ds_sweep,
                     double v_tg, double v_bg)
{
    check_sweep(v_ds_sweep, "output_curve");
    IVCurve curve;
    curve.records.reserve(v_ds_sweep.size());
    curve.meta["sweep"] = "v_ds";
    for (double v_ds : v_ds_sweep) {
        BiasPoint bias{v_tg, v_bg, v_ds};
        try {
            curve.records.push_back({bias, drain_current(params, bias)});
        } catch (const NonConvergence& e) {
            throw NonConvergence("output_curve at " + bias_to_string(bias) + ": " + e.what(),
                                 e.residual);
        }
    }
    return curve;
}

std::vector<LengthScalingPoint> ion_vs_inverse_length(const DeviceParams& params,
                                                      std::span<const double> lengths,
                                                      const BiasPoint& bias)
{
    std::vector<LengthScalingPoint> points;
    points.reserve(lengths.size());
    for (double l : lengths) {
        if (!(l > 0.0)) {
            throw InputError("ion_vs_inverse_length: lengths must be positive");
        }
        DeviceParams p = params;
        p.l_g = l;
        points.push_back({1.0 / l, drain_current(p, bias)});
    }
    return points;
}

BiasPoint channel_limited_bias()
{
    // Deep overdrive clamps the barrier at phi_min; 0.5 V across a
    // megaohm-scale channel keeps the diode drop microscopic.
    return BiasPoint{10.0, 0.0, 0.5};
}

namespace {

double constant_current_vt(const DeviceParams& params, double v_bg,
                           const VtShiftOptions& opt)
{
    auto current_at = [&](double v_tg) {
        return drain_current(params, BiasPoint{v_tg, v_bg, opt.v_ds});
    };
    double lo = opt.v_tg_min;
    double hi = opt.v_tg_max;
    double i_lo = current_at(lo);
    double i_hi = current_at(hi);
    if (!(i_lo <= opt.i_crit && opt.i_crit <= i_hi)) {
        throw ThresholdOutOfRange(
            "back_gate_vt_shift: I_crit not crossed in [" + std::to_string(lo) + ", " +
            std::to_string(hi) + "] V at v_bg = " + std::to_string(v_bg));
    }
    while (hi - lo > opt.tol_v) {
        double mid = 0.5 * (lo + hi);
        if (current_at(mid) < opt.i_crit) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

} // namespace

double back_gate_vt_shift(const DeviceParams& params, double v_bg,
                          const VtShiftOptions& options)
{
    params.validate();
    if (v_bg == 0.0) {
        return 0.0;
    }
    double vt_at_bias = constant_current_vt(params, v_bg, options);
    double vt_at_zero = constant_current_vt(params, 0.0, options);
    return vt_at_bias - vt_at_zero;
}

} // namespace sbneuro
