#include "sbneuro/extract.hpp"

#include "sbneuro/errors.hpp"
#include "sbneuro/sb_model.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

namespace sbneuro {

namespace {

void require_fixed_drain_and_backgate(const IVCurve& curve, const char* who)
{
    for (size_t i = 1; i < curve.records.size(); ++i) {
        if (curve.records[i].bias.v_bg != curve.records[0].bias.v_bg ||
            curve.records[i].bias.v_ds != curve.records[0].bias.v_ds) {
            throw NonUniformBias(std::string(who) + ": v_bg and v_ds must be fixed");
        }
    }
}

void require_monotone_vtg(const IVCurve& curve, const char* who)
{
    for (size_t i = 1; i < curve.records.size(); ++i) {
        double d = curve.records[i].bias.v_tg - curve.records[i - 1].bias.v_tg;
        double d0 = curve.records[1].bias.v_tg - curve.records[0].bias.v_tg;
        if (d == 0.0 || (d > 0.0) != (d0 > 0.0)) {
            throw InputError(std::string(who) + ": v_tg must be strictly monotone");
        }
    }
}

} // namespace

std::vector<GmPoint> compute_gm(const IVCurve& curve)
{
    if (curve.size() < 3) {
        throw TooFewPoints("compute_gm: need at least 3 records");
    }
    require_monotone_vtg(curve, "compute_gm");
    require_fixed_drain_and_backgate(curve, "compute_gm");
    std::vector<GmPoint> gm;
    gm.reserve(curve.size() - 2);
    for (size_t i = 1; i + 1 < curve.size(); ++i) {
        const auto& lo = curve.records[i - 1];
        const auto& hi = curve.records[i + 1];
        gm.push_back({curve.records[i].bias.v_tg,
                      (hi.i_d - lo.i_d) / (hi.bias.v_tg - lo.bias.v_tg)});
    }
    return gm;
}

std::vector<MobilityPoint> extract_mobility(std::span<const GmPoint> gm,
                                            const MobilityGeometry& geom, double v_ds)
{
    if (v_ds == 0.0) {
        throw ZeroVds("extract_mobility: v_ds must be non-zero");
    }
    if (!(geom.l_g > 0.0) || !(geom.w > 0.0) || !(geom.c_ox_areal > 0.0)) {
        throw InvalidParams("extract_mobility: geometry must be positive");
    }
    std::vector<MobilityPoint> mu;
    mu.reserve(gm.size());
    const double scale = geom.l_g / (geom.w * geom.c_ox_areal * v_ds);
    for (const auto& p : gm) {
        mu.push_back({p.v_tg, p.g_m * scale});
    }
    return mu;
}

RsdResult extract_rsd(std::span<const IVCurve> low_vds_curves, double v_t)
{
    if (low_vds_curves.size() < 3) {
        throw TooFewPoints("extract_rsd: need at least 3 curves");
    }
    std::vector<double> inv_overdrive;
    std::vector<double> r_tot;
    for (const auto& curve : low_vds_curves) {
        if (curve.size() < 2) {
            throw TooFewPoints("extract_rsd: each curve needs at least 2 points");
        }
        double v_tg = curve.records[0].bias.v_tg;
        for (const auto& rec : curve.records) {
            if (rec.bias.v_tg != v_tg) {
                throw NonUniformBias("extract_rsd: v_tg must be fixed within each curve");
            }
        }
        // Through-origin slope of v_ds against i_d = the low-v_ds total
        // resistance of that overdrive.
        double sum_vi = 0.0;
        double sum_ii = 0.0;
        for (const auto& rec : curve.records) {
            sum_vi += rec.bias.v_ds * rec.i_d;
            sum_ii += rec.i_d * rec.i_d;
        }
        if (sum_ii == 0.0) {
            throw DegenerateFit("extract_rsd: zero-current curve");
        }
        double overdrive = v_tg - v_t;
        if (overdrive == 0.0) {
            throw DegenerateFit("extract_rsd: zero overdrive curve");
        }
        inv_overdrive.push_back(1.0 / overdrive);
        r_tot.push_back(sum_vi / sum_ii);
    }

    std::vector<double> distinct = inv_overdrive;
    std::sort(distinct.begin(), distinct.end());
    distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
    if (distinct.size() < 2) {
        throw DegenerateFit("extract_rsd: fewer than 2 distinct overdrives");
    }

    LineFit line = linear_fit(inv_overdrive, r_tot);
    RsdResult result;
    result.r_sd = line.intercept;
    result.slope = line.slope;
    result.r_squared = line.r_squared;
    result.r_tot = std::move(r_tot);
    return result;
}

double extract_vt(const IVCurve& curve)
{
    auto gm = compute_gm(curve);
    size_t best = 0;
    for (size_t i = 1; i < gm.size(); ++i) {
        if (gm[i].g_m > gm[best].g_m) {
            best = i; // strict '>' keeps the smallest v_tg among ties
        }
    }
    if (!(gm[best].g_m > 0.0)) {
        throw DegenerateFit("extract_vt: transconductance vanishes everywhere");
    }
    // gm[i] corresponds to record i+1 of the curve.
    const auto& rec = curve.records[best + 1];
    return rec.bias.v_tg - rec.i_d / gm[best].g_m;
}

ExtractedParams characterize(const IVCurve& transfer, std::span<const IVCurve> low_vds_curves,
                             const DeviceParams& geometry)
{
    ExtractedParams out;
    out.gm_curve = compute_gm(transfer);
    out.c_ox_areal = geometry.c_ox_areal();
    out.mu_eff_curve =
        extract_mobility(out.gm_curve, {geometry.l_g, geometry.w, out.c_ox_areal},
                         transfer.records[0].bias.v_ds);
    out.v_t_extracted = extract_vt(transfer);
    out.r_sd = extract_rsd(low_vds_curves, out.v_t_extracted).r_sd;
    return out;
}

// =============================================================================
// Compact-model calibration
// =============================================================================

namespace {

struct ParamAccessor {
    const char* name;
    double DeviceParams::*field;
    double lower;
    double upper;
    double fd_scale; // sets the finite-difference step magnitude
};

constexpr std::array<ParamAccessor, 7> k_fittable = {{
    {"phi_b0", &DeviceParams::phi_b0, 0.0, 3.0, 1.0},
    {"gamma_tg", &DeviceParams::gamma_tg, 1e-4, 5.0, 0.1},
    {"gamma_bg", &DeviceParams::gamma_bg, -5.0, 5.0, 0.1},
    {"v_t0", &DeviceParams::v_t0, -50.0, 50.0, 1.0},
    {"n_ideality", &DeviceParams::n_ideality, 1.0, 5.0, 1.0},
    {"rho_sheet", &DeviceParams::rho_sheet, 0.0, 1e15, 1e6},
    {"r_sd_ext", &DeviceParams::r_sd_ext, 0.0, 1e12, 1e4},
}};

const ParamAccessor& accessor(const std::string& name)
{
    for (const auto& a : k_fittable) {
        if (name == a.name) {
            return a;
        }
    }
    throw InputError("fit_device: unknown free parameter '" + name + "'");
}

void project_into_bounds(DeviceParams& p, const std::vector<const ParamAccessor*>& free)
{
    for (const auto* a : free) {
        double lower = a->lower;
        if (a->field == &DeviceParams::phi_b0) {
            lower = std::max(lower, p.phi_min); // keep the barrier above its floor
        }
        p.*(a->field) = std::clamp(p.*(a->field), lower, a->upper);
    }
}

double rms(const std::vector<double>& v)
{
    if (v.empty()) {
        return 0.0;
    }
    double s = 0.0;
    for (double x : v) {
        s += x * x;
    }
    return std::sqrt(s / static_cast<double>(v.size()));
}

} // namespace

const std::set<std::string>& fittable_param_names()
{
    static const std::set<std::string> names = [] {
        std::set<std::string> s;
        for (const auto& a : k_fittable) {
            s.insert(a.name);
        }
        return s;
    }();
    return names;
}

FitReport fit_device(std::span<const IVCurve> curves, const DeviceParams& initial,
                     const std::set<std::string>& free_names, const FitOptions& options)
{
    if (curves.empty()) {
        throw InputError("fit_device: no curves");
    }
    size_t n_points = 0;
    for (const auto& c : curves) {
        n_points += c.size();
    }
    if (n_points == 0) {
        throw InputError("fit_device: curves are empty");
    }
    initial.validate();

    std::vector<const ParamAccessor*> free;
    for (const auto& name : free_names) {
        free.push_back(&accessor(name));
    }

    // Residuals in log-current space so that every decade of the sweep
    // carries comparable weight.
    auto residuals_at = [&](const DeviceParams& p, std::vector<double>& out) -> bool {
        out.clear();
        out.reserve(n_points);
        try {
            for (const auto& curve : curves) {
                for (const auto& rec : curve.records) {
                    double i_model = drain_current(p, rec.bias);
                    out.push_back(std::log10(std::abs(i_model) + options.i_floor) -
                                  std::log10(std::abs(rec.i_d) + options.i_floor));
                }
            }
        } catch (const NumericalError&) {
            return false; // treat as a rejected trial
        }
        return true;
    };

    FitReport report;
    report.fitted = initial;
    std::vector<double> r;
    if (!residuals_at(initial, r)) {
        throw NonConvergence("fit_device: model does not evaluate at the initial params", 0.0);
    }
    report.residuals = r;
    report.residual_rms_log = rms(r);
    report.residual_history.push_back(report.residual_rms_log);
    if (free.empty()) {
        report.converged = true;
        return report;
    }

    const int k = static_cast<int>(free.size());
    const int m = static_cast<int>(n_points);
    double lambda = options.lambda0;
    DeviceParams p = initial;
    double current_rms = report.residual_rms_log;

    Eigen::MatrixXd jac(m, k);
    std::vector<double> r_pert;
    for (int iter = 1; iter <= options.max_iterations; ++iter) {
        report.iterations = iter;

        // Forward-difference Jacobian around the current point.
        bool jac_ok = true;
        for (int j = 0; j < k; ++j) {
            const auto* a = free[static_cast<size_t>(j)];
            double h = 1e-6 * (std::abs(p.*(a->field)) + a->fd_scale);
            DeviceParams pp = p;
            pp.*(a->field) += h;
            project_into_bounds(pp, free);
            double h_actual = pp.*(a->field) - p.*(a->field);
            if (h_actual == 0.0) {
                pp.*(a->field) = p.*(a->field) - h;
                project_into_bounds(pp, free);
                h_actual = pp.*(a->field) - p.*(a->field);
            }
            if (h_actual == 0.0 || !residuals_at(pp, r_pert)) {
                jac_ok = false;
                break;
            }
            for (int i = 0; i < m; ++i) {
                jac(i, j) = (r_pert[static_cast<size_t>(i)] - r[static_cast<size_t>(i)]) /
                            h_actual;
            }
        }
        if (!jac_ok) {
            break;
        }

        Eigen::VectorXd rv = Eigen::Map<const Eigen::VectorXd>(r.data(), m);
        Eigen::MatrixXd normal = jac.transpose() * jac;
        Eigen::VectorXd gradient = jac.transpose() * rv;

        bool accepted = false;
        while (lambda <= 1e12) {
            Eigen::MatrixXd damped = normal;
            for (int j = 0; j < k; ++j) {
                double d = normal(j, j);
                damped(j, j) += lambda * (d > 0.0 ? d : 1.0);
            }
            Eigen::VectorXd delta = damped.ldlt().solve(-gradient);
            DeviceParams trial = p;
            for (int j = 0; j < k; ++j) {
                trial.*(free[static_cast<size_t>(j)]->field) += delta(j);
            }
            project_into_bounds(trial, free);
            double trial_rms = std::numeric_limits<double>::infinity();
            if (residuals_at(trial, r_pert)) {
                trial_rms = rms(r_pert);
            }
            if (trial_rms < current_rms) {
                p = trial;
                r = r_pert;
                double improvement = current_rms - trial_rms;
                current_rms = trial_rms;
                report.residual_history.push_back(current_rms);
                lambda = std::max(lambda / 10.0, 1e-12);
                accepted = true;
                if (improvement <= options.rel_tolerance * std::max(current_rms, 1e-30)) {
                    report.converged = true;
                }
                break;
            }
            lambda *= 10.0;
        }
        if (!accepted || report.converged) {
            break;
        }
    }

    report.fitted = p;
    report.residuals = r;
    report.residual_rms_log = current_rms;
    return report;
}

// =============================================================================
// VCCS calibration
// =============================================================================

VccsModel fit_vccs(const IVCurve& curve, int n_knots)
{
    if (n_knots < 2) {
        throw InputError("fit_vccs: need at least 2 knots");
    }
    if (curve.size() < static_cast<size_t>(n_knots)) {
        throw TooFewPoints("fit_vccs: need at least as many records as knots");
    }
    require_fixed_drain_and_backgate(curve, "fit_vccs");

    double v_lo = curve.records[0].bias.v_tg;
    double v_hi = v_lo;
    for (const auto& rec : curve.records) {
        v_lo = std::min(v_lo, rec.bias.v_tg);
        v_hi = std::max(v_hi, rec.bias.v_tg);
    }
    if (!(v_hi > v_lo)) {
        throw DegenerateFit("fit_vccs: all records share one v_tg");
    }

    const int n = n_knots;
    const double dv = (v_hi - v_lo) / (n - 1);
    auto hat_pair = [&](double v, int& left, double& t) {
        double s = (v - v_lo) / dv;
        left = std::clamp(static_cast<int>(std::floor(s)), 0, n - 2);
        t = s - left;
    };

    // Normal equations of the hat-function basis; at most two basis functions
    // overlap any sample, so the system is tridiagonal.
    Eigen::MatrixXd ata = Eigen::MatrixXd::Zero(n, n);
    Eigen::VectorXd aty = Eigen::VectorXd::Zero(n);
    for (const auto& rec : curve.records) {
        int left;
        double t;
        hat_pair(rec.bias.v_tg, left, t);
        double w0 = 1.0 - t;
        double w1 = t;
        ata(left, left) += w0 * w0;
        ata(left, left + 1) += w0 * w1;
        ata(left + 1, left) += w0 * w1;
        ata(left + 1, left + 1) += w1 * w1;
        aty(left) += w0 * rec.i_d;
        aty(left + 1) += w1 * rec.i_d;
    }
    // Tiny ridge keeps knots inside data gaps well defined.
    double ridge = 1e-12 * ata.trace() / n + 1e-300;
    for (int j = 0; j < n; ++j) {
        ata(j, j) += ridge;
    }
    Eigen::VectorXd knot_values = ata.ldlt().solve(aty);

    std::vector<double> values(knot_values.data(), knot_values.data() + n);
    values = isotonic_non_decreasing(values);
    for (double& v : values) {
        v = std::max(v, 0.0);
    }

    VccsModel model;
    model.knots.reserve(static_cast<size_t>(n));
    for (int j = 0; j < n; ++j) {
        model.knots.push_back({v_lo + j * dv, values[static_cast<size_t>(j)]});
    }
    model.knots.back().v_tg = v_hi; // avoid accumulated rounding on the last knot
    model.validate();
    return model;
}

// =============================================================================
// Shared statistics helpers
// =============================================================================

LineFit linear_fit(std::span<const double> x, std::span<const double> y)
{
    if (x.size() != y.size() || x.size() < 2) {
        throw InputError("linear_fit: need two equal-length samples of size >= 2");
    }
    const double n = static_cast<double>(x.size());
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    for (size_t i = 0; i < x.size(); ++i) {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
    }
    double denom = n * sxx - sx * sx;
    if (denom == 0.0) {
        throw DegenerateFit("linear_fit: x values are all equal");
    }
    LineFit fit;
    fit.slope = (n * sxy - sx * sy) / denom;
    fit.intercept = (sy - fit.slope * sx) / n;

    double mean_y = sy / n;
    double ss_tot = 0.0, ss_res = 0.0;
    for (size_t i = 0; i < x.size(); ++i) {
        double e = y[i] - (fit.slope * x[i] + fit.intercept);
        ss_res += e * e;
        double d = y[i] - mean_y;
        ss_tot += d * d;
    }
    fit.r_squared = (ss_tot > 0.0) ? 1.0 - ss_res / ss_tot : (ss_res == 0.0 ? 1.0 : 0.0);
    return fit;
}

std::vector<double> isotonic_non_decreasing(std::span<const double> values)
{
    // Pool-adjacent-violators with unit weights.
    struct Block {
        double mean;
        int count;
    };
    std::vector<Block> blocks;
    blocks.reserve(values.size());
    for (double v : values) {
        blocks.push_back({v, 1});
        while (blocks.size() >= 2 && blocks[blocks.size() - 2].mean >= blocks.back().mean) {
            Block last = blocks.back();
            blocks.pop_back();
            Block& prev = blocks.back();
            prev.mean = (prev.mean * prev.count + last.mean * last.count) /
                        (prev.count + last.count);
            prev.count += last.count;
        }
    }
    std::vector<double> out;
    out.reserve(values.size());
    for (const auto& b : blocks) {
        out.insert(out.end(), static_cast<size_t>(b.count), b.mean);
    }
    return out;
}

} // namespace sbneuro
