#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace sbneuro {

struct VccsKnot {
    double v_tg = 0.0; // V
    double i_in = 0.0; // A
};

/// Calibrated voltage-controlled current source: a continuous piecewise-linear
/// map v_tg -> i_in with clamp-to-endpoint extrapolation. Knots are strictly
/// increasing in v_tg; currents are non-negative and non-decreasing.
struct VccsModel {
    std::vector<VccsKnot> knots;

    double v_min() const { return knots.front().v_tg; }
    double v_max() const { return knots.back().v_tg; }
    double i_max() const { return knots.back().i_in; }

    double eval(double v_tg) const;

    /// Throws InvalidParams when the knot invariants are violated.
    void validate() const;
};

/// Two-knot flat map delivering a fixed current everywhere; handy for ideal
/// LIF checks.
VccsModel constant_current_source(double i_in);

// JSON document, "schema": "vccs-v1", knots as [v, i] pairs.
std::string vccs_to_json(const VccsModel& model);
VccsModel vccs_from_json(const std::string& json_text);
VccsModel load_vccs(const std::filesystem::path& path);
void save_vccs(const VccsModel& model, const std::filesystem::path& path);

} // namespace sbneuro
