#include "baw/design_rules.hpp"

#include <cmath>
#include <cstdio>
#include <numbers>

#include "baw/thickness_mode.hpp"

namespace baw {

namespace {

constexpr double pi = std::numbers::pi;
constexpr double gap_floor = 20e-6;

// reference aspect ratio: 14 mm active diameter on a 300 um plate
constexpr double radius_per_thickness = 7e-3 / 300e-6;

rule_result make_rule(std::string name, double measured, double threshold, double margin,
                      bool pass, bool advisory) {
    return {std::move(name), measured, threshold, margin, pass, advisory};
}

rule_result missing_rule(std::string name, double measured) {
    return {std::move(name) + " (unavailable)", measured, 0.0, 0.0, false, false};
}

rule_report assemble(std::vector<rule_result> rules) {
    rule_report report;
    report.overall = true;
    for (const auto& r : rules)
        if (!r.advisory && !r.pass) report.overall = false;
    report.rules = std::move(rules);
    return report;
}

}  // namespace

void ring_geometry::validate() const {
    if (!(thickness > 0.0) || !(active_radius > 0.0) || !(gap_width > 0.0) ||
        !(ring_width > 0.0) || !(die_side > 0.0))
        throw constraint_error("ring_geometry: all dimensions must be > 0");
    if (active_radius + gap_width + ring_width > die_side / 2.0)
        throw constraint_error("ring_geometry: ring does not fit on the die");
    if (gap_width > active_radius / 2.0)
        throw constraint_error("ring_geometry: gap is not small against the active radius");
}

rule_report check_geometry(const ring_geometry& g, const characteristic_length_set& lengths) {
    g.validate();
    std::vector<rule_result> rules;
    rules.push_back(make_rule("gap < open-circuit decay length", g.gap_width,
                              lengths.decay_a1_open, 1.0 - g.gap_width / lengths.decay_a1_open,
                              g.gap_width < lengths.decay_a1_open, false));
    rules.push_back(make_rule("ring >= short-circuit crossing wavelength", g.ring_width,
                              lengths.lambda_crossing_short,
                              g.ring_width / lengths.lambda_crossing_short - 1.0,
                              g.ring_width >= lengths.lambda_crossing_short, false));
    rules.push_back(make_rule("gap >= 20 um floor", g.gap_width, gap_floor,
                              g.gap_width / gap_floor - 1.0, g.gap_width >= gap_floor, true));
    return assemble(std::move(rules));
}

rule_report check_geometry(const ring_geometry& g, const partial_length_set& lengths) {
    g.validate();
    std::vector<rule_result> rules;
    if (lengths.decay_a1_open) {
        const double decay = *lengths.decay_a1_open;
        rules.push_back(make_rule("gap < open-circuit decay length", g.gap_width, decay,
                                  1.0 - g.gap_width / decay, g.gap_width < decay, false));
    } else {
        rules.push_back(missing_rule("gap < open-circuit decay length", g.gap_width));
    }
    if (lengths.lambda_crossing_short) {
        const double lambda = *lengths.lambda_crossing_short;
        rules.push_back(make_rule("ring >= short-circuit crossing wavelength", g.ring_width,
                                  lambda, g.ring_width / lambda - 1.0, g.ring_width >= lambda,
                                  false));
    } else {
        rules.push_back(missing_rule("ring >= short-circuit crossing wavelength", g.ring_width));
    }
    rules.push_back(make_rule("gap >= 20 um floor", g.gap_width, gap_floor,
                              g.gap_width / gap_floor - 1.0, g.gap_width >= gap_floor, true));
    return assemble(std::move(rules));
}

ring_geometry scale_design(const ring_geometry& reference, double new_thickness) {
    if (!(new_thickness > 0.0)) throw argument_error("scale_design: thickness must be > 0");
    reference.validate();
    const double s = new_thickness / reference.thickness;
    ring_geometry scaled{new_thickness, reference.active_radius * s, reference.gap_width * s,
                         reference.ring_width * s, reference.die_side * s};
    scaled.validate();
    return scaled;
}

synthesis_result synthesize(double target_fs, const material_set& plate_material,
                            const safety_margins& margins) {
    if (!(target_fs >= 1e6 && target_fs <= 100e6))
        throw argument_error("synthesize: target fs must lie in [1, 100] MHz");
    if (!(margins.gap >= 0.0 && margins.gap < 1.0))
        throw argument_error("synthesize: gap margin must lie in [0, 1)");
    if (!(margins.ring >= 0.0))
        throw argument_error("synthesize: ring margin must be >= 0");

    // fs(t) = x_s vbar / (pi t) with x_s, vbar thickness-independent
    plate_spec probe{plate_material, 100e-6, 1e-6};
    const auto [fs_probe, fp_probe] = te_resonances(probe);
    (void)fp_probe;
    const double thickness = fs_probe * probe.thickness / target_fs;

    plate_spec plate{plate_material, thickness, 1e-6};
    const auto [fs, fp] = te_resonances(plate);
    (void)fp;

    const partial_length_set lengths =
        survey_characteristic_lengths(plate_material, thickness, fs);
    std::vector<std::string> missing;
    if (!lengths.decay_a1_open) missing.push_back("decay_a1_open");
    if (!lengths.lambda_crossing_short) missing.push_back("lambda_crossing_short");
    if (!missing.empty()) {
        std::string what = "synthesize: required characteristic lengths missing at fs";
        for (const auto& name : missing) what += " " + name;
        throw partial_result_error(what, lengths, missing);
    }

    ring_geometry g;
    g.thickness = thickness;
    g.active_radius = radius_per_thickness * thickness;
    g.gap_width = *lengths.decay_a1_open * (1.0 - margins.gap);
    g.ring_width = *lengths.lambda_crossing_short * (1.0 + margins.ring);
    g.die_side = std::max(60.0 * thickness,
                          2.05 * (g.active_radius + g.gap_width + g.ring_width));
    g.validate();

    synthesis_result result;
    result.geometry = g;
    result.lengths = lengths;
    result.fs = fs;
    result.report = check_geometry(g, lengths);
    return result;
}

std::string format_rule_report(const rule_report& report) {
    std::string out;
    char line[160];
    std::snprintf(line, sizeof line, "%-42s %12s %12s %9s  %s\n", "rule", "measured_um",
                  "threshold_um", "margin", "result");
    out += line;
    for (const auto& r : report.rules) {
        std::snprintf(line, sizeof line, "%-42s %12.4g %12.4g %8.1f%%  %s\n", r.name.c_str(),
                      r.measured * 1e6, r.threshold * 1e6, r.margin * 100.0,
                      r.advisory ? (r.pass ? "pass (advisory)" : "fail (advisory)")
                                 : (r.pass ? "pass" : "fail"));
        out += line;
    }
    out += "overall: ";
    out += report.overall ? "pass" : "fail";
    out += "\n";
    return out;
}

}  // namespace baw
