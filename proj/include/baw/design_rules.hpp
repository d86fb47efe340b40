#pragma once

#include <string>
#include <vector>

#include "baw/dispersion.hpp"

namespace baw {

// Grounded-ring resonator geometry: circular active area of radius
// active_radius, separated from a grounded ring of width ring_width by a
// gap of width gap_width, on a die of side die_side.
struct ring_geometry {
    double thickness = 0.0;      // m
    double active_radius = 0.0;  // m
    double gap_width = 0.0;      // m
    double ring_width = 0.0;     // m
    double die_side = 0.0;       // m

    // all > 0; active_radius + gap_width + ring_width <= die_side / 2;
    // gap_width small against active_radius (<= active_radius / 2 here).
    void validate() const;  // throws constraint_error
};

struct rule_result {
    std::string name;
    double measured = 0.0;
    double threshold = 0.0;
    double margin = 0.0;
    bool pass = false;
    bool advisory = false;  // advisory rules do not gate the overall verdict
};

struct rule_report {
    std::vector<rule_result> rules;
    bool overall = false;  // every non-advisory rule passes
};

// Rule 1: gap_width < decay_a1_open               (margin 1 - gap/decay)
// Rule 2: ring_width >= lambda_crossing_short     (margin ring/lambda - 1)
// Rule 3 (advisory): gap_width >= 20 um manufacturability floor.
// The lengths must be evaluated at the geometry's design frequency.
rule_report check_geometry(const ring_geometry& g, const characteristic_length_set& lengths);

// Same rules when only part of the length set is known; rules whose input
// is missing fail with margin 0 and "unavailable" in the name suffix.
rule_report check_geometry(const ring_geometry& g, const partial_length_set& lengths);

// All lateral dimensions (and the thickness) scaled by
// new_thickness / reference.thickness; result re-validated.
ring_geometry scale_design(const ring_geometry& reference, double new_thickness);

// Fractions taken off/onto the dispersion lengths when synthesizing:
// gap = decay (1 - gap_margin), ring = lambda_crossing (1 + ring_margin).
struct safety_margins {
    double gap = 0.4;
    double ring = 0.5;
};

struct synthesis_result {
    ring_geometry geometry;
    rule_report report;
    partial_length_set lengths;  // evaluated at fs
    double fs = 0.0;             // Hz, analytic series resonance of the chosen thickness
};

// Picks the plate thickness by inverting the 1D thickness-mode fs(t) for
// the given plate-frame material, evaluates the characteristic lengths at
// fs, and applies the safety margins. Active radius follows the reference
// aspect ratio (diameter = 14 mm at t = 300 um); die side 60 t, grown if
// the ring would not fit. target_fs must lie in [1, 100] MHz.
synthesis_result synthesize(double target_fs, const material_set& plate_material,
                            const safety_margins& margins = {});

// Aligned text table of a rule report (one row per rule plus verdict).
std::string format_rule_report(const rule_report& report);

}  // namespace baw
