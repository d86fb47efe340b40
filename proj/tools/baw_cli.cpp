#include <CLI11.hpp>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "baw/bvd.hpp"
#include "baw/config.hpp"
#include "baw/csv.hpp"
#include "baw/design_rules.hpp"
#include "baw/dispersion.hpp"
#include "baw/errors.hpp"
#include "baw/material.hpp"
#include "baw/sparams.hpp"
#include "baw/svg.hpp"
#include "baw/thickness_mode.hpp"

namespace fs = std::filesystem;
using namespace baw;

namespace {

constexpr const char* version_string = "baw 1.0.0";

// exit codes: 0 success, 1 rule failure (--strict), 2 usage/config, 3 numeric
constexpr int exit_rule_fail = 1;
constexpr int exit_usage = 2;
constexpr int exit_numeric = 3;

struct cli_options {
    std::string config_path;
    std::string out_dir = ".";
    int window = 80;
    bool window_given = false;
    double z0 = 50.0;
    bool z0_given = false;
    bool strict = false;
    std::string input_path;  // bvd-fit / bode-q positional
};

run_config load_config(const cli_options& opt) {
    if (opt.config_path.empty()) throw argument_error("missing --config <path>");
    return run_config::from_file(opt.config_path);
}

// bvd-fit and bode-q read their data from the positional input; for them a
// config only carries optional keys, so none at all is fine.
run_config load_config_or_default(const cli_options& opt) {
    if (opt.config_path.empty()) return run_config::from_string("", "<defaults>");
    return run_config::from_file(opt.config_path);
}

fs::path prepare_out_dir(const cli_options& opt) {
    fs::path dir(opt.out_dir);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec || !fs::is_directory(dir))
        throw argument_error("output directory not writable: " + dir.string());
    return dir;
}

material_set material_from_config(const run_config& cfg) {
    material_set m;
    if (cfg.has("material", "file")) {
        m = load_material_file(cfg.get_string("material", "file"));
        if (cfg.has("material", "name"))
            throw parse_error("material: give either name or file, not both",
                              cfg.origin().string(), 0);
    } else {
        m = load_material(cfg.get_string("material", "name"));
    }
    if (cfg.has("material", "euler_deg")) {
        const auto angles = cfg.get_numbers("material", "euler_deg");
        if (angles.size() != 3)
            throw parse_error("material.euler_deg needs exactly 3 angles",
                              cfg.origin().string(), 0);
        m = rotate(m, euler_zxz(angles[0], angles[1], angles[2]));
    }
    return m;
}

std::vector<double> grid_from_config(const run_config& cfg) {
    const double start = cfg.get_double("grid", "f_start_hz");
    const double stop = cfg.get_double("grid", "f_stop_hz");
    const long points = cfg.get_int("grid", "points");
    const std::string spacing = cfg.get_string("grid", "spacing", "linear");
    if (points < 2) throw argument_error("grid.points must be >= 2");
    if (!(stop > start)) throw argument_error("grid.f_stop_hz must exceed grid.f_start_hz");
    std::vector<double> freqs(points);
    if (spacing == "linear") {
        for (long i = 0; i < points; ++i)
            freqs[i] = start + (stop - start) * i / double(points - 1);
    } else if (spacing == "log") {
        if (!(start > 0.0)) throw argument_error("log grid needs f_start_hz > 0");
        const double ratio = std::log(stop / start);
        for (long i = 0; i < points; ++i)
            freqs[i] = start * std::exp(ratio * i / double(points - 1));
    } else {
        throw argument_error("grid.spacing must be linear or log");
    }
    return freqs;
}

plate_spec plate_from_config(const run_config& cfg, material_set m) {
    plate_spec p;
    p.material = std::move(m);
    p.thickness = cfg.get_double("plate", "thickness_m");
    p.active_area = cfg.get_double("plate", "area_m2");
    p.q_mech = cfg.get_double("plate", "q", 2000.0);
    p.validate();
    return p;
}

bool svg_requested(const run_config& cfg) { return cfg.get_bool("output", "svg", false); }

void write_svg(const fs::path& dir, const std::string& stem, const std::string& title,
               const std::string& xl, const std::string& yl,
               const std::vector<svg_series>& series, bool log_y = false) {
    write_text_atomic(dir / (stem + ".svg"), render_svg_plot(title, xl, yl, series, log_y));
}

std::string kv(const std::string& key, double value) {
    return key + " = " + format_number(value) + "\n";
}

// command-line flag > config key > built-in default; the config key is
// consumed either way so a strict config stays valid under an override
int effective_window(const cli_options& opt, const run_config& cfg) {
    const int from_config = static_cast<int>(cfg.get_int("band", "window", opt.window));
    const int w = opt.window_given ? opt.window : from_config;
    if (w < 1) throw argument_error("window must be >= 1");
    return w;
}

double effective_z0(const cli_options& opt, const run_config& cfg) {
    const double from_config = cfg.get_double("band", "z0", opt.z0);
    const double z = opt.z0_given ? opt.z0 : from_config;
    if (!(z > 0.0)) throw argument_error("z0 must be > 0");
    return z;
}

int cmd_coupling_sweep(const cli_options& opt) {
    const run_config cfg = load_config(opt);
    const fs::path dir = prepare_out_dir(opt);
    const material_set m = material_from_config(cfg);

    const double start = cfg.get_double("sweep", "theta_start_deg", 0.0);
    const double stop = cfg.get_double("sweep", "theta_stop_deg", 90.0);
    const long points = cfg.get_int("sweep", "theta_points", 181);
    if (points < 2) throw argument_error("sweep.theta_points must be >= 2");
    std::vector<double> grid(points);
    for (long i = 0; i < points; ++i)
        grid[i] = start + (stop - start) * i / double(points - 1);

    // (3,4) carries the thickness-shear coupling for rotations about the
    // crystal X axis; (3,5) is identically zero there but kept for symmetry.
    std::vector<std::pair<int, int>> pairs = {{3, 3}, {3, 5}, {3, 4}};
    if (cfg.has("sweep", "pairs")) {
        pairs.clear();
        for (double token : cfg.get_numbers("sweep", "pairs")) {
            const int t = static_cast<int>(token);
            pairs.emplace_back(t / 10, t % 10);
        }
    }
    const bool svg = svg_requested(cfg);
    cfg.require_consumed();

    const auto sweep = coupling_sweep(m, pairs, grid);
    csv_table table;
    table.header.push_back("theta_deg");
    for (const auto& [i, j] : pairs)
        table.header.push_back("k2_" + std::to_string(i) + std::to_string(j));
    for (const auto& pt : sweep) {
        std::vector<double> row{pt.theta_deg};
        row.insert(row.end(), pt.k2.begin(), pt.k2.end());
        table.rows.push_back(std::move(row));
    }
    write_csv(dir / "coupling_sweep.csv", table);

    if (svg) {
        std::vector<svg_series> series(pairs.size());
        for (size_t c = 0; c < pairs.size(); ++c) {
            series[c].label = table.header[c + 1];
            for (const auto& pt : sweep) {
                series[c].x.push_back(pt.theta_deg);
                series[c].y.push_back(pt.k2[c]);
            }
        }
        write_svg(dir, "coupling_sweep", "coupling coefficients vs rotation", "theta_deg", "k2",
                  series);
    }
    return 0;
}

int cmd_impedance(const cli_options& opt) {
    const run_config cfg = load_config(opt);
    const fs::path dir = prepare_out_dir(opt);
    const std::string model = cfg.get_string("impedance", "model", "te");
    const auto freqs = grid_from_config(cfg);
    const bool svg = svg_requested(cfg);

    impedance_spectrum spectrum;
    std::string summary;
    if (model == "te") {
        const plate_spec plate = plate_from_config(cfg, material_from_config(cfg));
        cfg.require_consumed();
        spectrum = te_impedance(plate, freqs);
        const te_constants tc = te_derived(plate);
        const auto [fs, fp] = te_resonances(plate);
        summary += kv("c33_bar_pa", tc.c33_bar);
        summary += kv("vbar_m_per_s", tc.vbar);
        summary += kv("kt2", tc.kt2);
        summary += kv("c0_f", tc.c0);
        summary += kv("fs_hz", fs);
        summary += kv("fp_hz", fp);
    } else if (model == "bvd") {
        const bvd_params params =
            bvd_params_from_targets(cfg.get_double("bvd", "fs_hz"), cfg.get_double("bvd", "k2"),
                                    cfg.get_double("bvd", "q"), cfg.get_double("bvd", "c0_f"));
        cfg.require_consumed();
        spectrum = bvd_impedance(params, freqs);
        summary += kv("c0_f", params.c0);
        summary += kv("cm_f", params.cm);
        summary += kv("lm_h", params.lm);
        summary += kv("rm_ohm", params.rm);
    } else {
        throw argument_error("impedance.model must be te or bvd");
    }

    try {
        const auto [fs_hat, fp_hat] = resonance_pair(spectrum);
        summary += kv("fs_estimate_hz", fs_hat);
        summary += kv("fp_estimate_hz", fp_hat);
        summary += kv("k2_estimate", k2_from_fs_fp(fs_hat, fp_hat));
    } catch (const multi_mode_error& e) {
        summary += "resonance_estimate = none (";
        summary += std::to_string(e.count);
        summary += " interleaved extrema)\n";
    }

    csv_table table;
    table.header = {"freq_hz", "re_z", "im_z"};
    for (size_t i = 0; i < spectrum.freqs.size(); ++i)
        table.rows.push_back({spectrum.freqs[i], spectrum.z[i].real(), spectrum.z[i].imag()});
    write_csv(dir / "impedance.csv", table);
    write_text_atomic(dir / "impedance_summary.txt", summary);

    if (svg) {
        svg_series mag{"abs_z", spectrum.freqs, {}};
        for (const auto& z : spectrum.z) mag.y.push_back(std::abs(z));
        write_svg(dir, "impedance", "impedance magnitude", "freq_hz", "abs_z_ohm", {mag}, true);
    }
    return 0;
}

int cmd_bvd_fit(const cli_options& opt) {
    const run_config cfg = load_config_or_default(opt);
    const fs::path dir = prepare_out_dir(opt);
    const bool svg = svg_requested(cfg);
    cfg.require_consumed();

    const impedance_spectrum measured = read_impedance_csv(opt.input_path);
    const bvd_fit_result fit = bvd_fit(measured);
    write_text_atomic(dir / "fit_report.txt", format_fit_report(fit));

    const impedance_spectrum ideal = bvd_impedance(fit.params, measured.freqs);
    csv_table table;
    table.header = {"freq_hz", "re_z_meas", "im_z_meas", "re_z_fit", "im_z_fit"};
    for (size_t i = 0; i < measured.freqs.size(); ++i)
        table.rows.push_back({measured.freqs[i], measured.z[i].real(), measured.z[i].imag(),
                              ideal.z[i].real(), ideal.z[i].imag()});
    write_csv(dir / "bvd_fit.csv", table);

    const auto metrics =
        spurious_deviation(measured, fit.params, fit.params.fs(), fit.params.fp());
    std::string extra;
    extra += kv("spurious_rms_ohm", metrics.rms);
    extra += kv("spurious_max_ohm", metrics.max_abs);
    extra += kv("spurious_peak_count", metrics.peak_count);
    write_text_atomic(dir / "spurious_metrics.txt", extra);

    if (svg) {
        svg_series meas{"measured", measured.freqs, {}};
        svg_series model{"fit", measured.freqs, {}};
        for (size_t i = 0; i < measured.freqs.size(); ++i) {
            meas.y.push_back(std::abs(measured.z[i]));
            model.y.push_back(std::abs(ideal.z[i]));
        }
        write_svg(dir, "bvd_fit", "measured vs fitted impedance", "freq_hz", "abs_z_ohm",
                  {meas, model}, true);
    }
    return 0;
}

int cmd_bode_q(const cli_options& opt) {
    const run_config cfg = load_config_or_default(opt);
    const fs::path dir = prepare_out_dir(opt);
    const int window = effective_window(opt, cfg);
    const double z0 = effective_z0(opt, cfg);
    const std::string kernel_name = cfg.get_string("band", "kernel", "mean");
    if (kernel_name != "mean" && kernel_name != "median")
        throw argument_error("band.kernel must be mean or median");
    const smoothing_kernel kernel =
        kernel_name == "median" ? smoothing_kernel::median : smoothing_kernel::mean;
    const bool svg = svg_requested(cfg);

    const bool want_summary = cfg.has("band", "fs_hz");
    double fs = 0.0, fp = 0.0, k2 = 0.0;
    if (want_summary) {
        fs = cfg.get_double("band", "fs_hz");
        fp = cfg.get_double("band", "fp_hz");
        k2 = cfg.get_double("band", "k2");
    }
    cfg.require_consumed();

    std::string ext = fs::path(opt.input_path).extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(),
                   [](unsigned char c) { return std::tolower(c); });
    reflection_spectrum refl;
    if (ext == ".s1p") {
        refl = read_touchstone_s1p(opt.input_path);
    } else {
        refl = z_to_s11(read_impedance_csv(opt.input_path), z0);
    }

    const q_spectrum q = bode_q(refl, window, kernel);
    csv_table table;
    table.header = {"freq_hz", "q", "valid"};
    for (size_t i = 0; i < q.freqs.size(); ++i)
        table.rows.push_back({q.freqs[i], q.q[i], q.valid[i] ? 1.0 : 0.0});
    write_csv(dir / "bode_q.csv", table);

    if (want_summary) {
        const band_summary_result s = band_summary(q, k2, fs, fp);
        std::string text;
        text += kv("q_at_fs", s.q_at_fs);
        text += kv("q_max", s.q_max);
        text += kv("f_at_q_max_hz", s.f_at_q_max);
        text += kv("fom_max", s.fom_max);
        text += kv("window", window);
        text += "kernel = " + kernel_name + "\n";
        write_text_atomic(dir / "bode_q_summary.txt", text);
    }

    if (svg) {
        svg_series series{"q_bode", {}, {}};
        for (size_t i = 0; i < q.freqs.size(); ++i)
            if (q.valid[i]) {
                series.x.push_back(q.freqs[i]);
                series.y.push_back(q.q[i]);
            }
        write_svg(dir, "bode_q", "quality factor from reflection data", "freq_hz", "q", {series});
    }
    return 0;
}

int cmd_dispersion(const cli_options& opt) {
    const run_config cfg = load_config(opt);
    const fs::path dir = prepare_out_dir(opt);
    const material_set m = material_from_config(cfg);
    const double thickness = cfg.get_double("plate", "thickness_m");

    const std::string bc_name = cfg.get_string("dispersion", "bc", "open");
    electrical_bc bc;
    if (bc_name == "open") bc = electrical_bc::open;
    else if (bc_name == "short" || bc_name == "shorted") bc = electrical_bc::shorted;
    else throw argument_error("dispersion.bc must be open or short");

    const double kx_lo = cfg.get_double("dispersion", "kx_start_1pm", 0.0);
    const double kx_hi = cfg.get_double("dispersion", "kx_stop_1pm", 6.0 / thickness);
    const long kx_points = cfg.get_int("dispersion", "kx_points", 121);
    const long nelem = cfg.get_int("dispersion", "elements", 32);
    const double f_lo = cfg.get_double("dispersion", "f_lo_hz", 0.0);
    const double f_hi =
        cfg.get_double("dispersion", "f_hi_hz", std::numeric_limits<double>::max());
    const bool have_eval = cfg.has("dispersion", "f_eval_hz");
    const double f_eval = have_eval ? cfg.get_double("dispersion", "f_eval_hz") : 0.0;
    const bool svg = svg_requested(cfg);
    cfg.require_consumed();

    const auto branches = trace_branches(m, thickness, bc, f_lo, f_hi, kx_lo, kx_hi,
                                         static_cast<int>(kx_points), static_cast<int>(nelem));

    std::string csv = "bc,family,freq_hz,re_kx,im_kx,vg\n";
    const std::string bc_token = bc == electrical_bc::open ? "open" : "short";
    for (const auto& b : branches)
        for (const auto& p : b.points) {
            csv += bc_token;
            csv += ',';
            csv += family_name(b.family);
            csv += ',';
            csv += format_number(p.freq) + ',' + format_number(p.kx) + ",0," +
                   format_number(p.group_velocity) + '\n';
        }
    if (have_eval) {
        for (const auto& mode : complex_kx_at_frequency(m, thickness, f_eval, bc,
                                                        static_cast<int>(nelem))) {
            csv += bc_token;
            csv += ',';
            csv += mode.family;
            csv += ',';
            csv += format_number(f_eval) + ',' + format_number(mode.kx.real()) + ',' +
                   format_number(mode.kx.imag()) + ",0\n";
        }
    }
    write_text_atomic(dir / "dispersion.csv", csv);

    if (have_eval) {
        const partial_length_set lengths =
            survey_characteristic_lengths(m, thickness, f_eval, static_cast<int>(nelem));
        std::string text;
        text += kv("eval_freq_hz", lengths.eval_freq);
        if (lengths.lambda_s1_open) text += kv("lambda_s1_open_m", *lengths.lambda_s1_open);
        if (lengths.lambda_crossing_short)
            text += kv("lambda_crossing_short_m", *lengths.lambda_crossing_short);
        if (lengths.decay_a1_open) text += kv("decay_a1_open_m", *lengths.decay_a1_open);
        std::string missing;
        if (!lengths.lambda_s1_open) missing += " lambda_s1_open";
        if (!lengths.lambda_crossing_short) missing += " lambda_crossing_short";
        if (!lengths.decay_a1_open) missing += " decay_a1_open";
        if (!missing.empty()) text += "missing =" + missing + "\n";
        write_text_atomic(dir / "lengths.txt", text);
    }

    if (svg) {
        std::vector<svg_series> series;
        for (size_t i = 0; i < branches.size(); ++i) {
            svg_series s;
            s.label = std::string(family_name(branches[i].family)) + "_" + std::to_string(i);
            for (const auto& p : branches[i].points) {
                s.x.push_back(p.kx);
                s.y.push_back(p.freq);
            }
            series.push_back(std::move(s));
        }
        write_svg(dir, "dispersion", "guided-wave dispersion (" + bc_token + ")", "kx_1pm",
                  "freq_hz", series);
    }
    return 0;
}

int cmd_design(const cli_options& opt) {
    const run_config cfg = load_config(opt);
    const fs::path dir = prepare_out_dir(opt);
    const material_set m = material_from_config(cfg);
    const bool synth = cfg.has("design", "target_fs_hz");
    if (synth && cfg.has("design", "thickness_m"))
        throw argument_error("design: give target_fs_hz or an explicit geometry, not both");

    std::string text;
    rule_report report;
    if (synth) {
        safety_margins margins;
        margins.gap = cfg.get_double("design", "gap_margin", margins.gap);
        margins.ring = cfg.get_double("design", "ring_margin", margins.ring);
        const double target = cfg.get_double("design", "target_fs_hz");
        cfg.require_consumed();

        const synthesis_result res = synthesize(target, m, margins);
        report = res.report;
        text += kv("fs_hz", res.fs);
        text += kv("thickness_m", res.geometry.thickness);
        text += kv("active_radius_m", res.geometry.active_radius);
        text += kv("gap_width_m", res.geometry.gap_width);
        text += kv("ring_width_m", res.geometry.ring_width);
        text += kv("die_side_m", res.geometry.die_side);
        if (res.lengths.lambda_s1_open) text += kv("lambda_s1_open_m", *res.lengths.lambda_s1_open);
        if (res.lengths.lambda_crossing_short)
            text += kv("lambda_crossing_short_m", *res.lengths.lambda_crossing_short);
        if (res.lengths.decay_a1_open) text += kv("decay_a1_open_m", *res.lengths.decay_a1_open);
    } else {
        ring_geometry g;
        g.thickness = cfg.get_double("design", "thickness_m");
        g.active_radius = cfg.get_double("design", "active_radius_m");
        g.gap_width = cfg.get_double("design", "gap_width_m");
        g.ring_width = cfg.get_double("design", "ring_width_m");
        g.die_side = cfg.get_double("design", "die_side_m");
        const double f_eval = cfg.get_double("design", "f_eval_hz");
        const long nelem = cfg.get_int("design", "elements", 32);
        cfg.require_consumed();
        g.validate();

        const partial_length_set lengths =
            survey_characteristic_lengths(m, g.thickness, f_eval, static_cast<int>(nelem));
        report = check_geometry(g, lengths);
        text += kv("thickness_m", g.thickness);
        text += kv("active_radius_m", g.active_radius);
        text += kv("gap_width_m", g.gap_width);
        text += kv("ring_width_m", g.ring_width);
        text += kv("die_side_m", g.die_side);
        text += kv("eval_freq_hz", f_eval);
        if (lengths.lambda_s1_open) text += kv("lambda_s1_open_m", *lengths.lambda_s1_open);
        if (lengths.lambda_crossing_short)
            text += kv("lambda_crossing_short_m", *lengths.lambda_crossing_short);
        if (lengths.decay_a1_open) text += kv("decay_a1_open_m", *lengths.decay_a1_open);
    }
    text += "\n" + format_rule_report(report);
    write_text_atomic(dir / "design_report.txt", text);
    std::cout << format_rule_report(report);
    return opt.strict && !report.overall ? exit_rule_fail : 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"thickness-extensional resonator design toolkit"};
    app.require_subcommand(1);
    app.fallthrough();

    cli_options opt;
    app.add_option("--config", opt.config_path, "run configuration file");
    app.add_option("--out", opt.out_dir, "output directory (default .)");
    auto* window_opt = app.add_option("--window", opt.window, "Q smoothing window (default 80)");
    auto* z0_opt = app.add_option("--z0", opt.z0, "reference impedance in ohm (default 50)");
    app.add_flag("--strict", opt.strict, "design rule failures exit non-zero");

    auto* sc_sweep = app.add_subcommand("coupling-sweep", "coupling coefficients vs rotation");
    auto* sc_imp = app.add_subcommand("impedance", "forward impedance model");
    auto* sc_fit = app.add_subcommand("bvd-fit", "fit a BVD circuit to measured impedance");
    sc_fit->add_option("input", opt.input_path, "impedance CSV (freq_hz,re_z,im_z)")->required();
    auto* sc_bode = app.add_subcommand("bode-q", "quality factor from reflection data");
    sc_bode->add_option("input", opt.input_path, ".s1p file or impedance CSV")->required();
    auto* sc_disp = app.add_subcommand("dispersion", "trace guided-wave branches");
    auto* sc_design = app.add_subcommand("design", "synthesize or check a grounded-ring layout");
    auto* sc_version = app.add_subcommand("version", "print the tool version");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return exit_usage;
    }
    opt.window_given = window_opt->count() > 0;
    opt.z0_given = z0_opt->count() > 0;

    try {
        if (sc_version->parsed()) {
            std::cout << version_string << "\n";
            return 0;
        }
        if (sc_sweep->parsed()) return cmd_coupling_sweep(opt);
        if (sc_imp->parsed()) return cmd_impedance(opt);
        if (sc_fit->parsed()) return cmd_bvd_fit(opt);
        if (sc_bode->parsed()) return cmd_bode_q(opt);
        if (sc_disp->parsed()) return cmd_dispersion(opt);
        if (sc_design->parsed()) return cmd_design(opt);
    } catch (const argument_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_usage;
    } catch (const lookup_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_usage;
    } catch (const parse_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_usage;
    } catch (const constraint_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_usage;
    } catch (const error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_numeric;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_numeric;
    }
    return 0;
}
