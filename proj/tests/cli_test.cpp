#include <gtest/gtest.h>

#include <cmath>
#include <sstream>
#include <string>

#include "baw/bvd.hpp"
#include "baw/csv.hpp"
#include "baw/sparams.hpp"
#include "test_support.hpp"

// End-to-end checks of the installed binary: exit codes, file contract,
// flag/config precedence, and byte-identical reruns.

using namespace baw;
using test_support::csv_file;
using test_support::linspace;
using test_support::read_csv;
using test_support::read_file;
using test_support::rel_err;
using test_support::run_cli;
using test_support::temp_dir;
using test_support::write_file;

namespace {

// Pulls the value of a "key = value" line out of a summary file.
std::string kv_text(const std::string& text, const std::string& key) {
    std::istringstream in(text);
    std::string line;
    const std::string prefix = key + " = ";
    while (std::getline(in, line))
        if (line.rfind(prefix, 0) == 0) return line.substr(prefix.size());
    ADD_FAILURE() << "key `" << key << "` not found in:\n" << text;
    return "nan";
}

double kv_value(const std::string& text, const std::string& key) {
    return std::stod(kv_text(text, key));
}

std::string quoted(const std::filesystem::path& p) { return "\"" + p.string() + "\""; }

// Synthetic one-port fixture shared by the fit and Bode-Q tests.
const bvd_params& reference_circuit() {
    static const bvd_params params = bvd_params_from_targets(10.14e6, 0.296, 2000.0, 1.1e-10);
    return params;
}

std::string impedance_csv_text(const bvd_params& params, size_t points) {
    const auto freqs = linspace(0.9 * params.fs(), 1.1 * params.fp(), points);
    const impedance_spectrum spectrum = bvd_impedance(params, freqs);
    std::string text = "freq_hz,re_z,im_z\n";
    for (size_t i = 0; i < freqs.size(); ++i)
        text += format_number(freqs[i]) + "," + format_number(spectrum.z[i].real()) + "," +
                format_number(spectrum.z[i].imag()) + "\n";
    return text;
}

std::string touchstone_text(const bvd_params& params, size_t points) {
    const auto freqs = linspace(0.9 * params.fs(), 1.1 * params.fp(), points);
    const reflection_spectrum refl = z_to_s11(bvd_impedance(params, freqs), 50.0);
    std::string text = "# Hz S RI R 50\n";
    for (size_t i = 0; i < freqs.size(); ++i)
        text += format_number(freqs[i]) + " " + format_number(refl.s11[i].real()) + " " +
                format_number(refl.s11[i].imag()) + "\n";
    return text;
}

}  // namespace

TEST(cli, version_prints_the_tool_identity) {
    temp_dir tmp;
    const auto res = run_cli("version", tmp.path());
    EXPECT_EQ(res.exit_code, 0);
    EXPECT_NE(res.output.find("baw 1.0.0"), std::string::npos);
}

TEST(cli, usage_errors_exit_with_code_two) {
    temp_dir tmp;
    EXPECT_EQ(run_cli("", tmp.path()).exit_code, 2);
    EXPECT_EQ(run_cli("frobnicate", tmp.path()).exit_code, 2);
    EXPECT_EQ(run_cli("bvd-fit", tmp.path()).exit_code, 2);
    EXPECT_EQ(run_cli("coupling-sweep", tmp.path()).exit_code, 2);  // missing --config

    const auto help = run_cli("--help", tmp.path());
    EXPECT_EQ(help.exit_code, 0);
    EXPECT_NE(help.output.find("coupling-sweep"), std::string::npos);
}

TEST(cli, coupling_sweep_writes_the_default_grid) {
    temp_dir tmp;
    write_file(tmp / "run.cfg", "[material]\nname = LiNbO3_congruent\n");
    const auto res = run_cli("coupling-sweep --config " + quoted(tmp / "run.cfg") + " --out " +
                                 quoted(tmp / "out"),
                             tmp.path());
    ASSERT_EQ(res.exit_code, 0) << res.output;

    const csv_file table = read_csv(tmp / "out" / "coupling_sweep.csv");
    ASSERT_EQ(table.header.size(), 4u);
    EXPECT_EQ(table.header[0], "theta_deg");
    EXPECT_EQ(table.header[1], "k2_33");
    EXPECT_EQ(table.header[2], "k2_35");
    EXPECT_EQ(table.header[3], "k2_34");
    ASSERT_EQ(table.rows.size(), 181u);
    EXPECT_DOUBLE_EQ(table.num(0, 0), 0.0);
    EXPECT_DOUBLE_EQ(table.num(180, 0), 90.0);

    // Rotating about the crystal X axis never excites the 13 shear, so the
    // k2_35 column is flat zero and the thickness-shear physics sits in k2_34:
    // strong at 0 degrees, extinguished in the high-30s.
    double max_34 = 0.0, min_34_window = 1e9, max_35 = 0.0;
    for (size_t r = 0; r < table.rows.size(); ++r) {
        max_35 = std::max(max_35, table.num(r, 2));
        max_34 = std::max(max_34, table.num(r, 3));
        const double theta = table.num(r, 0);
        if (theta >= 30.0 && theta <= 42.0)
            min_34_window = std::min(min_34_window, table.num(r, 3));
    }
    EXPECT_LE(max_35, 1e-12);
    EXPECT_GT(max_34, 0.5);
    EXPECT_LT(min_34_window, 1e-4 * max_34);
}

TEST(cli, coupling_sweep_reruns_byte_identically) {
    temp_dir tmp;
    write_file(tmp / "run.cfg",
               "[material]\nname = LiNbO3_congruent\n"
               "[sweep]\ntheta_points = 61\n");
    const std::string base = "coupling-sweep --config " + quoted(tmp / "run.cfg");
    ASSERT_EQ(run_cli(base + " --out " + quoted(tmp / "a"), tmp.path()).exit_code, 0);
    ASSERT_EQ(run_cli(base + " --out " + quoted(tmp / "b"), tmp.path()).exit_code, 0);
    EXPECT_EQ(read_file(tmp / "a" / "coupling_sweep.csv"),
              read_file(tmp / "b" / "coupling_sweep.csv"));
}

TEST(cli, config_mistakes_exit_with_code_two) {
    temp_dir tmp;
    const std::string out = " --out " + quoted(tmp / "out");
    const auto sweep_with = [&](const std::string& cfg_text) {
        write_file(tmp / "bad.cfg", cfg_text);
        return run_cli("coupling-sweep --config " + quoted(tmp / "bad.cfg") + out, tmp.path());
    };

    // nonexistent config file
    EXPECT_EQ(run_cli("coupling-sweep --config " + quoted(tmp / "nope.cfg") + out, tmp.path())
                  .exit_code,
              2);
    // no material at all
    EXPECT_EQ(sweep_with("[sweep]\ntheta_points = 5\n").exit_code, 2);
    // unknown material
    EXPECT_EQ(sweep_with("[material]\nname = unobtainium\n").exit_code, 2);
    // leftover key a command does not consume
    EXPECT_EQ(sweep_with("[material]\nname = LiNbO3_congruent\n[sweep]\nbanana = 1\n").exit_code,
              2);
    // degenerate rotation grid
    EXPECT_EQ(
        sweep_with("[material]\nname = LiNbO3_congruent\n[sweep]\ntheta_points = 1\n").exit_code,
        2);
    // name and file are mutually exclusive
    EXPECT_EQ(sweep_with("[material]\nname = LiNbO3_congruent\nfile = x.dat\n").exit_code, 2);
}

TEST(cli, material_database_override_is_honored) {
    temp_dir tmp;
    std::filesystem::create_directories(tmp / "db");
    write_file(tmp / "db" / "custom_mat.dat",
               "name = custom_mat\n"
               "density = 2700\n"
               "cE_11 = 1.0774253731343e11\n"
               "cE_22 = 1.0774253731343e11\n"
               "cE_33 = 1.0774253731343e11\n"
               "cE_12 = 5.5503731343284e10\n"
               "cE_13 = 5.5503731343284e10\n"
               "cE_23 = 5.5503731343284e10\n"
               "cE_44 = 2.6119402985075e10\n"
               "cE_55 = 2.6119402985075e10\n"
               "cE_66 = 2.6119402985075e10\n"
               "epsS_11 = 8.8541878128e-12\n"
               "epsS_22 = 8.8541878128e-12\n"
               "epsS_33 = 8.8541878128e-12\n");
    const std::string prefix = "BAW_MATERIAL_DB=" + quoted(tmp / "db");

    write_file(tmp / "custom.cfg", "[material]\nname = custom_mat\n[sweep]\ntheta_points = 5\n");
    const auto ok = run_cli("coupling-sweep --config " + quoted(tmp / "custom.cfg") + " --out " +
                                quoted(tmp / "out"),
                            tmp.path(), prefix);
    EXPECT_EQ(ok.exit_code, 0) << ok.output;
    EXPECT_TRUE(std::filesystem::exists(tmp / "out" / "coupling_sweep.csv"));

    // the override replaces the bundled database instead of extending it
    write_file(tmp / "bundled.cfg", "[material]\nname = LiNbO3_congruent\n");
    EXPECT_EQ(run_cli("coupling-sweep --config " + quoted(tmp / "bundled.cfg") + " --out " +
                          quoted(tmp / "out"),
                      tmp.path(), prefix)
                  .exit_code,
              2);
}

TEST(cli, impedance_model_writes_spectrum_and_summary) {
    temp_dir tmp;
    write_file(tmp / "run.cfg",
               "[material]\nname = LiNbO3_congruent\neuler_deg = 0 54 0\n"
               "[plate]\nthickness_m = 300e-6\narea_m2 = 1e-4\n"
               "[impedance]\nmodel = te\n"
               "[grid]\nf_start_hz = 9.8e6\nf_stop_hz = 13.5e6\npoints = 2001\n");
    const auto res = run_cli("impedance --config " + quoted(tmp / "run.cfg") + " --out " +
                                 quoted(tmp / "out"),
                             tmp.path());
    ASSERT_EQ(res.exit_code, 0) << res.output;

    const csv_file table = read_csv(tmp / "out" / "impedance.csv");
    EXPECT_EQ(table.header, (std::vector<std::string>{"freq_hz", "re_z", "im_z"}));
    EXPECT_EQ(table.rows.size(), 2001u);

    const std::string summary = read_file(tmp / "out" / "impedance_summary.txt");
    EXPECT_LT(rel_err(kv_value(summary, "fs_hz"), 10927668.98), 1e-6);
    EXPECT_LT(rel_err(kv_value(summary, "fp_hz"), 12213911.4), 1e-6);
    EXPECT_LT(rel_err(kv_value(summary, "kt2"), 0.2346212698), 1e-6);
    EXPECT_LT(rel_err(kv_value(summary, "fs_estimate_hz"), kv_value(summary, "fs_hz")), 1e-3);
}

TEST(cli, bvd_impedance_model_recovers_its_targets) {
    temp_dir tmp;
    write_file(tmp / "run.cfg",
               "[impedance]\nmodel = bvd\n"
               "[bvd]\nfs_hz = 1.014e7\nk2 = 0.296\nq = 2000\nc0_f = 1.1e-10\n"
               "[grid]\nf_start_hz = 9.0e6\nf_stop_hz = 12.5e6\npoints = 3001\n");
    const auto res = run_cli("impedance --config " + quoted(tmp / "run.cfg") + " --out " +
                                 quoted(tmp / "out"),
                             tmp.path());
    ASSERT_EQ(res.exit_code, 0) << res.output;

    const std::string summary = read_file(tmp / "out" / "impedance_summary.txt");
    EXPECT_LT(rel_err(kv_value(summary, "c0_f"), 1.1e-10), 1e-9);
    EXPECT_NEAR(kv_value(summary, "k2_estimate"), 0.296, 0.003);
    EXPECT_LT(rel_err(kv_value(summary, "fs_estimate_hz"), 1.014e7), 1e-3);
}

TEST(cli, bvd_fit_round_trips_a_synthetic_spectrum) {
    temp_dir tmp;
    const bvd_params& params = reference_circuit();
    write_file(tmp / "meas.csv", impedance_csv_text(params, 4001));

    // no --config: the command runs entirely on defaults
    const auto res = run_cli("bvd-fit " + quoted(tmp / "meas.csv") + " --out " +
                                 quoted(tmp / "out"),
                             tmp.path());
    ASSERT_EQ(res.exit_code, 0) << res.output;

    const std::string report = read_file(tmp / "out" / "fit_report.txt");
    EXPECT_NEAR(kv_value(report, "k2"), 0.296, 0.003);
    EXPECT_LT(rel_err(kv_value(report, "q"), 2000.0), 0.03);
    EXPECT_LT(rel_err(kv_value(report, "fs"), params.fs()), 1e-6);
    EXPECT_LT(rel_err(kv_value(report, "c0"), 1.1e-10), 1e-3);

    const std::string metrics = read_file(tmp / "out" / "spurious_metrics.txt");
    EXPECT_EQ(kv_text(metrics, "spurious_peak_count"), "0");

    const csv_file table = read_csv(tmp / "out" / "bvd_fit.csv");
    EXPECT_EQ(table.header, (std::vector<std::string>{"freq_hz", "re_z_meas", "im_z_meas",
                                                      "re_z_fit", "im_z_fit"}));
    EXPECT_EQ(table.rows.size(), 4001u);
}

TEST(cli, bvd_fit_rejects_a_plain_capacitor) {
    temp_dir tmp;
    std::string text = "freq_hz,re_z,im_z\n";
    for (double f : linspace(1e6, 2e6, 200))
        text += format_number(f) + ",0," + format_number(-1.0 / (2e-10 * 2.0 * M_PI * f)) + "\n";
    write_file(tmp / "cap.csv", text);
    const auto res = run_cli("bvd-fit " + quoted(tmp / "cap.csv") + " --out " +
                                 quoted(tmp / "out"),
                             tmp.path());
    EXPECT_EQ(res.exit_code, 3);
}

TEST(cli, bode_q_summary_reports_the_smoothed_peak) {
    temp_dir tmp;
    const bvd_params& params = reference_circuit();
    write_file(tmp / "meas.s1p", touchstone_text(params, 20000));
    write_file(tmp / "run.cfg", "[band]\nfs_hz = " + format_number(params.fs()) +
                                    "\nfp_hz = " + format_number(params.fp()) + "\nk2 = 0.296\n");
    const auto res = run_cli("bode-q " + quoted(tmp / "meas.s1p") + " --config " +
                                 quoted(tmp / "run.cfg") + " --out " + quoted(tmp / "out"),
                             tmp.path());
    ASSERT_EQ(res.exit_code, 0) << res.output;

    const std::string summary = read_file(tmp / "out" / "bode_q_summary.txt");
    EXPECT_LT(rel_err(kv_value(summary, "q_at_fs"), 2000.0), 0.05);
    EXPECT_GE(kv_value(summary, "q_max"), kv_value(summary, "q_at_fs"));
    EXPECT_LT(rel_err(kv_value(summary, "fom_max"), 0.296 * kv_value(summary, "q_max")), 1e-9);
    EXPECT_EQ(kv_text(summary, "window"), "80");
    EXPECT_EQ(kv_text(summary, "kernel"), "mean");

    const csv_file table = read_csv(tmp / "out" / "bode_q.csv");
    EXPECT_EQ(table.header, (std::vector<std::string>{"freq_hz", "q", "valid"}));
    EXPECT_EQ(table.rows.size(), 20000u);
}

TEST(cli, window_flag_overrides_the_config_key) {
    temp_dir tmp;
    const bvd_params& params = reference_circuit();
    write_file(tmp / "meas.s1p", touchstone_text(params, 2000));
    write_file(tmp / "run.cfg", "[band]\nwindow = 40\nfs_hz = " + format_number(params.fs()) +
                                    "\nfp_hz = " + format_number(params.fp()) + "\nk2 = 0.296\n");
    const std::string base = "bode-q " + quoted(tmp / "meas.s1p") + " --config " +
                             quoted(tmp / "run.cfg");

    const auto from_config = run_cli(base + " --out " + quoted(tmp / "a"), tmp.path());
    ASSERT_EQ(from_config.exit_code, 0) << from_config.output;
    EXPECT_EQ(kv_text(read_file(tmp / "a" / "bode_q_summary.txt"), "window"), "40");

    // the flag wins, and the config key must stay consumed under the override
    const auto from_flag = run_cli(base + " --window 20 --out " + quoted(tmp / "b"), tmp.path());
    ASSERT_EQ(from_flag.exit_code, 0) << from_flag.output;
    EXPECT_EQ(kv_text(read_file(tmp / "b" / "bode_q_summary.txt"), "window"), "20");
}

TEST(cli, bode_q_reads_impedance_csv_with_a_reference) {
    temp_dir tmp;
    const bvd_params& params = reference_circuit();
    write_file(tmp / "meas.csv", impedance_csv_text(params, 2000));
    const auto res = run_cli("bode-q " + quoted(tmp / "meas.csv") + " --z0 50 --out " +
                                 quoted(tmp / "out"),
                             tmp.path());
    ASSERT_EQ(res.exit_code, 0) << res.output;
    EXPECT_EQ(read_csv(tmp / "out" / "bode_q.csv").rows.size(), 2000u);
    // no band targets given, so no summary is written
    EXPECT_FALSE(std::filesystem::exists(tmp / "out" / "bode_q_summary.txt"));
}

TEST(cli, dispersion_rows_are_deterministic) {
    temp_dir tmp;
    write_file(tmp / "run.cfg",
               "[material]\nname = LiNbO3_congruent\neuler_deg = 0 54 0\n"
               "[plate]\nthickness_m = 300e-6\n"
               "[dispersion]\nbc = short\nelements = 8\nkx_points = 12\n"
               "kx_stop_1pm = 9000\nf_hi_hz = 14e6\n");
    const std::string base = "dispersion --config " + quoted(tmp / "run.cfg");
    const auto res = run_cli(base + " --out " + quoted(tmp / "a"), tmp.path());
    ASSERT_EQ(res.exit_code, 0) << res.output;

    const csv_file table = read_csv(tmp / "a" / "dispersion.csv");
    EXPECT_EQ(table.header,
              (std::vector<std::string>{"bc", "family", "freq_hz", "re_kx", "im_kx", "vg"}));
    EXPECT_GE(table.rows.size(), 24u);
    for (const auto& row : table.rows) {
        EXPECT_EQ(row[0], "short");
        EXPECT_EQ(row[4], "0");  // traced branches are real
    }

    ASSERT_EQ(run_cli(base + " --out " + quoted(tmp / "b"), tmp.path()).exit_code, 0);
    EXPECT_EQ(read_file(tmp / "a" / "dispersion.csv"), read_file(tmp / "b" / "dispersion.csv"));
}

TEST(cli, dispersion_writes_lengths_at_the_requested_frequency) {
    temp_dir tmp;
    write_file(tmp / "run.cfg",
               "[material]\nname = LiNbO3_congruent\neuler_deg = 0 54 0\n"
               "[plate]\nthickness_m = 300e-6\n"
               "[dispersion]\nbc = short\nelements = 8\nkx_points = 12\n"
               "kx_stop_1pm = 9000\nf_hi_hz = 14e6\nf_eval_hz = 12.9e6\n");
    const auto res = run_cli("dispersion --config " + quoted(tmp / "run.cfg") + " --out " +
                                 quoted(tmp / "out"),
                             tmp.path());
    ASSERT_EQ(res.exit_code, 0) << res.output;

    const std::string lengths = read_file(tmp / "out" / "lengths.txt");
    EXPECT_EQ(kv_text(lengths, "eval_freq_hz"), "12900000");

    // the snapshot rows carry the evaluation frequency verbatim
    const csv_file table = read_csv(tmp / "out" / "dispersion.csv");
    const int fcol = table.col("freq_hz");
    size_t snapshot_rows = 0;
    for (const auto& row : table.rows)
        if (row[fcol] == "12900000") ++snapshot_rows;
    EXPECT_GE(snapshot_rows, 1u);
}

TEST(cli, design_strict_gates_on_rule_failures) {
    temp_dir tmp;
    // a 30 um ring can never hold off a crossing wavelength of hundreds of um
    write_file(tmp / "run.cfg",
               "[material]\nname = LiNbO3_congruent\neuler_deg = 0 54 0\n"
               "[design]\nthickness_m = 300e-6\nactive_radius_m = 7e-3\n"
               "gap_width_m = 100e-6\nring_width_m = 30e-6\ndie_side_m = 20e-3\n"
               "f_eval_hz = 12.9e6\nelements = 8\n");
    const std::string base = "design --config " + quoted(tmp / "run.cfg") + " --out " +
                             quoted(tmp / "out");

    const auto lenient = run_cli(base, tmp.path());
    EXPECT_EQ(lenient.exit_code, 0) << lenient.output;
    EXPECT_NE(lenient.output.find("overall: fail"), std::string::npos);

    const auto strict = run_cli(base + " --strict", tmp.path());
    EXPECT_EQ(strict.exit_code, 1) << strict.output;

    const std::string report = read_file(tmp / "out" / "design_report.txt");
    EXPECT_NE(report.find("short-circuit crossing wavelength"), std::string::npos);
    EXPECT_NE(report.find("overall: fail"), std::string::npos);
}

TEST(cli, design_synthesis_passes_its_own_rules) {
    temp_dir tmp;
    write_file(tmp / "run.cfg",
               "[material]\nname = LiNbO3_congruent\neuler_deg = 0 54 0\n"
               "[design]\ntarget_fs_hz = 10.14e6\n");
    const auto res = run_cli("design --config " + quoted(tmp / "run.cfg") + " --out " +
                                 quoted(tmp / "out") + " --strict",
                             tmp.path());
    ASSERT_EQ(res.exit_code, 0) << res.output;
    EXPECT_NE(res.output.find("overall: pass"), std::string::npos);

    const std::string report = read_file(tmp / "out" / "design_report.txt");
    EXPECT_LT(rel_err(kv_value(report, "fs_hz"), 10.14e6), 1e-6);
    EXPECT_LT(rel_err(kv_value(report, "thickness_m"), 323.3038161e-6), 1e-4);
    EXPECT_GT(kv_value(report, "gap_width_m"), 0.0);
    EXPECT_GT(kv_value(report, "ring_width_m"), 0.0);
    EXPECT_NE(report.find("overall: pass"), std::string::npos);
}
