// End-to-end checks of the command-line tool: spec'd example invocations,
// output formats and sinks, config-file precedence, determinism, and the
// exit-code contract (0 success, 2 validation, 3 numerical diagnostic).
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <string>
#include <vector>

#include <json.hpp>

#include "clusterbell/experiment.hpp"
#include "clusterbell/wavepacket.hpp"
#include "cli_util.hpp"
#include "test_util.hpp"

namespace wp = clusterbell::wavepacket;

namespace {

std::string g_binary;

const double kTsirelson = 2.0 * std::numbers::sqrt2;

void check_chsh_examples() {
    // Rounded inputs are renormalized, so the quantum value is still exact.
    const CliResult spec_example = run_cli(
        g_binary,
        "chsh --a1 0,0,1 --a2 1,0,0 --b1 -0.7071,0,-0.7071 "
        "--b2 0.7071,0,-0.7071");
    CHECK(spec_example.status == 0);
    CHECK(spec_example.out.find("2.828427") != std::string::npos);
    const CsvTable table = parse_csv(spec_example.out);
    CHECK(table.header ==
          (std::vector<std::string>{"a1", "a2", "b1", "b2", "e11", "e12",
                                    "e21", "e22", "chsh"}));
    CHECK(table.rows.size() == 1);
    CHECK_NEAR(table.value(0, "chsh"), kTsirelson, 1e-12);
    CHECK_NEAR(table.value(0, "e11"), 1.0 / std::numbers::sqrt2, 1e-12);

    const CliResult defaults = run_cli(g_binary, "chsh");
    CHECK(defaults.status == 0);
    const CsvTable def_table = parse_csv(defaults.out);
    CHECK_NEAR(def_table.value(0, "chsh"), kTsirelson, 1e-12);
    // Direction cells carry commas, so they come out quoted.
    CHECK(defaults.out.find("\"0.0,0.0,1.0\"") != std::string::npos);

    // Identical invocations yield identical bytes.
    const CliResult again = run_cli(g_binary, "chsh");
    CHECK(again.out == defaults.out);
}

void check_lhv_scan() {
    const CliResult result =
        run_cli(g_binary, "lhv-scan --models 2000 --seed 7 --states 4");
    CHECK(result.status == 0);
    const CsvTable table = parse_csv(result.out);
    CHECK(table.rows.size() == 1);
    CHECK(table.cell(0, "extremal_max") == "2.0");
    CHECK(table.cell(0, "extremal_min") == "-2.0");
    CHECK(table.value(0, "random_max_abs") <= 2.0 + 1e-12);
    CHECK(table.value(0, "random_max_abs") > 0.0);
    CHECK(table.cell(0, "within_bound") == "true");
    CHECK(table.cell(0, "models") == "2000");
}

void check_overlap_oracle() {
    const CliResult result = run_cli(
        g_binary, "overlap --p0 1 --sigma 1 --delta 1 --eta adaptive --t 100 "
                  "--oracle");
    CHECK(result.status == 0);
    const CsvTable table = parse_csv(result.out);
    const double closed = table.value(0, "closed");
    const double numeric = table.value(0, "numeric");
    CHECK(closed > 0.0);
    CHECK_REL(numeric, closed, 1e-6);
    CHECK(table.value(0, "eta") == 100.0);
    CHECK(std::abs(table.value(0, "rel_residual")) <= 1e-6);

    // The emitted closed value round-trips to the library value bitwise.
    const wp::GaussianPacket packet{0.0, 1.0, 1.0, 1.0, 1.0};
    const wp::DetectorWindow window{100.0, 1.0};
    CHECK(closed == wp::detection_probability_closed(packet, window, 100.0));
}

void check_json_format() {
    const CliResult csv = run_cli(g_binary, "chsh");
    const CliResult json = run_cli(g_binary, "chsh --format json");
    CHECK(json.status == 0);
    const auto record = nlohmann::ordered_json::parse(json.out);
    const CsvTable table = parse_csv(csv.out);
    CHECK(record["chsh"].get<double>() == table.value(0, "chsh"));
    CHECK(record["b1"].get<std::string>() == table.cell(0, "b1"));
    CHECK(record.begin().key() == "a1");

    // Non-finite values map to JSON null; CSV spells them out.
    const std::string sig_args =
        "significance --p0 1 --eta 1000000 --times 1";
    const CliResult sig_csv = run_cli(g_binary, sig_args);
    CHECK(sig_csv.status == 0);
    CHECK(parse_csv(sig_csv.out).cell(0, "trials_required") == "inf");
    const CliResult sig_json = run_cli(g_binary, sig_args + " --format json");
    CHECK(nlohmann::json::parse(sig_json.out)["trials_required"].is_null());
}

void check_out_file_and_config() {
    const CliResult direct = run_cli(g_binary, "chsh");
    std::remove("cli_file.tmp");
    const CliResult to_file = run_cli(g_binary, "chsh --out cli_file.tmp");
    CHECK(to_file.status == 0);
    CHECK(to_file.out.empty());
    CHECK(read_file("cli_file.tmp") == direct.out);

    {
        std::ofstream cfg("cli_cfg.tmp");
        cfg << "p0=1\n" << "eta=2.5\n" << "t=0.5\n";
    }
    const CliResult from_config =
        run_cli(g_binary, "overlap --config cli_cfg.tmp");
    CHECK(from_config.status == 0);
    const CsvTable cfg_table = parse_csv(from_config.out);
    CHECK(cfg_table.value(0, "eta") == 2.5);
    CHECK(cfg_table.value(0, "p0") == 1.0);
    CHECK(cfg_table.value(0, "time") == 0.5);
    const wp::GaussianPacket packet{0.0, 1.0, 1.0, 1.0, 1.0};
    CHECK(cfg_table.value(0, "closed") ==
          wp::detection_probability_closed(packet, wp::DetectorWindow{2.5, 1.0},
                                           0.5));

    // Command-line flags override config values.
    const CliResult overridden =
        run_cli(g_binary, "overlap --config cli_cfg.tmp --eta 3.5");
    CHECK(parse_csv(overridden.out).value(0, "eta") == 3.5);

    // A config file can carry the whole sweep.
    {
        std::ofstream cfg("cli_sweep_cfg.tmp");
        cfg << "t-start=0\n" << "t-stop=10\n" << "points=5\n";
    }
    const CliResult sweep_cfg =
        run_cli(g_binary, "time-scan --config cli_sweep_cfg.tmp");
    CHECK(sweep_cfg.status == 0);
    CHECK(parse_csv(sweep_cfg.out).rows.size() == 5);

    // Unknown keys and missing files are rejected.
    {
        std::ofstream cfg("cli_bad_cfg.tmp");
        cfg << "no-such-flag=1\n";
    }
    CHECK(run_cli(g_binary, "chsh --config cli_bad_cfg.tmp").status == 2);
    CHECK(run_cli(g_binary, "chsh --config does_not_exist.tmp").status == 2);
}

void check_time_scan() {
    const CliResult result =
        run_cli(g_binary, "time-scan --t-start 0 --t-stop 10 --points 5");
    CHECK(result.status == 0);
    const CsvTable table = parse_csv(result.out);
    CHECK(table.rows.size() == 5);
    CHECK(table.value(0, "time") == 0.0);
    CHECK(table.value(4, "time") == 10.0);
    CHECK(table.value(0, "p_joint") == 1.0);
    CHECK_NEAR(table.value(0, "damped_chsh"), kTsirelson, 1e-12);
    // Defaults are symmetric, so the sides agree exactly.
    for (std::size_t i = 0; i < table.rows.size(); ++i) {
        CHECK(table.cell(i, "p_side_plus") == table.cell(i, "p_side_minus"));
    }

    const CliResult log_scan = run_cli(
        g_binary,
        "time-scan --t-start 1 --t-stop 100 --points 3 --spacing log");
    const CsvTable log_table = parse_csv(log_scan.out);
    CHECK_REL(log_table.value(1, "time"), 10.0, 1e-12);
}

void check_field2pt() {
    const CliResult points =
        run_cli(g_binary, "field2pt --r-start 1 --r-stop 10 --points 10");
    CHECK(points.status == 0);
    const CsvTable table = parse_csv(points.out);
    CHECK(table.rows.size() == 10);
    for (std::size_t i = 0; i + 1 < table.rows.size(); ++i) {
        CHECK(table.value(i, "exact") > table.value(i + 1, "exact"));
    }
    const double ratio_last = table.value(9, "ratio");
    CHECK(ratio_last > 1.0);
    CHECK(ratio_last < 1.1);

    const CliResult fit = run_cli(
        g_binary, "field2pt --fit --r-start 5 --r-stop 20 --points 40");
    CHECK(fit.status == 0);
    const CsvTable fit_table = parse_csv(fit.out);
    CHECK_REL(fit_table.value(0, "fitted_rate"), 1.0, 0.02);
    CHECK(fit_table.value(0, "rel_error") <= 0.02);
}

void check_montecarlo() {
    const std::string args =
        "montecarlo --p0 1 --eta adaptive --times 10 --trials 200000 --seed 5";
    const CliResult a = run_cli(g_binary, args);
    CHECK(a.status == 0);
    const CliResult b = run_cli(g_binary, args);
    CHECK(a.out == b.out);

    // Thread cap must not leak into the emitted bytes.
    const CliResult t1 = run_cli(g_binary, args, "CLUSTERBELL_THREADS=1");
    const CliResult t7 = run_cli(g_binary, args, "CLUSTERBELL_THREADS=7");
    CHECK(t1.status == 0);
    CHECK(t7.status == 0);
    CHECK(t1.out == a.out);
    CHECK(t7.out == a.out);

    const CsvTable table = parse_csv(a.out);
    CHECK(table.rows.size() == 1);
    CHECK(table.value(0, "coincidences") > 0.0);
    CHECK(table.cell(0, "zero_coincidences") == "false");
    CHECK(std::abs(table.value(0, "empirical_chsh") - kTsirelson) < 0.5);

    // A detector far from both packets starves the coincidence counter.
    const CliResult starved = run_cli(
        g_binary, "montecarlo --eta 1000000 --times 1 --trials 100 --seed 1");
    const CsvTable starved_table = parse_csv(starved.out);
    CHECK(starved_table.cell(0, "zero_coincidences") == "true");
    CHECK(starved_table.value(0, "coincidences") == 0.0);
    CHECK(starved_table.value(0, "empirical_chsh") == 0.0);
}

void check_significance() {
    const CliResult result = run_cli(g_binary, "significance --times 0");
    CHECK(result.status == 0);
    const CsvTable table = parse_csv(result.out);
    CHECK(table.value(0, "p_joint") == 1.0);
    CHECK(table.value(0, "k") == 5.0);
    CHECK_NEAR(table.value(0, "trials_required"), 72.85533905932733, 1e-9);
}

void check_units_echo() {
    const CliResult result =
        run_cli(g_binary, "overlap --p0 1 --eta 2 --t 1 --units");
    CHECK(result.status == 0);
    CHECK(result.err.find("resolved parameters:") != std::string::npos);
    CHECK(result.err.find("p0=1.0") != std::string::npos);
    CHECK(result.out.find("resolved parameters:") == std::string::npos);
}

void check_exit_codes() {
    CHECK(run_cli(g_binary, "--help").status == 0);
    CHECK(run_cli(g_binary, "--help").out.find("montecarlo") !=
          std::string::npos);
    CHECK(run_cli(g_binary, "chsh --help").status == 0);

    CHECK(run_cli(g_binary, "").status == 2);
    CHECK(run_cli(g_binary, "chsh --bogus 1").status == 2);
    CHECK(run_cli(g_binary, "overlap --sigma -1").status == 2);
    CHECK(run_cli(g_binary, "chsh --a1 1,2").status == 2);
    CHECK(run_cli(g_binary, "chsh --a1 0,0,zero").status == 2);
    CHECK(run_cli(g_binary, "lhv-scan --states 0").status == 2);
    CHECK(run_cli(g_binary,
                  "time-scan --t-start 1 --t-stop 0 --points 5").status == 2);
    CHECK(run_cli(g_binary, "time-scan").status == 2);
    CHECK(run_cli(g_binary,
                  "montecarlo --eta 1 --schedule 0:1 --times 1").status == 2);
    CHECK(run_cli(g_binary, "montecarlo --times 1 --seed 1",
                  "CLUSTERBELL_THREADS=lots").status == 2);
    CHECK(run_cli(g_binary, "overlap --grid-min -5").status == 2);

    // Deliberately inadequate oracle grid: numerical diagnostic, exit 3.
    const CliResult coarse = run_cli(
        g_binary,
        "overlap --p0 0 --eta 0 --t 0 --oracle --grid-min -20 --grid-max 20 "
        "--grid-points 64");
    CHECK(coarse.status == 3);
    CHECK(coarse.err.find("numerical diagnostic") != std::string::npos);
}

}  // namespace

int main(int argc, char** argv) {
    if (argc < 2) {
        std::fprintf(stderr, "usage: test_cli <path-to-cli>\n");
        return 2;
    }
    g_binary = argv[1];
    check_chsh_examples();
    check_lhv_scan();
    check_overlap_oracle();
    check_json_format();
    check_out_file_and_config();
    check_time_scan();
    check_field2pt();
    check_montecarlo();
    check_significance();
    check_units_echo();
    check_exit_codes();
    return test_summary("cli");
}
