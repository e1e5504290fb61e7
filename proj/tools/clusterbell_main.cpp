// Command-line front end. One subcommand per claim cluster: spin algebra
// (chsh, lhv-scan), wave packet detection (overlap, time-scan), field
// clustering (field2pt), and the coincidence experiment (montecarlo,
// significance). Exit codes: 0 success, 2 validation error, 3 numerical
// diagnostic (inadequate oracle grid or oracle residual beyond tolerance).

#include <charconv>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>

#include "clusterbell/cluster_field.hpp"
#include "clusterbell/experiment.hpp"
#include "clusterbell/io.hpp"
#include "clusterbell/rng.hpp"
#include "clusterbell/spin_chsh.hpp"
#include "clusterbell/wavepacket.hpp"

namespace {

namespace cf = clusterbell::cluster_field;
namespace ex = clusterbell::experiment;
namespace io = clusterbell::io;
namespace sc = clusterbell::spin_chsh;
namespace wp = clusterbell::wavepacket;

constexpr double kOracleRelTol = 1e-6;
constexpr double kOracleAbsTol = 1e-14;
constexpr double kOracleAbsSwitch = 1e-12;

double parse_double(const std::string& text, const std::string& what) {
    double value = 0.0;
    const char* first = text.data();
    const char* last = first + text.size();
    const auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc() || ptr != last) {
        throw std::invalid_argument(what + ": cannot parse '" + text +
                                    "' as a number");
    }
    return value;
}

std::vector<std::string> split(const std::string& text, char sep) {
    std::vector<std::string> parts;
    std::size_t begin = 0;
    while (true) {
        const std::size_t end = text.find(sep, begin);
        if (end == std::string::npos) {
            parts.push_back(text.substr(begin));
            return parts;
        }
        parts.push_back(text.substr(begin, end - begin));
        begin = end + 1;
    }
}

// Accepts 'x,y,z' and renormalizes exactly, so inputs rounded to a few
// digits (e.g. 0.7071) still yield unit directions.
sc::SpinDirection parse_direction(const std::string& text,
                                  const std::string& flag) {
    const auto parts = split(text, ',');
    if (parts.size() != 3) {
        throw std::invalid_argument(flag + ": expected 'x,y,z', got '" + text +
                                    "'");
    }
    return sc::SpinDirection::normalized(parse_double(parts[0], flag),
                                         parse_double(parts[1], flag),
                                         parse_double(parts[2], flag));
}

std::string direction_string(const sc::SpinDirection& d) {
    return io::format_value(d.x()) + "," + io::format_value(d.y()) + "," +
           io::format_value(d.z());
}

struct OutputOptions {
    std::string format = "csv";
    std::string out_path;
    std::string config_path;
    bool units = false;
};

// Config files are applied after the command-line parse (see apply_config),
// so the registry remembers which path belongs to which subcommand.
using ConfigRegistry = std::vector<std::pair<CLI::App*, const std::string*>>;

void add_output_options(CLI::App* sub, OutputOptions* opts,
                        ConfigRegistry* registry) {
    sub->add_option("--format", opts->format, "output format")
        ->check(CLI::IsMember({"csv", "json"}))
        ->capture_default_str();
    sub->add_option("--out", opts->out_path,
                    "write records to FILE instead of stdout");
    sub->add_flag("--units", opts->units,
                  "echo the resolved parameter set to stderr before running");
    sub->add_option("--config", opts->config_path,
                    "flat key=value config file; command-line flags override")
        ->configurable(false);
    sub->allow_config_extras(CLI::config_extras_mode::error);
    registry->emplace_back(sub, &opts->config_path);
}

// Feeds the config file through the subcommand's own parser: values apply
// only to options still empty, so command-line flags win. Unknown keys are
// rejected.
void apply_config(CLI::App* sub, const std::string& path) {
    if (path.empty()) return;
    std::ifstream file(path);
    if (!file) {
        throw std::invalid_argument("cannot read config file: " + path);
    }
    sub->parse_from_stream(file);
}

int emit(const io::Table& table, const OutputOptions& opts) {
    const io::OutputFormat format = opts.format == "json"
                                        ? io::OutputFormat::kJsonLines
                                        : io::OutputFormat::kCsv;
    if (opts.out_path.empty()) {
        io::write_table(std::cout, table, format);
    } else {
        std::ofstream file(opts.out_path, std::ios::binary);
        if (!file) {
            throw std::invalid_argument("cannot open output file: " +
                                        opts.out_path);
        }
        io::write_table(file, table, format);
    }
    return 0;
}

void echo_units(const OutputOptions& out,
                const std::vector<std::pair<std::string, std::string>>& params) {
    if (!out.units) return;
    std::cerr << "resolved parameters:";
    for (const auto& [key, value] : params) {
        std::cerr << ' ' << key << '=' << value;
    }
    std::cerr << '\n';
}

std::string num(double v) { return io::format_value(v); }

struct PhysicsOptions {
    double sigma = 1.0;
    double delta = 1.0;
    double p0 = 0.0;
    double mass = 1.0;
    double hbar = 1.0;
};

void add_physics_options(CLI::App* sub, PhysicsOptions* phys) {
    sub->add_option("--sigma", phys->sigma, "initial packet width")
        ->capture_default_str();
    sub->add_option("--delta", phys->delta, "detector window width")
        ->capture_default_str();
    sub->add_option("--p0", phys->p0,
                    "mean momentum of side one; side two carries -p0")
        ->capture_default_str();
    sub->add_option("--mass", phys->mass, "particle mass")
        ->capture_default_str();
    sub->add_option("--hbar", phys->hbar, "reduced Planck constant")
        ->capture_default_str();
}

std::vector<std::pair<std::string, std::string>> physics_params(
    const PhysicsOptions& phys) {
    return {{"sigma", num(phys.sigma)},
            {"delta", num(phys.delta)},
            {"p0", num(phys.p0)},
            {"mass", num(phys.mass)},
            {"hbar", num(phys.hbar)}};
}

struct DirectionOptions {
    std::string a1, a2, b1, b2;  // empty = maximal-violation setting
};

void add_direction_options(CLI::App* sub, DirectionOptions* dirs) {
    const std::string help =
        "measurement direction 'x,y,z', renormalized "
        "(default: maximal-violation setting)";
    sub->add_option("--a1", dirs->a1, "first side, " + help);
    sub->add_option("--a2", dirs->a2, "first side, " + help);
    sub->add_option("--b1", dirs->b1, "second side, " + help);
    sub->add_option("--b2", dirs->b2, "second side, " + help);
}

sc::ChshSetting resolve_setting(const DirectionOptions& dirs) {
    sc::ChshSetting setting = sc::max_violation_setting();
    if (!dirs.a1.empty()) setting.a1 = parse_direction(dirs.a1, "--a1");
    if (!dirs.a2.empty()) setting.a2 = parse_direction(dirs.a2, "--a2");
    if (!dirs.b1.empty()) setting.b1 = parse_direction(dirs.b1, "--b1");
    if (!dirs.b2.empty()) setting.b2 = parse_direction(dirs.b2, "--b2");
    return setting;
}

struct StrategyOptions {
    std::string eta = "0";
    std::string schedule;
};

void add_strategy_options(CLI::App* sub, StrategyOptions* strat) {
    auto* eta_opt =
        sub->add_option("--eta", strat->eta,
                        "detector center: a number, or 'adaptive' to follow "
                        "the packet center (p0/m)t")
            ->capture_default_str();
    auto* schedule_opt = sub->add_option(
        "--schedule", strat->schedule,
        "piecewise-constant detector centers 't1:eta1,t2:eta2,...'");
    eta_opt->excludes(schedule_opt);
    schedule_opt->excludes(eta_opt);
}

ex::DetectorStrategy resolve_strategy(const StrategyOptions& strat) {
    if (!strat.schedule.empty()) {
        std::vector<std::pair<double, double>> entries;
        for (const auto& item : split(strat.schedule, ',')) {
            const std::size_t colon = item.find(':');
            if (colon == std::string::npos) {
                throw std::invalid_argument(
                    "--schedule entries must look like 't:eta', got '" + item +
                    "'");
            }
            entries.emplace_back(
                parse_double(item.substr(0, colon), "--schedule"),
                parse_double(item.substr(colon + 1), "--schedule"));
        }
        return ex::DetectorStrategy::make_schedule(entries);
    }
    if (strat.eta == "adaptive") return ex::DetectorStrategy::make_adaptive();
    return ex::DetectorStrategy::make_static(parse_double(strat.eta, "--eta"));
}

std::string strategy_label(const StrategyOptions& strat) {
    if (!strat.schedule.empty()) return "schedule " + strat.schedule;
    return strat.eta == "adaptive" ? std::string("adaptive")
                                   : "static " + strat.eta;
}

// Sweep flags stay optional at parse time so a config file can supply
// them; SweepSpec::validate rejects the sentinel defaults.
struct SweepOptions {
    double start = std::numeric_limits<double>::quiet_NaN();
    double stop = std::numeric_limits<double>::quiet_NaN();
    std::size_t points = 0;
    std::string spacing = "linear";
};

void add_sweep_options(CLI::App* sub, const std::string& prefix,
                       SweepOptions* sweep) {
    sub->add_option("--" + prefix + "-start", sweep->start, "sweep start");
    sub->add_option("--" + prefix + "-stop", sweep->stop, "sweep stop");
    sub->add_option("--points", sweep->points, "number of sweep points");
    sub->add_option("--spacing", sweep->spacing, "sweep point spacing")
        ->check(CLI::IsMember({"linear", "log", "logarithmic"}))
        ->capture_default_str();
}

io::SweepSpec resolve_sweep(const SweepOptions& sweep) {
    const io::Spacing spacing = sweep.spacing == "linear"
                                    ? io::Spacing::kLinear
                                    : io::Spacing::kLogarithmic;
    io::SweepSpec spec{sweep.start, sweep.stop, sweep.points, spacing};
    spec.validate();
    return spec;
}

ex::ExperimentConfig make_config(const PhysicsOptions& phys,
                                 const DirectionOptions& dirs,
                                 const StrategyOptions& strat) {
    ex::ExperimentConfig cfg;
    cfg.sigma = phys.sigma;
    cfg.delta = phys.delta;
    cfg.p0 = phys.p0;
    cfg.mass = phys.mass;
    cfg.hbar = phys.hbar;
    cfg.setting = resolve_setting(dirs);
    cfg.strategy = resolve_strategy(strat);
    return cfg;
}

// ---------------------------------------------------------------- chsh --

struct ChshOptions {
    DirectionOptions dirs;
    OutputOptions out;
};

int run_chsh(const ChshOptions& opts) {
    const sc::ChshSetting setting = resolve_setting(opts.dirs);
    const sc::TwoQubitState singlet = sc::singlet_state();
    echo_units(opts.out, {{"a1", direction_string(setting.a1)},
                          {"a2", direction_string(setting.a2)},
                          {"b1", direction_string(setting.b1)},
                          {"b2", direction_string(setting.b2)}});
    io::Table table({"a1", "a2", "b1", "b2", "e11", "e12", "e21", "e22",
                     "chsh"});
    table.add_row({direction_string(setting.a1), direction_string(setting.a2),
                   direction_string(setting.b1), direction_string(setting.b2),
                   sc::spin_correlator(singlet, setting.a1, setting.b1),
                   sc::spin_correlator(singlet, setting.a1, setting.b2),
                   sc::spin_correlator(singlet, setting.a2, setting.b1),
                   sc::spin_correlator(singlet, setting.a2, setting.b2),
                   sc::chsh_value(singlet, setting)});
    return emit(table, opts.out);
}

// ------------------------------------------------------------ lhv-scan --

struct LhvScanOptions {
    std::uint64_t models = 1000;
    std::size_t states = 3;
    std::uint64_t seed = 0;
    OutputOptions out;
};

int run_lhv_scan(const LhvScanOptions& opts) {
    echo_units(opts.out, {{"models", std::to_string(opts.models)},
                          {"states", std::to_string(opts.states)},
                          {"seed", std::to_string(opts.seed)}});
    double extremal_max = -std::numeric_limits<double>::infinity();
    double extremal_min = std::numeric_limits<double>::infinity();
    for (const sc::LhvExtremal& extremal : sc::lhv_extremal_scan()) {
        extremal_max = std::max(extremal_max, extremal.value);
        extremal_min = std::min(extremal_min, extremal.value);
    }
    const clusterbell::rng::CounterRng rng(opts.seed);
    double random_max_abs = 0.0;
    for (std::uint64_t i = 0; i < opts.models; ++i) {
        const sc::LhvModel model = ex::random_lhv_model(rng, i, opts.states);
        random_max_abs = std::max(random_max_abs,
                                  std::abs(sc::lhv_chsh_value(model)));
    }
    const bool within_bound =
        extremal_max <= 2.0 && -extremal_min <= 2.0 &&
        random_max_abs <= 2.0 + 1e-12;
    io::Table table({"models", "states", "seed", "extremal_max",
                     "extremal_min", "random_max_abs", "within_bound"});
    table.add_row({static_cast<std::int64_t>(opts.models),
                   static_cast<std::int64_t>(opts.states),
                   static_cast<std::int64_t>(opts.seed), extremal_max,
                   extremal_min, random_max_abs, within_bound});
    return emit(table, opts.out);
}

// ------------------------------------------------------------- overlap --

struct OverlapOptions {
    PhysicsOptions phys;
    double x0 = 0.0;
    std::string eta = "0";
    double t = 0.0;
    bool oracle = false;
    double grid_min = 0.0;
    double grid_max = 0.0;
    std::size_t grid_points = 0;
    bool grid_given = false;
    OutputOptions out;
};

int run_overlap(const OverlapOptions& opts) {
    const wp::GaussianPacket packet{opts.x0, opts.phys.p0, opts.phys.sigma,
                                    opts.phys.mass, opts.phys.hbar};
    packet.validate();
    const double eta = opts.eta == "adaptive"
                           ? opts.phys.p0 * opts.t / opts.phys.mass
                           : parse_double(opts.eta, "--eta");
    const wp::DetectorWindow window{eta, opts.phys.delta};
    window.validate();

    auto params = physics_params(opts.phys);
    params.emplace_back("x0", num(opts.x0));
    params.emplace_back("eta", num(eta));
    params.emplace_back("t", num(opts.t));
    echo_units(opts.out, params);

    const double closed = wp::detection_probability_closed(packet, window,
                                                           opts.t);
    std::vector<std::string> columns = {"time",  "p0", "sigma", "delta",
                                        "mass",  "hbar", "x0",  "eta",
                                        "closed"};
    std::vector<io::Value> row = {opts.t,         opts.phys.p0,
                                  opts.phys.sigma, opts.phys.delta,
                                  opts.phys.mass,  opts.phys.hbar,
                                  opts.x0,         eta,
                                  closed};
    int status = 0;
    if (opts.oracle) {
        const wp::GridSpec grid =
            opts.grid_given
                ? wp::GridSpec{opts.grid_min, opts.grid_max, opts.grid_points}
                : wp::GridSpec::recommended(packet, window, opts.t);
        const double numeric =
            wp::detection_probability_numeric(packet, window, opts.t, grid);
        const double residual = numeric - closed;
        const double rel_residual =
            closed > 0.0 ? std::abs(residual) / closed
                         : std::numeric_limits<double>::infinity();
        columns.insert(columns.end(), {"numeric", "residual", "rel_residual"});
        row.insert(row.end(), {numeric, residual, rel_residual});
        const bool ok = closed >= kOracleAbsSwitch
                            ? std::abs(residual) <= kOracleRelTol * closed
                            : std::abs(residual) <= kOracleAbsTol;
        if (!ok) {
            std::cerr << "numerical diagnostic: oracle residual " << residual
                      << " exceeds tolerance (closed=" << closed << ")\n";
            status = 3;
        }
    }
    io::Table table(columns);
    table.add_row(row);
    emit(table, opts.out);
    return status;
}

// ----------------------------------------------------------- time-scan --

struct TimeScanOptions {
    PhysicsOptions phys;
    DirectionOptions dirs;
    StrategyOptions strat;
    SweepOptions sweep;
    OutputOptions out;
};

int run_time_scan(const TimeScanOptions& opts) {
    ex::ExperimentConfig cfg = make_config(opts.phys, opts.dirs, opts.strat);
    cfg.times = resolve_sweep(opts.sweep).values();
    cfg.validate();
    auto params = physics_params(opts.phys);
    params.emplace_back("strategy", strategy_label(opts.strat));
    echo_units(opts.out, params);

    io::Table table({"time", "eta", "p_side_plus", "p_side_minus", "p_joint",
                     "damped_chsh"});
    for (const double t : cfg.times) {
        const ex::SideProbabilities sides = ex::side_probabilities(cfg, t);
        table.add_row({t, cfg.strategy.eta_at(t, cfg.p0, cfg.mass),
                       sides.plus, sides.minus,
                       ex::joint_detection_probability(cfg, t),
                       ex::damped_chsh(cfg, t)});
    }
    return emit(table, opts.out);
}

// ------------------------------------------------------------- field2pt --

struct Field2PtOptions {
    double mass = 1.0;
    SweepOptions sweep;
    bool fit = false;
    OutputOptions out;
};

int run_field2pt(const Field2PtOptions& opts) {
    const cf::FieldParams params{opts.mass};
    params.validate();
    echo_units(opts.out, {{"mass", num(opts.mass)}});
    if (opts.fit) {
        const double rate = cf::decay_rate_fit(params, opts.sweep.start,
                                               opts.sweep.stop,
                                               opts.sweep.points);
        io::Table table({"mass", "r_min", "r_max", "points", "fitted_rate",
                         "rel_error"});
        table.add_row({opts.mass, opts.sweep.start, opts.sweep.stop,
                       static_cast<std::int64_t>(opts.sweep.points), rate,
                       std::abs(rate - opts.mass) / opts.mass});
        return emit(table, opts.out);
    }
    io::Table table({"r", "exact", "asymptotic", "ratio"});
    for (const double r : resolve_sweep(opts.sweep).values()) {
        const double exact = cf::two_point(params, r);
        const double asymptotic = cf::two_point_asymptotic(params, r);
        table.add_row({r, exact, asymptotic, exact / asymptotic});
    }
    return emit(table, opts.out);
}

// ----------------------------------------------------------- montecarlo --

struct MonteCarloOptions {
    PhysicsOptions phys;
    DirectionOptions dirs;
    StrategyOptions strat;
    std::vector<double> times = {0.0};
    std::uint64_t trials = 100000;
    std::uint64_t seed = 0;
    OutputOptions out;
};

int run_montecarlo(const MonteCarloOptions& opts) {
    ex::ExperimentConfig cfg = make_config(opts.phys, opts.dirs, opts.strat);
    cfg.times = opts.times;
    cfg.trials = opts.trials;
    cfg.seed = opts.seed;
    cfg.validate();
    const unsigned threads = ex::resolve_thread_cap();
    auto params = physics_params(opts.phys);
    params.emplace_back("strategy", strategy_label(opts.strat));
    params.emplace_back("trials", std::to_string(opts.trials));
    params.emplace_back("seed", std::to_string(opts.seed));
    params.emplace_back("threads", std::to_string(threads));
    echo_units(opts.out, params);

    io::Table table({"time", "eta", "p_side_plus", "p_side_minus", "p_joint",
                     "damped_chsh", "trials", "coincidences", "empirical_chsh",
                     "std_error", "zero_coincidences"});
    for (const double t : cfg.times) {
        const ex::RunRecord rec = ex::estimate_chsh(cfg, t, threads);
        table.add_row({rec.time, cfg.strategy.eta_at(t, cfg.p0, cfg.mass),
                       rec.p_side_plus, rec.p_side_minus, rec.p_joint,
                       rec.damped_chsh, static_cast<std::int64_t>(cfg.trials),
                       static_cast<std::int64_t>(rec.coincidences),
                       rec.empirical_chsh, rec.std_error,
                       rec.zero_coincidences});
    }
    return emit(table, opts.out);
}

// --------------------------------------------------------- significance --

struct SignificanceOptions {
    PhysicsOptions phys;
    DirectionOptions dirs;
    StrategyOptions strat;
    std::vector<double> times = {0.0};
    double k = 5.0;
    OutputOptions out;
};

int run_significance(const SignificanceOptions& opts) {
    ex::ExperimentConfig cfg = make_config(opts.phys, opts.dirs, opts.strat);
    cfg.times = opts.times;
    cfg.validate();
    if (!(opts.k > 0.0) || !std::isfinite(opts.k)) {
        throw std::invalid_argument("--k must be a positive finite number");
    }
    auto params = physics_params(opts.phys);
    params.emplace_back("strategy", strategy_label(opts.strat));
    params.emplace_back("k", num(opts.k));
    echo_units(opts.out, params);

    io::Table table({"time", "p_joint", "k", "trials_required"});
    for (const double t : cfg.times) {
        table.add_row({t, ex::joint_detection_probability(cfg, t), opts.k,
                       ex::trials_for_significance(cfg, t, opts.k)});
    }
    return emit(table, opts.out);
}

// ---------------------------------------------------------------- main --

int run(int argc, char** argv) {
    CLI::App app{
        "Singlet spin correlations, wave packet detection probabilities, "
        "massive field clustering, and simulated coincidence experiments"};
    app.require_subcommand(1);
    ConfigRegistry config_registry;

    ChshOptions chsh_opts;
    CLI::App* chsh_cmd = app.add_subcommand(
        "chsh", "CHSH combination of singlet spin correlators");
    add_direction_options(chsh_cmd, &chsh_opts.dirs);
    add_output_options(chsh_cmd, &chsh_opts.out, &config_registry);

    LhvScanOptions lhv_opts;
    CLI::App* lhv_cmd = app.add_subcommand(
        "lhv-scan",
        "classical CHSH bound: all 16 deterministic strategies plus random "
        "mixed local hidden variable models");
    lhv_cmd->add_option("--models", lhv_opts.models,
                        "number of random mixed models")
        ->capture_default_str();
    lhv_cmd->add_option("--states", lhv_opts.states,
                        "hidden states per random model")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    lhv_cmd->add_option("--seed", lhv_opts.seed, "random seed")
        ->capture_default_str();
    add_output_options(lhv_cmd, &lhv_opts.out, &config_registry);

    OverlapOptions overlap_opts;
    CLI::App* overlap_cmd = app.add_subcommand(
        "overlap",
        "closed-form detection probability of an evolved packet against a "
        "Gaussian window, with optional grid-propagation oracle");
    add_physics_options(overlap_cmd, &overlap_opts.phys);
    overlap_cmd->add_option("--x0", overlap_opts.x0, "initial packet center")
        ->capture_default_str();
    overlap_cmd
        ->add_option("--eta", overlap_opts.eta,
                     "detector center: a number or 'adaptive' for (p0/m)t")
        ->capture_default_str();
    overlap_cmd->add_option("--t", overlap_opts.t, "evolution time")
        ->capture_default_str();
    auto* oracle_opt = overlap_cmd->add_flag(
        "--oracle", overlap_opts.oracle,
        "cross-validate numerically and append residual columns");
    auto* gmin_opt = overlap_cmd->add_option("--grid-min", overlap_opts.grid_min,
                                             "oracle grid lower edge");
    auto* gmax_opt = overlap_cmd->add_option("--grid-max", overlap_opts.grid_max,
                                             "oracle grid upper edge");
    auto* gpts_opt = overlap_cmd->add_option(
        "--grid-points", overlap_opts.grid_points, "oracle grid point count");
    gmin_opt->needs(gmax_opt, gpts_opt, oracle_opt);
    gmax_opt->needs(gmin_opt, gpts_opt, oracle_opt);
    gpts_opt->needs(gmin_opt, gmax_opt, oracle_opt);
    add_output_options(overlap_cmd, &overlap_opts.out, &config_registry);

    TimeScanOptions tscan_opts;
    CLI::App* tscan_cmd = app.add_subcommand(
        "time-scan",
        "side/joint detection probabilities and damped CHSH over a time sweep");
    add_physics_options(tscan_cmd, &tscan_opts.phys);
    add_direction_options(tscan_cmd, &tscan_opts.dirs);
    add_strategy_options(tscan_cmd, &tscan_opts.strat);
    add_sweep_options(tscan_cmd, "t", &tscan_opts.sweep);
    add_output_options(tscan_cmd, &tscan_opts.out, &config_registry);

    Field2PtOptions field_opts;
    CLI::App* field_cmd = app.add_subcommand(
        "field2pt",
        "massive scalar equal-time two-point function over a separation sweep, "
        "or its fitted exponential decay rate with --fit");
    field_cmd->add_option("--mass", field_opts.mass, "field mass")
        ->capture_default_str();
    add_sweep_options(field_cmd, "r", &field_opts.sweep);
    field_cmd->add_flag("--fit", field_opts.fit,
                        "fit the decay rate over [r-start, r-stop] instead of "
                        "emitting sweep points");
    add_output_options(field_cmd, &field_opts.out, &config_registry);

    MonteCarloOptions mc_opts;
    CLI::App* mc_cmd = app.add_subcommand(
        "montecarlo",
        "simulated coincidence runs: per-side detection, post-selected "
        "empirical CHSH and its standard error");
    add_physics_options(mc_cmd, &mc_opts.phys);
    add_direction_options(mc_cmd, &mc_opts.dirs);
    add_strategy_options(mc_cmd, &mc_opts.strat);
    mc_cmd->add_option("--times", mc_opts.times, "comma-separated time points")
        ->delimiter(',')
        ->capture_default_str();
    mc_cmd->add_option("--trials", mc_opts.trials, "trials per setting pair")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    mc_cmd->add_option("--seed", mc_opts.seed, "random seed")
        ->capture_default_str();
    add_output_options(mc_cmd, &mc_opts.out, &config_registry);

    SignificanceOptions sig_opts;
    CLI::App* sig_cmd = app.add_subcommand(
        "significance",
        "trials per setting pair for a k-sigma CHSH violation after "
        "post-selection");
    add_physics_options(sig_cmd, &sig_opts.phys);
    add_direction_options(sig_cmd, &sig_opts.dirs);
    add_strategy_options(sig_cmd, &sig_opts.strat);
    sig_cmd->add_option("--times", sig_opts.times, "comma-separated time points")
        ->delimiter(',')
        ->capture_default_str();
    sig_cmd->add_option("--k", sig_opts.k, "required significance in sigmas")
        ->capture_default_str();
    add_output_options(sig_cmd, &sig_opts.out, &config_registry);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    for (const auto& [cmd, path] : config_registry) {
        if (!cmd->parsed() || path->empty()) continue;
        try {
            apply_config(cmd, *path);
        } catch (const CLI::ParseError& e) {
            const int code = cmd->exit(e);
            return code == 0 ? 0 : 2;
        }
    }

    if (chsh_cmd->parsed()) return run_chsh(chsh_opts);
    if (lhv_cmd->parsed()) return run_lhv_scan(lhv_opts);
    if (overlap_cmd->parsed()) {
        overlap_opts.grid_given = gmin_opt->count() > 0;
        return run_overlap(overlap_opts);
    }
    if (tscan_cmd->parsed()) return run_time_scan(tscan_opts);
    if (field_cmd->parsed()) return run_field2pt(field_opts);
    if (mc_cmd->parsed()) return run_montecarlo(mc_opts);
    return run_significance(sig_opts);
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const clusterbell::wavepacket::GridInsufficiencyError& e) {
        std::cerr << "numerical diagnostic: " << e.what() << '\n';
        return 3;
    } catch (const std::invalid_argument& e) {
        std::cerr << "validation error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
