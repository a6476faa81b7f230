#ifndef D2DSIM_CLI_HPP_
#define D2DSIM_CLI_HPP_

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "analytic.hpp"
#include "config.hpp"
#include "io.hpp"
#include "montecarlo.hpp"
#include "routing.hpp"

namespace d2dsim::cli {

inline constexpr const char *kToolVersion = "0.1.0";

enum ExitCode : int { kOk = 0, kRuntimeError = 1, kUsageError = 2 };

/// Bad flag or flag combination; maps to exit code 2.
class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct Sweep {
    std::string key;
    std::vector<std::string> values;
};

/// Parses "key=v1,v2,..."; every value must be accepted by the key's parser.
inline Sweep parse_sweep(const std::string &spec, const ScenarioConfig &base,
                         std::initializer_list<std::string_view> extra_keys = {})
{
    const auto eq = spec.find('=');
    if (eq == std::string::npos || eq == 0 || eq + 1 == spec.size())
        throw UsageError("--sweep: expected key=v1,v2,... but got '" + spec + "'");
    Sweep s;
    s.key = std::string(detail::trim(std::string_view(spec).substr(0, eq)));
    std::stringstream rest(spec.substr(eq + 1));
    for (std::string item; std::getline(rest, item, ',');) {
        const auto v = std::string(detail::trim(item));
        if (v.empty())
            throw UsageError("--sweep: empty value in '" + spec + "'");
        s.values.push_back(v);
    }
    const bool extra = std::find(extra_keys.begin(), extra_keys.end(), s.key) != extra_keys.end();
    for (const auto &v : s.values) {
        try {
            if (extra) {
                detail::parse_double(s.key, v);
            } else {
                ScenarioConfig probe = base;
                set_field(probe, s.key, v);
                validate(probe);
            }
        } catch (const ConfigError &e) {
            throw UsageError(std::string("--sweep: ") + e.what());
        }
    }
    return s;
}

struct CommonOptions {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<int> trials;
    int workers = 1;
    std::string out;
    std::string sweep;
};

struct RunManifest {
    std::string command_line;
    std::string config_text;
    std::string config_digest;
    std::string tool_version = kToolVersion;
    std::string started_utc;
    std::string finished_utc;
    std::vector<std::string> outputs;
};

inline std::string utc_now()
{
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    std::tm tm{};
    gmtime_r(&t, &tm);
    std::ostringstream os;
    os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
    return os.str();
}

inline nlohmann::json to_json(const RunManifest &m)
{
    return {{"command_line", m.command_line}, {"config_digest", m.config_digest},
            {"config_text", m.config_text},   {"tool_version", m.tool_version},
            {"started_utc", m.started_utc},   {"finished_utc", m.finished_utc},
            {"outputs", m.outputs}};
}

inline std::filesystem::path manifest_path(const std::string &out) { return out + ".manifest.json"; }

/// Loads --config (or defaults) and applies --seed / --trials.
inline ScenarioConfig effective_config(const CommonOptions &o)
{
    ScenarioConfig c;
    if (!o.config_path.empty()) {
        std::string text;
        try {
            text = read_file(o.config_path);
        } catch (const std::runtime_error &e) {
            throw UsageError(std::string("--config: ") + e.what());
        }
        c = load_config(text);
    }
    if (o.seed)
        c.seed = *o.seed;
    if (o.trials)
        c.trials = *o.trials;
    validate(c);
    return c;
}

struct Context {
    std::ostream &out;
    std::ostream &err;
    std::string command_line;
};

/// Sends CSV to --out (with manifest) or to the output stream.
inline void emit(const Context &ctx, const CommonOptions &o, const ScenarioConfig &config, const std::string &csv,
                 const std::string &started, std::vector<std::string> extra_outputs = {})
{
    if (o.out.empty()) {
        ctx.out << csv;
        return;
    }
    write_file_atomic(o.out, csv);
    RunManifest m;
    m.command_line = ctx.command_line;
    m.config_text = to_config_text(config);
    m.config_digest = digest_hex(m.config_text);
    m.started_utc = started;
    m.finished_utc = utc_now();
    m.outputs.push_back(o.out);
    for (auto &e : extra_outputs)
        m.outputs.push_back(std::move(e));
    write_file_atomic(manifest_path(o.out), to_json(m).dump(2) + "\n");
    spdlog::info("wrote {} and {}", o.out, manifest_path(o.out).string());
}

// ---------------------------------------------------------------- analytic

struct AnalyticRow {
    OutageFormulaResult result;
    double r_mn_m = std::nan("");
    double r_nm2_m = std::nan("");
    int n_d2d = 0;
    int hops = 0;
};

/// CC distances used when the config leaves them random: the mean nearest-BS distance.
inline double reference_cc_distance(double configured, const ScenarioConfig &config)
{
    return configured > 0.0 ? configured : 0.5 / std::sqrt(config.bs_density_per_m2);
}

/// Hop count for the multi-hop row: the pair distance over the forwarding radius, else 2.
inline int reference_hops(const ScenarioConfig &config)
{
    if (config.d2d_pair_distance_m > 0.0)
        return std::max(1, static_cast<int>(std::ceil(config.d2d_pair_distance_m / config.forwarding_radius())));
    return 2;
}

inline std::vector<AnalyticRow> analytic_rows(const ScenarioConfig &config)
{
    std::vector<AnalyticRow> rows;
    AnalyticRow cc;
    cc.r_mn_m = reference_cc_distance(config.cc_uplink_distance_m, config);
    cc.r_nm2_m = reference_cc_distance(config.cc_downlink_distance_m, config);
    cc.result = cc_outage(cc.r_mn_m, cc.r_nm2_m, config);
    rows.push_back(cc);

    AnalyticRow dl;
    dl.result = d2d_dl_outage(config);
    rows.push_back(dl);

    AnalyticRow ul;
    ul.result = d2d_ul_outage(config);
    rows.push_back(ul);

    AnalyticRow spr;
    spr.n_d2d = config.d2d_ues_per_bs;
    spr.result = spr_ul_link_outage(config.d2d_ues_per_bs, config);
    rows.push_back(spr);

    AnalyticRow multi;
    multi.n_d2d = config.d2d_ues_per_bs;
    multi.hops = reference_hops(config);
    const std::vector<double> per_hop(static_cast<std::size_t>(multi.hops), spr.result.value);
    const double p = multihop_outage(per_hop);
    multi.result = {p, false, p, FormulaId::MultihopEq10};
    rows.push_back(multi);
    return rows;
}

inline void write_analytic_header(std::ostream &os)
{
    os << "formula_id,sweep_key,sweep_value,zeta,alpha,r_mn_m,r_nm2_m,n_d2d,hops,raw_value,value,clamped\n";
}

inline void write_analytic_rows(std::ostream &os, const ScenarioConfig &config, const std::string &key,
                                const std::string &value)
{
    using detail::format_double;
    auto opt = [](double v) { return std::isnan(v) ? std::string() : format_double(v); };
    auto opt_int = [](int v) { return v > 0 ? std::to_string(v) : std::string(); };
    for (const auto &r : analytic_rows(config))
        os << to_string(r.result.formula_id) << ',' << key << ',' << value << ','
           << format_double(config.sinr_threshold_linear) << ',' << format_double(config.pathloss_exponent) << ','
           << opt(r.r_mn_m) << ',' << opt(r.r_nm2_m) << ',' << opt_int(r.n_d2d) << ',' << opt_int(r.hops) << ','
           << format_double(r.result.raw_value) << ',' << format_double(r.result.value) << ','
           << (r.result.clamped ? "true" : "false") << '\n';
}

inline std::string analytic_csv(const ScenarioConfig &config, const std::optional<Sweep> &sweep)
{
    std::ostringstream os;
    write_analytic_header(os);
    if (!sweep) {
        write_analytic_rows(os, config, "", "");
        return os.str();
    }
    for (const auto &v : sweep->values) {
        ScenarioConfig c = config;
        set_field(c, sweep->key, v);
        validate(c);
        write_analytic_rows(os, c, sweep->key, v);
    }
    return os.str();
}

// ---------------------------------------------------------------- simulate

inline EstimatorSpec parse_target(const std::string &mode, const std::string &routing)
{
    EstimatorSpec spec;
    if (mode == "cc") {
        if (!routing.empty())
            throw UsageError("--routing: not applicable to --mode cc");
        return spec;
    }
    if (mode == "d2d-ul")
        spec.mode = LinkMode::D2dUl;
    else if (mode == "d2d-dl")
        spec.mode = LinkMode::D2dDl;
    else
        throw UsageError("--mode: expected cc, d2d-ul or d2d-dl, got '" + mode + "'");
    if (routing.empty() || routing == "spr")
        spec.scheme = RoutingScheme::Spr;
    else if (routing == "br")
        spec.scheme = RoutingScheme::Br;
    else
        throw UsageError("--routing: expected spr or br, got '" + routing + "'");
    return spec;
}

inline std::string simulate_csv(const ScenarioConfig &config, const EstimatorSpec &target,
                                const std::optional<Sweep> &sweep, int workers)
{
    std::vector<OutageEstimate> rows;
    if (sweep)
        rows = run_sweep(config, sweep->key, sweep->values, {target}, workers);
    else
        rows.push_back(run_estimator(config, target, workers));
    std::ostringstream os;
    write_estimates_csv(os, rows);
    return os.str();
}

inline std::string topology_csv(const ScenarioConfig &config)
{
    Rng rng(config.seed, 0);
    const Topology topo = build_topology(config, rng);
    std::ostringstream os;
    write_topology_csv(os, topo);
    return os.str();
}

/// Routes of the first `count` trials, rebuilt from the same streams the estimator uses.
inline std::string routes_csv(const ScenarioConfig &config, RoutingScheme scheme, int count)
{
    std::ostringstream os;
    write_routes_header(os);
    for (int t = 0; t < count; ++t) {
        Rng rng(config.seed, static_cast<std::uint64_t>(t));
        Topology topo = build_topology(config, rng);
        const auto pair = draw_d2d_pair(topo, config, rng);
        if (!pair)
            continue;
        Route route = spr_route(pair->first, pair->second, topo, config);
        if (scheme == RoutingScheme::Br) {
            const auto scope = detail::br_scope(topo, pair->first, pair->second, config);
            const auto wave = br_route(pair->first, topo, config, config.hop_limit, scope);
            route = {};
            route.scheme = RoutingScheme::Br;
            if (wave.delivered(pair->second)) {
                route.found = true;
                route.hops = detail::br_first_arrival_path(topo, wave, pair->second, config);
            }
        }
        write_route_rows(os, static_cast<std::uint64_t>(t), route, topo);
    }
    return os.str();
}

// ---------------------------------------------------------------- figures

/// Central-link SINR CDFs for both bands: band,sinr_db,cdf.
inline std::string figure3_csv(const ScenarioConfig &config, int workers)
{
    std::ostringstream os;
    os << "band,sinr_db,cdf\n";
    for (Band band : {Band::Ul, Band::Dl}) {
        const SinrCdf cdf = sinr_cdf(config, band, config.trials, workers);
        for (const auto &[db, p] : cdf.points)
            os << to_string(band) << ',' << detail::format_double(db) << ',' << detail::format_double(p) << '\n';
    }
    return os.str();
}

inline constexpr std::string_view kLinkDistanceKey = "link_distance_m";

/**
 * CC outage, Monte-Carlo against the closed form. The sweep key may be any
 * config key or link_distance_m (sets both hop lengths); the default sweep
 * is link_distance_m = 50..400 step 50. Unset hop lengths default to 300 m.
 */
inline std::string figure5_csv(const ScenarioConfig &config, const std::optional<Sweep> &sweep, int workers)
{
    Sweep s;
    if (sweep)
        s = *sweep;
    else {
        s.key = std::string(kLinkDistanceKey);
        for (int r = 50; r <= 400; r += 50)
            s.values.push_back(std::to_string(r));
    }
    using detail::format_double;
    std::ostringstream os;
    os << "sweep_key,sweep_value,r_mn_m,r_nm2_m,bs_density_per_m2,trials,failures,mc_outage,ci95,analytic_outage,"
          "config_hash\n";
    for (const auto &v : s.values) {
        ScenarioConfig c = config;
        if (c.cc_uplink_distance_m <= 0.0)
            c.cc_uplink_distance_m = 300.0;
        if (c.cc_downlink_distance_m <= 0.0)
            c.cc_downlink_distance_m = 300.0;
        if (s.key == kLinkDistanceKey) {
            c.cc_uplink_distance_m = detail::parse_double(s.key, v);
            c.cc_downlink_distance_m = c.cc_uplink_distance_m;
        } else {
            set_field(c, s.key, v);
        }
        validate(c);
        const OutageEstimate e = estimate_cc_outage(c, c.trials, workers);
        const double analytic = cc_outage(c.cc_uplink_distance_m, c.cc_downlink_distance_m, c).value;
        os << s.key << ',' << v << ',' << format_double(c.cc_uplink_distance_m) << ','
           << format_double(c.cc_downlink_distance_m) << ',' << format_double(c.bs_density_per_m2) << ','
           << e.trials << ',' << e.failures << ',' << format_double(e.outage) << ','
           << format_double(e.ci95_halfwidth) << ',' << format_double(analytic) << ',' << e.config_hash << '\n';
    }
    return os.str();
}

/**
 * D2D outage against D2D UEs per cell for {UL, DL} x {SPR, BR} plus the
 * closed forms. Each row sets the D2D density to n_d2d BS densities.
 */
inline std::string figure6_csv(const ScenarioConfig &config, const std::optional<Sweep> &sweep, int workers)
{
    std::vector<std::string> values{"10", "40", "80", "140"};
    if (sweep) {
        if (sweep->key != "d2d_ues_per_bs")
            throw UsageError("--sweep: figure 6 sweeps d2d_ues_per_bs only");
        values = sweep->values;
    }
    using detail::format_double;
    std::ostringstream os;
    os << "n_d2d,trials,spr_ul_outage,spr_ul_ci95,spr_dl_outage,spr_dl_ci95,br_ul_outage,br_ul_ci95,br_dl_outage,"
          "br_dl_ci95,eq8_outage,eq9_outage,eq11_outage\n";
    for (const auto &v : values) {
        ScenarioConfig c = config;
        set_field(c, "d2d_ues_per_bs", v);
        c.d2d_density_per_m2 = c.bs_density_per_m2 * c.d2d_ues_per_bs;
        validate(c);
        os << c.d2d_ues_per_bs << ',' << c.trials;
        for (RoutingScheme scheme : {RoutingScheme::Spr, RoutingScheme::Br})
            for (Band band : {Band::Ul, Band::Dl}) {
                const auto e = estimate_d2d_outage(c, scheme, band, c.trials, workers);
                os << ',' << format_double(e.outage) << ',' << format_double(e.ci95_halfwidth);
            }
        os << ',' << format_double(d2d_dl_outage(c).value) << ',' << format_double(d2d_ul_outage(c).value) << ','
           << format_double(spr_ul_link_outage(c.d2d_ues_per_bs, c).value) << '\n';
    }
    return os.str();
}

// ---------------------------------------------------------------- entry point

inline void configure_logging()
{
    static bool done = false;
    if (!done) {
        auto logger = spdlog::stderr_color_mt("d2dsim");
        spdlog::set_default_logger(logger);
        done = true;
    }
    spdlog::set_level(spdlog::level::warn);
    if (const char *env = std::getenv("D2DSIM_LOG"))
        spdlog::set_level(spdlog::level::from_str(env));
}

inline std::string join_args(const std::vector<std::string> &args)
{
    std::string s;
    for (const auto &a : args) {
        if (!s.empty())
            s += ' ';
        s += a;
    }
    return s;
}

/// Runs one command; args excludes the program name. Returns the exit code.
inline int run(const std::vector<std::string> &args, std::ostream &out = std::cout, std::ostream &err = std::cerr)
{
    configure_logging();
    CLI::App app{"Cellular network simulator with device-to-device underlay", "d2dsim"};
    app.require_subcommand(1);
    app.option_defaults()->always_capture_default();
    app.set_version_flag("--version", kToolVersion);

    CommonOptions common;
    std::string mode = "cc";
    std::string routing;
    std::string dump_topology;
    std::string dump_routes;
    int figure = 0;

    auto add_common = [&](CLI::App *sub) {
        sub->add_option("--config", common.config_path, "Config file of key = value lines; default: built-in defaults");
        sub->add_option("--seed", common.seed, "Master seed; default from the config (1)");
        sub->add_option("--trials", common.trials, "Trials or samples per point; default from the config (10000)")
            ->check(CLI::PositiveNumber);
        sub->add_option("--workers", common.workers, "Worker threads; results do not depend on it")
            ->check(CLI::PositiveNumber);
        sub->add_option("--out", common.out, "Output CSV path (stdout if empty); a manifest is written alongside");
        sub->add_option("--sweep", common.sweep, "Sweep as key=v1,v2,...");
    };

    auto *analytic = app.add_subcommand("analytic", "Closed-form outage table");
    add_common(analytic);
    auto *simulate = app.add_subcommand("simulate", "Monte-Carlo outage estimate");
    add_common(simulate);
    simulate->add_option("--mode", mode, "cc, d2d-ul or d2d-dl");
    simulate->add_option("--routing", routing, "spr or br (D2D modes only; default spr)");
    simulate->add_option("--dump-topology", dump_topology, "Write the trial-0 topology as CSV");
    simulate->add_option("--dump-routes", dump_routes, "Write the routes of the first 10 trials as CSV (D2D)");
    auto *fig = app.add_subcommand("figure", "Figure data: 3 (SINR CDF), 5 (CC outage), 6 (D2D outage)");
    add_common(fig);
    fig->add_option("--figure", figure, "Figure id: 3, 5 or 6")->required();

    std::vector<std::string> argv(args.rbegin(), args.rend());
    try {
        app.parse(argv);
    } catch (const CLI::CallForHelp &) {
        out << app.help("", CLI::AppFormatMode::All);
        return kOk;
    } catch (const CLI::CallForAllHelp &) {
        out << app.help("", CLI::AppFormatMode::All);
        return kOk;
    } catch (const CLI::CallForVersion &) {
        out << kToolVersion << '\n';
        return kOk;
    } catch (const CLI::ParseError &e) {
        err << "d2dsim: " << e.what() << '\n';
        return kUsageError;
    }

    const Context ctx{out, err, "d2dsim " + join_args(args)};
    const std::string started = utc_now();
    try {
        const ScenarioConfig config = effective_config(common);
        std::optional<Sweep> sweep;
        if (!common.sweep.empty())
            sweep = parse_sweep(common.sweep, config,
                                fig->parsed() && figure == 5 ? std::initializer_list<std::string_view>{kLinkDistanceKey}
                                                             : std::initializer_list<std::string_view>{});
        spdlog::debug("config digest {}", config_hash(config));

        if (analytic->parsed()) {
            emit(ctx, common, config, analytic_csv(config, sweep), started);
        } else if (simulate->parsed()) {
            const EstimatorSpec target = parse_target(mode, routing);
            if (!dump_routes.empty() && target.mode == LinkMode::Cc)
                throw UsageError("--dump-routes: needs a D2D mode");
            std::vector<std::string> extra;
            if (!dump_topology.empty()) {
                write_file_atomic(dump_topology, topology_csv(config));
                extra.push_back(dump_topology);
            }
            if (!dump_routes.empty()) {
                write_file_atomic(dump_routes, routes_csv(config, target.scheme, 10));
                extra.push_back(dump_routes);
            }
            emit(ctx, common, config, simulate_csv(config, target, sweep, common.workers), started,
                 std::move(extra));
        } else {
            std::string csv;
            if (figure == 3)
                csv = figure3_csv(config, common.workers);
            else if (figure == 5)
                csv = figure5_csv(config, sweep, common.workers);
            else if (figure == 6)
                csv = figure6_csv(config, sweep, common.workers);
            else
                throw UsageError("--figure: unknown figure id " + std::to_string(figure) + " (expected 3, 5 or 6)");
            emit(ctx, common, config, csv, started);
        }
    } catch (const UsageError &e) {
        err << "d2dsim: " << e.what() << '\n';
        return kUsageError;
    } catch (const ConfigError &e) {
        err << "d2dsim: config: " << e.what() << '\n';
        return kUsageError;
    } catch (const std::exception &e) {
        err << "d2dsim: " << e.what() << '\n';
        return kRuntimeError;
    }
    return kOk;
}

} // namespace d2dsim::cli

#endif // D2DSIM_CLI_HPP_
