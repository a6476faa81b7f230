#ifndef D2DSIM_MONTECARLO_HPP_
#define D2DSIM_MONTECARLO_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <ostream>
#include <string>
#include <thread>
#include <vector>

#include "analytic.hpp"
#include "channel.hpp"
#include "config.hpp"
#include "geometry.hpp"
#include "rng.hpp"
#include "routing.hpp"

namespace d2dsim {

enum class LinkMode { Cc, D2dUl, D2dDl };

inline std::string to_string(LinkMode m)
{
    switch (m) {
    case LinkMode::Cc: return "CC";
    case LinkMode::D2dUl: return "D2D_UL";
    case LinkMode::D2dDl: return "D2D_DL";
    }
    return {};
}

inline std::string band_name(LinkMode m)
{
    switch (m) {
    case LinkMode::Cc: return "UL_DL";
    case LinkMode::D2dUl: return "UL";
    case LinkMode::D2dDl: return "DL";
    }
    return {};
}

enum class Band { Ul, Dl };

inline std::string to_string(Band b) { return b == Band::Ul ? "UL" : "DL"; }

/// Failure tallies. Merging is plain integer addition, so any partition of
/// the trials reduces to the same totals.
struct OutageCounts {
    std::int64_t trials = 0;
    std::int64_t failures = 0;
    std::int64_t no_route = 0;

    OutageCounts &operator+=(const OutageCounts &o)
    {
        trials += o.trials;
        failures += o.failures;
        no_route += o.no_route;
        return *this;
    }
    friend OutageCounts operator+(OutageCounts a, const OutageCounts &b) { return a += b; }
    bool operator==(const OutageCounts &) const = default;
};

struct OutageEstimate {
    LinkMode mode = LinkMode::Cc;
    RoutingScheme scheme = RoutingScheme::None;
    std::int64_t trials = 0;
    std::int64_t failures = 0;
    std::int64_t no_route = 0;
    double outage = 0.0;
    double ci95_halfwidth = 0.0;
    std::uint64_t seed = 0;
    std::string config_hash;
    std::string sweep_key;
    std::string sweep_value;
};

inline OutageEstimate make_estimate(LinkMode mode, RoutingScheme scheme, const OutageCounts &c,
                                    const ScenarioConfig &config)
{
    OutageEstimate e;
    e.mode = mode;
    e.scheme = scheme;
    e.trials = c.trials;
    e.failures = c.failures;
    e.no_route = c.no_route;
    e.outage = c.trials ? static_cast<double>(c.failures) / static_cast<double>(c.trials) : 0.0;
    e.ci95_halfwidth =
        c.trials ? 1.96 * std::sqrt(e.outage * (1.0 - e.outage) / static_cast<double>(c.trials)) : 0.0;
    e.seed = config.seed;
    e.config_hash = config_hash(config);
    return e;
}

struct TrialOutcome {
    bool failed = false;
    bool no_route = false;
};

/// Runs trial(i) for i in [0, trials) over `workers` contiguous blocks and sums the tallies.
template <typename TrialFn>
OutageCounts run_trials(std::int64_t trials, int workers, TrialFn trial)
{
    auto run_block = [&](std::int64_t begin, std::int64_t end) {
        OutageCounts c;
        for (std::int64_t i = begin; i < end; ++i) {
            const TrialOutcome o = trial(static_cast<std::uint64_t>(i));
            ++c.trials;
            c.failures += o.failed;
            c.no_route += o.no_route;
        }
        return c;
    };
    const auto n_workers = static_cast<std::int64_t>(std::max(1, workers));
    if (n_workers == 1 || trials < 2)
        return run_block(0, trials);

    std::vector<OutageCounts> partial(static_cast<std::size_t>(n_workers));
    std::vector<std::thread> pool;
    for (std::int64_t w = 0; w < n_workers; ++w) {
        const std::int64_t begin = trials * w / n_workers;
        const std::int64_t end = trials * (w + 1) / n_workers;
        pool.emplace_back([&, w, begin, end] { partial[static_cast<std::size_t>(w)] = run_block(begin, end); });
    }
    for (auto &t : pool)
        t.join();
    OutageCounts total;
    for (const auto &p : partial)
        total += p;
    return total;
}

/// Independent seed for a labelled sub-experiment.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t tag)
{
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (tag + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

namespace detail {

inline Point at_bearing(Point origin, double distance, Rng &rng)
{
    const double bearing = rng.uniform(0.0, 2.0 * kPi);
    return origin + Point{distance * std::cos(bearing), distance * std::sin(bearing)};
}

/// Picks a UE of the given kind, adding one at the origin if the realization has none.
inline std::size_t pick_ue(Topology &topo, NodeKind kind, Rng &rng)
{
    auto &pts = topo.positions(kind);
    if (pts.empty()) {
        pts.push_back(Point{});
        topo.serving_list(kind).push_back(topo.nearest_bs(Point{}));
        return 0;
    }
    return rng.index(pts.size());
}

/// Moves a UE to `distance` from BS b and pins its association to b.
inline void pin_to_bs(Topology &topo, NodeRef ue, std::size_t b, double distance, Rng &rng)
{
    topo.place(ue, at_bearing(topo.bs[b], distance, rng));
    topo.serving_list(ue.kind)[ue.index] = b;
}

/// One CC hop (uplink or downlink); true when the hop is in outage.
inline bool cc_hop_fails(Topology &topo, bool uplink, double fixed_distance, const ScenarioConfig &config, Rng &rng)
{
    const NodeKind kind = uplink ? NodeKind::CcUplinkUe : NodeKind::CcDownlinkUe;
    const NodeRef ue{kind, pick_ue(topo, kind, rng)};
    std::size_t b = topo.serving(ue);
    if (fixed_distance > 0.0) {
        if (topo.mode == TopologyMode::PppField)
            b = rng.index(topo.bs.size());
        pin_to_bs(topo, ue, b, fixed_distance, rng);
    }
    if (b == npos)
        return true;
    const NodeRef bs{NodeKind::Bs, b};
    const NodeRef tx = uplink ? ue : bs;
    const NodeRef rx = uplink ? bs : ue;
    const auto interferers =
        interferer_set(rx, tx, uplink ? TransmissionMode::CcUplink : TransmissionMode::CcDownlink, topo, config);
    return link_in_outage(draw_sinr(topo, tx, rx, interferers, config, rng), config);
}

inline TransmissionMode band_mode(Band band)
{
    return band == Band::Ul ? TransmissionMode::D2dUplinkBand : TransmissionMode::D2dDownlinkBand;
}

inline bool spr_hops_fail(const Topology &topo, const Route &route, Band band, const ScenarioConfig &config,
                          Rng &rng)
{
    bool failed = false;
    for (std::size_t h = 0; h + 1 < route.hops.size(); ++h) {
        const NodeRef tx{NodeKind::D2dUe, route.hops[h]};
        const NodeRef rx{NodeKind::D2dUe, route.hops[h + 1]};
        const auto interferers = interferer_set(rx, tx, band_mode(band), topo, config);
        failed |= link_in_outage(draw_sinr(topo, tx, rx, interferers, config, rng), config);
    }
    return failed;
}

/// First-arrival path of a flood, walked back from dst; the lowest-index relay wins ties.
inline std::vector<std::size_t> br_first_arrival_path(const Topology &topo, const BroadcastWave &wave,
                                                      std::size_t dst, const ScenarioConfig &config)
{
    const double rho = config.forwarding_radius();
    const auto &ues = topo.d2d_ues;
    const int depth = wave.reached[dst];
    std::vector<std::size_t> path(static_cast<std::size_t>(depth) + 1);
    path.back() = dst;
    for (int k = depth - 1; k >= 0; --k) {
        const std::size_t next = path[static_cast<std::size_t>(k) + 1];
        for (std::size_t i = 0; i < ues.size(); ++i)
            if (wave.reached[i] == k && topo.extent.distance(ues[i], ues[next]) <= rho) {
                path[static_cast<std::size_t>(k)] = i;
                break;
            }
    }
    return path;
}

/**
 * BR hop chain. Relaying is full-buffer: every D2D UE keeps rebroadcasting,
 * so all of them are on the air at once. The message follows the flood's
 * first-arrival path; the receiver at layer k decodes from its best link
 * among the layer k-1 relays within the forwarding radius, against every
 * other active D2D UE plus the band's BS or CC-uplink interferers.
 */
inline bool br_hops_fail(const Topology &topo, const BroadcastWave &wave, std::size_t dst, Band band,
                         const ScenarioConfig &config, Rng &rng)
{
    const double rho = config.forwarding_radius();
    const auto &ues = topo.d2d_ues;
    const int depth = wave.reached[dst];
    const auto path = br_first_arrival_path(topo, wave, dst, config);

    ScenarioConfig no_d2d = config;
    no_d2d.all_d2d_active = false;
    bool failed = false;
    for (int k = 1; k <= depth; ++k) {
        const std::size_t j = path[static_cast<std::size_t>(k)];
        const NodeRef rx{NodeKind::D2dUe, j};
        double total = 0.0;
        double best = 0.0;
        for (std::size_t i = 0; i < ues.size(); ++i) {
            if (i == j)
                continue;
            const double p = draw_link(topo, {NodeKind::D2dUe, i}, rx, config, rng).received_power_w;
            total += p;
            if (wave.reached[i] == k - 1 && topo.extent.distance(ues[i], ues[j]) <= rho)
                best = std::max(best, p);
        }
        auto background = interferer_set(rx, {NodeKind::D2dUe, path[static_cast<std::size_t>(k) - 1]},
                                         band_mode(band), topo, no_d2d);
        for (const NodeRef &n : background)
            if (n.kind != NodeKind::D2dUe)
                total += draw_link(topo, n, rx, config, rng).received_power_w;
        const double denom = config.noise_w() + total - best;
        failed |= denom > 0.0 && best < config.sinr_threshold_linear * denom;
    }
    return failed;
}

/// Nodes taking part in a BR session: the source cell's D2D group plus the destination.
inline std::vector<std::size_t> br_scope(const Topology &topo, std::size_t src, std::size_t dst,
                                         const ScenarioConfig &config)
{
    std::vector<std::size_t> scope;
    if (config.d2d_destination == D2dDestination::Anywhere && config.d2d_pair_distance_m <= 0.0) {
        scope.resize(topo.d2d_ues.size());
        for (std::size_t i = 0; i < scope.size(); ++i)
            scope[i] = i;
        return scope;
    }
    const std::size_t cell = topo.d2d_serving[src];
    for (std::size_t i = 0; i < topo.d2d_ues.size(); ++i)
        if (topo.d2d_serving[i] == cell || i == dst)
            scope.push_back(i);
    return scope;
}

} // namespace detail

/**
 * End-to-end CC outage: the source's uplink to its serving BS and the
 * destination's downlink; a trial fails if either hop is in outage. Positive
 * cc_uplink_distance_m / cc_downlink_distance_m pin the hop lengths.
 */
inline OutageEstimate estimate_cc_outage(const ScenarioConfig &config, std::int64_t trials, int workers = 1)
{
    const auto counts = run_trials(trials, workers, [&](std::uint64_t t) {
        Rng rng(config.seed, t);
        Topology topo = build_topology(config, rng);
        if (topo.bs.empty())
            return TrialOutcome{true, false};
        const bool ul = detail::cc_hop_fails(topo, true, config.cc_uplink_distance_m, config, rng);
        const bool dl = detail::cc_hop_fails(topo, false, config.cc_downlink_distance_m, config, rng);
        return TrialOutcome{ul || dl, false};
    });
    return make_estimate(LinkMode::Cc, RoutingScheme::None, counts, config);
}

/// Multi-hop D2D outage for SPR or BR; a trial fails if any hop of the route is in outage.
inline OutageEstimate estimate_d2d_outage(const ScenarioConfig &config, RoutingScheme scheme, Band band,
                                          std::int64_t trials, int workers = 1)
{
    const auto counts = run_trials(trials, workers, [&](std::uint64_t t) {
        Rng rng(config.seed, t);
        Topology topo = build_topology(config, rng);
        const auto pair = draw_d2d_pair(topo, config, rng);
        if (!pair)
            return TrialOutcome{true, true};
        const auto [src, dst] = *pair;
        if (scheme == RoutingScheme::Br) {
            const auto scope = detail::br_scope(topo, src, dst, config);
            const auto wave = br_route(src, topo, config, config.hop_limit, scope);
            if (!wave.delivered(dst))
                return TrialOutcome{true, true};
            return TrialOutcome{detail::br_hops_fail(topo, wave, dst, band, config, rng), false};
        }
        const Route route = spr_route(src, dst, topo, config);
        if (!route.found)
            return TrialOutcome{true, true};
        return TrialOutcome{detail::spr_hops_fail(topo, route, band, config, rng), false};
    });
    return make_estimate(band == Band::Ul ? LinkMode::D2dUl : LinkMode::D2dDl, scheme, counts, config);
}

struct RouteOutage {
    std::vector<OutageEstimate> per_hop;
    OutageEstimate route;
};

/**
 * Frozen-geometry check of the decode-and-forward product: each hop's outage
 * is estimated on its own streams, and the whole route on another set, with
 * fresh fading per hop and per trial.
 */
inline RouteOutage estimate_route_outage(const Topology &topo, const Route &route, Band band,
                                         const ScenarioConfig &config, std::int64_t trials, int workers = 1)
{
    RouteOutage out;
    const LinkMode mode = band == Band::Ul ? LinkMode::D2dUl : LinkMode::D2dDl;
    for (std::size_t h = 0; h + 1 < route.hops.size(); ++h) {
        Route single;
        single.hops = {route.hops[h], route.hops[h + 1]};
        single.found = true;
        const std::uint64_t seed = derive_seed(config.seed, h + 1);
        const auto counts = run_trials(trials, workers, [&](std::uint64_t t) {
            Rng rng(seed, t);
            return TrialOutcome{detail::spr_hops_fail(topo, single, band, config, rng), false};
        });
        out.per_hop.push_back(make_estimate(mode, RoutingScheme::Spr, counts, config));
    }
    const std::uint64_t seed = derive_seed(config.seed, 0);
    const auto counts = run_trials(trials, workers, [&](std::uint64_t t) {
        Rng rng(seed, t);
        return TrialOutcome{detail::spr_hops_fail(topo, route, band, config, rng), false};
    });
    out.route = make_estimate(mode, RoutingScheme::Spr, counts, config);
    return out;
}

struct SinrCdf {
    Band band = Band::Dl;
    /// (sinr_dB, cumulative probability), ascending in both.
    std::vector<std::pair<double, double>> points;

    /// Empirical P(SINR <= x_db).
    double evaluate(double x_db) const
    {
        auto it = std::upper_bound(points.begin(), points.end(), x_db,
                                   [](double x, const std::pair<double, double> &p) { return x < p.first; });
        return it == points.begin() ? 0.0 : std::prev(it)->second;
    }
};

/**
 * SINR of a representative central link: in HEX19 the CC UE of the central
 * cell, in PPP_FIELD the CC UE closest to the origin. Downlink hears the other
 * BSs, uplink the other cells' uplink UEs. Empty if the realization has no BS.
 */
inline std::optional<double> central_link_sinr(const Topology &topo, Band band, const ScenarioConfig &config,
                                               Rng &rng)
{
    if (topo.bs.empty())
        return std::nullopt;
    const bool uplink = band == Band::Ul;
    const NodeKind kind = uplink ? NodeKind::CcUplinkUe : NodeKind::CcDownlinkUe;
    const auto &ues = topo.positions(kind);
    if (ues.empty())
        return std::nullopt;
    std::size_t pick = 0;
    if (topo.mode == TopologyMode::PppField) {
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < ues.size(); ++i)
            if (const double d = norm2(ues[i]); d < best) {
                best = d;
                pick = i;
            }
    }
    const NodeRef ue{kind, pick};
    const std::size_t b = topo.serving(ue);
    if (b == npos)
        return std::nullopt;
    const NodeRef bs{NodeKind::Bs, b};
    const NodeRef tx = uplink ? ue : bs;
    const NodeRef rx = uplink ? bs : ue;
    const auto interferers =
        interferer_set(rx, tx, uplink ? TransmissionMode::CcUplink : TransmissionMode::CcDownlink, topo, config);
    return draw_sinr(topo, tx, rx, interferers, config, rng).sinr_linear;
}

/// Per-sample central-link SINR values (linear), in sample order.
inline std::vector<double> central_sinr_samples(const ScenarioConfig &config, Band band, std::int64_t samples,
                                                int workers = 1)
{
    std::vector<double> values(static_cast<std::size_t>(samples), std::numeric_limits<double>::quiet_NaN());
    run_trials(samples, workers, [&](std::uint64_t s) {
        Rng rng(config.seed, s);
        const Topology topo = build_topology(config, rng);
        if (auto v = central_link_sinr(topo, band, config, rng))
            values[s] = *v;
        return TrialOutcome{};
    });
    std::erase_if(values, [](double v) { return std::isnan(v); });
    return values;
}

inline SinrCdf sinr_cdf_from_samples(std::vector<double> sinr_linear, Band band)
{
    std::sort(sinr_linear.begin(), sinr_linear.end());
    SinrCdf cdf;
    cdf.band = band;
    const double n = static_cast<double>(sinr_linear.size());
    cdf.points.reserve(sinr_linear.size());
    for (std::size_t i = 0; i < sinr_linear.size(); ++i)
        cdf.points.emplace_back(linear_to_db(sinr_linear[i]), static_cast<double>(i + 1) / n);
    return cdf;
}

inline SinrCdf sinr_cdf(const ScenarioConfig &config, Band band, std::int64_t samples, int workers = 1)
{
    return sinr_cdf_from_samples(central_sinr_samples(config, band, samples, workers), band);
}

/// Central-link outage counted directly with the threshold test.
inline OutageEstimate estimate_central_outage(const ScenarioConfig &config, Band band, std::int64_t samples,
                                              int workers = 1)
{
    const auto counts = run_trials(samples, workers, [&](std::uint64_t s) {
        Rng rng(config.seed, s);
        const Topology topo = build_topology(config, rng);
        const auto v = central_link_sinr(topo, band, config, rng);
        SinrSample sample;
        sample.sinr_linear = v.value_or(0.0);
        return TrialOutcome{link_in_outage(sample, config), !v.has_value()};
    });
    return make_estimate(LinkMode::Cc, RoutingScheme::None, counts, config);
}

/// What a sweep row estimates.
struct EstimatorSpec {
    LinkMode mode = LinkMode::Cc;
    RoutingScheme scheme = RoutingScheme::None;
};

inline OutageEstimate run_estimator(const ScenarioConfig &config, const EstimatorSpec &spec, int workers = 1)
{
    switch (spec.mode) {
    case LinkMode::Cc: return estimate_cc_outage(config, config.trials, workers);
    case LinkMode::D2dUl: return estimate_d2d_outage(config, spec.scheme, Band::Ul, config.trials, workers);
    case LinkMode::D2dDl: return estimate_d2d_outage(config, spec.scheme, Band::Dl, config.trials, workers);
    }
    return {};
}

/// One row per (value, target); every row reuses config.seed.
inline std::vector<OutageEstimate> run_sweep(const ScenarioConfig &config, const std::string &key,
                                             const std::vector<std::string> &values,
                                             const std::vector<EstimatorSpec> &targets, int workers = 1)
{
    {
        ScenarioConfig probe = config;
        if (!is_numeric_key(key))
            set_field(probe, key, "");
    }
    std::vector<OutageEstimate> rows;
    for (const auto &value : values) {
        ScenarioConfig c = config;
        set_field(c, key, value);
        validate(c);
        for (const auto &target : targets) {
            OutageEstimate e = run_estimator(c, target, workers);
            e.sweep_key = key;
            e.sweep_value = value;
            rows.push_back(std::move(e));
        }
    }
    return rows;
}

inline void write_estimates_csv(std::ostream &os, const std::vector<OutageEstimate> &rows)
{
    using detail::format_double;
    os << "mode,scheme,band,sweep_key,sweep_value,trials,failures,outage,ci95,no_route,seed,config_hash\n";
    for (const auto &r : rows)
        os << to_string(r.mode) << ',' << to_string(r.scheme) << ',' << band_name(r.mode) << ',' << r.sweep_key
           << ',' << r.sweep_value << ',' << r.trials << ',' << r.failures << ',' << format_double(r.outage) << ','
           << format_double(r.ci95_halfwidth) << ',' << r.no_route << ',' << r.seed << ',' << r.config_hash << '\n';
}

} // namespace d2dsim

#endif // D2DSIM_MONTECARLO_HPP_
