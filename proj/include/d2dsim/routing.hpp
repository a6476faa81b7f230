#ifndef D2DSIM_ROUTING_HPP_
#define D2DSIM_ROUTING_HPP_

#include <cmath>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "config.hpp"
#include "geometry.hpp"
#include "rng.hpp"

namespace d2dsim {

enum class RoutingScheme { None, Spr, Br };

inline std::string to_string(RoutingScheme s)
{
    switch (s) {
    case RoutingScheme::None: return "NONE";
    case RoutingScheme::Spr: return "SPR";
    case RoutingScheme::Br: return "BR";
    }
    return {};
}

/// Relay chain over D2D UE indices; hops.front() is the source, hops.back() the destination.
struct Route {
    std::vector<std::size_t> hops;
    std::vector<double> hop_distances_m;
    RoutingScheme scheme = RoutingScheme::Spr;
    bool found = false;

    /// Number of transmissions J.
    std::size_t hop_count() const noexcept { return hops.empty() ? 0 : hops.size() - 1; }
};

/**
 * Greedy geographic forwarding with strict progress: from the current node,
 * move to the D2D UE within the forwarding radius that is closest to the
 * destination, provided it is strictly closer than the current node. Ties go
 * to the lowest index. Terminates within |D2D UEs| steps because the distance
 * to the destination strictly decreases.
 */
inline Route spr_route(std::size_t src, std::size_t dst, const Topology &topo, const ScenarioConfig &config)
{
    Route route;
    route.scheme = RoutingScheme::Spr;
    const double rho = config.forwarding_radius();
    const auto &ues = topo.d2d_ues;
    const Point target = ues[dst];

    std::size_t current = src;
    route.hops.push_back(src);
    while (current != dst) {
        const double here = topo.extent.distance(ues[current], target);
        std::size_t next = npos;
        if (here <= rho) {
            next = dst;
        } else {
            double best = here;
            for (std::size_t j = 0; j < ues.size(); ++j) {
                if (j == current)
                    continue;
                const double to_dst = topo.extent.distance(ues[j], target);
                if (to_dst >= best)
                    continue;
                if (topo.extent.distance(ues[current], ues[j]) > rho)
                    continue;
                best = to_dst;
                next = j;
            }
        }
        if (next == npos) {
            route.hops.clear();
            route.hop_distances_m.clear();
            route.found = false;
            return route;
        }
        route.hop_distances_m.push_back(topo.extent.distance(ues[current], ues[next]));
        route.hops.push_back(next);
        current = next;
    }
    route.found = true;
    return route;
}

/// Per-node earliest hop at which a flood first reaches it (-1: never).
struct BroadcastWave {
    std::vector<int> reached;
    int hop_limit = 0;

    bool delivered(std::size_t node) const { return node < reached.size() && reached[node] >= 0; }
};

/**
 * Synchronous once-per-node flooding on the disk graph of radius rho: nodes
 * first reached at hop k rebroadcast once at hop k + 1. Restricted to
 * `participants` when that list is non-empty (the source is always included).
 */
inline BroadcastWave br_route(std::size_t src, const Topology &topo, const ScenarioConfig &config, int hop_limit,
                              std::span<const std::size_t> participants = {})
{
    BroadcastWave wave;
    wave.hop_limit = hop_limit;
    const auto &ues = topo.d2d_ues;
    const double rho = config.forwarding_radius();
    wave.reached.assign(ues.size(), -1);

    std::vector<std::size_t> pool;
    if (participants.empty()) {
        pool.resize(ues.size());
        for (std::size_t i = 0; i < ues.size(); ++i)
            pool[i] = i;
    } else {
        pool.assign(participants.begin(), participants.end());
    }

    wave.reached[src] = 0;
    std::vector<std::size_t> frontier{src};
    for (int hop = 1; hop <= hop_limit && !frontier.empty(); ++hop) {
        std::vector<std::size_t> next;
        for (std::size_t j : pool) {
            if (wave.reached[j] >= 0)
                continue;
            for (std::size_t t : frontier)
                if (topo.extent.distance(ues[t], ues[j]) <= rho) {
                    next.push_back(j);
                    break;
                }
        }
        for (std::size_t j : next)
            wave.reached[j] = hop;
        frontier = std::move(next);
    }
    return wave;
}

/// Overload matching the (src, dst) call shape; dst does not alter the flood.
inline BroadcastWave br_route(std::size_t src, std::size_t /*dst*/, const Topology &topo,
                              const ScenarioConfig &config, int hop_limit)
{
    return br_route(src, topo, config, hop_limit);
}

/**
 * Draws a D2D source/destination pair per config.d2d_destination. With a
 * positive d2d_pair_distance_m the destination is moved to that distance from
 * the source at a uniform bearing (the topology is modified).
 */
inline std::optional<std::pair<std::size_t, std::size_t>> draw_d2d_pair(Topology &topo,
                                                                        const ScenarioConfig &config, Rng &rng)
{
    const std::size_t n = topo.d2d_ues.size();
    if (n < 2)
        return std::nullopt;
    const std::size_t src = rng.index(n);
    auto any_other = [&] {
        std::size_t d = rng.index(n - 1);
        return d >= src ? d + 1 : d;
    };

    if (config.d2d_pair_distance_m > 0.0) {
        const std::size_t dst = any_other();
        const double bearing = rng.uniform(0.0, 2.0 * kPi);
        const Point offset{config.d2d_pair_distance_m * std::cos(bearing),
                           config.d2d_pair_distance_m * std::sin(bearing)};
        topo.place({NodeKind::D2dUe, dst}, topo.d2d_ues[src] + offset);
        return std::pair{src, dst};
    }

    switch (config.d2d_destination) {
    case D2dDestination::Anywhere:
        return std::pair{src, any_other()};
    case D2dDestination::Nearest: {
        std::size_t best = npos;
        double best_d = std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < n; ++j) {
            if (j == src)
                continue;
            const double d = topo.extent.distance(topo.d2d_ues[src], topo.d2d_ues[j]);
            if (d < best_d) {
                best_d = d;
                best = j;
            }
        }
        return std::pair{src, best};
    }
    case D2dDestination::SameCell: {
        const std::size_t cell = topo.d2d_serving[src];
        std::vector<std::size_t> mates;
        for (std::size_t j = 0; j < n; ++j)
            if (j != src && topo.d2d_serving[j] == cell)
                mates.push_back(j);
        if (mates.empty())
            return std::nullopt;
        return std::pair{src, mates[rng.index(mates.size())]};
    }
    }
    return std::nullopt;
}

/// Mean SPR hop count over n_samples independent (topology, pair) draws; NaN if no route was found.
inline double route_hop_count_expectation(const ScenarioConfig &config, int n_samples)
{
    double total = 0.0;
    long found = 0;
    for (int s = 0; s < n_samples; ++s) {
        Rng rng(config.seed, static_cast<std::uint64_t>(s));
        Topology topo = build_topology(config, rng);
        const auto pair = draw_d2d_pair(topo, config, rng);
        if (!pair)
            continue;
        const Route r = spr_route(pair->first, pair->second, topo, config);
        if (!r.found)
            continue;
        total += static_cast<double>(r.hop_count());
        ++found;
    }
    return found ? total / static_cast<double>(found) : std::numeric_limits<double>::quiet_NaN();
}

} // namespace d2dsim

#endif // D2DSIM_ROUTING_HPP_
