#ifndef D2DSIM_CHANNEL_HPP_
#define D2DSIM_CHANNEL_HPP_

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <stdexcept>
#include <vector>

#include "config.hpp"
#include "geometry.hpp"
#include "rng.hpp"

namespace d2dsim {

/// Which band a link uses and who shares it.
enum class TransmissionMode { CcDownlink, CcUplink, D2dDownlinkBand, D2dUplinkBand };

struct LinkSample {
    NodeRef tx{};
    NodeRef rx{};
    double distance_m = 0.0;
    double fading_gain = 1.0;
    double shadow_gain = 1.0;
    double tx_power_w = 0.0;
    double received_power_w = 0.0;
};

struct SinrSample {
    double signal_w = 0.0;
    double interference_w = 0.0;
    double noise_w = 0.0;
    double sinr_linear = 0.0;
};

inline double tx_power(NodeKind kind, const ScenarioConfig &config)
{
    switch (kind) {
    case NodeKind::Bs: return config.bs_power_w;
    case NodeKind::CcUplinkUe:
    case NodeKind::CcDownlinkUe: return config.cc_power_w;
    case NodeKind::D2dUe: return config.d2d_power_w;
    }
    return 0.0;
}

/// Distances below the 1 m reference are clamped to it.
inline double path_gain(double distance_m, const ScenarioConfig &config)
{
    const double r = std::max(distance_m, 1.0);
    if (config.pathloss_exponent == 4.0) {
        const double r2 = r * r;
        return config.pathloss_constant / (r2 * r2);
    }
    return config.pathloss_constant * std::pow(r, -config.pathloss_exponent);
}

inline double draw_shadow_gain(const ScenarioConfig &config, Rng &rng)
{
    if (config.validation() || config.shadow_sigma_db == 0.0)
        return 1.0;
    return db_to_linear(config.shadow_sigma_db * rng.normal());
}

/// One Rayleigh (and, in FULL mode, log-normal) draw for a link of known length.
inline LinkSample draw_link(double distance_m, double tx_power_w, const ScenarioConfig &config, Rng &rng)
{
    LinkSample s;
    s.distance_m = std::max(distance_m, 1.0);
    s.tx_power_w = tx_power_w;
    s.fading_gain = rng.exponential();
    s.shadow_gain = draw_shadow_gain(config, rng);
    s.received_power_w = s.fading_gain * s.shadow_gain * tx_power_w * path_gain(s.distance_m, config);
    return s;
}

inline LinkSample draw_link(const Topology &topo, NodeRef tx, NodeRef rx, const ScenarioConfig &config,
                            Rng &rng)
{
    LinkSample s = draw_link(node_distance(topo, tx, rx, config), tx_power(tx.kind, config), config, rng);
    s.tx = tx;
    s.rx = rx;
    return s;
}

inline SinrSample compute_sinr(const LinkSample &signal, std::span<const LinkSample> interferers, double noise_w)
{
    SinrSample out;
    out.signal_w = signal.received_power_w;
    out.noise_w = noise_w;
    for (const auto &i : interferers)
        out.interference_w += i.received_power_w;
    const double denom = out.noise_w + out.interference_w;
    if (!(denom > 0.0))
        throw std::domain_error("compute_sinr: noise and interference are both zero");
    out.sinr_linear = out.signal_w / denom;
    return out;
}

/// Outage iff the SINR is strictly below the connectivity threshold.
inline bool link_in_outage(const SinrSample &sinr, const ScenarioConfig &config)
{
    return sinr.sinr_linear < config.sinr_threshold_linear;
}

/**
 * Co-channel transmitters heard by `rx` while `tx` sends to it.
 *
 *  - CC downlink: every BS except the serving one.
 *  - CC uplink (rx is a BS): the uplink UE of every other cell.
 *  - D2D, downlink band: every BS, the parent included unless exclude_parent_bs.
 *  - D2D, uplink band: uplink CC UEs of other cells plus the other active D2D senders.
 *
 * In PPP_FIELD mode, CC links drop transmitters closer to the receiver than
 * the serving transmitter (nearest-BS association on the downlink, intra-cell
 * orthogonality on the uplink), and every D2D UE counts as an active sender.
 */
inline std::vector<NodeRef> interferer_set(NodeRef rx, NodeRef tx, TransmissionMode mode, const Topology &topo,
                                           const ScenarioConfig &config)
{
    std::vector<NodeRef> out;
    const bool ppp = topo.mode == TopologyMode::PppField;
    const Point rx_pos = topo.position(rx);

    switch (mode) {
    case TransmissionMode::CcDownlink: {
        const double serving_d = topo.extent.distance(rx_pos, topo.position(tx));
        for (std::size_t b = 0; b < topo.bs.size(); ++b) {
            if (tx.kind == NodeKind::Bs && b == tx.index)
                continue;
            if (ppp && topo.extent.distance(rx_pos, topo.bs[b]) <= serving_d)
                continue;
            out.push_back({NodeKind::Bs, b});
        }
        break;
    }
    case TransmissionMode::CcUplink: {
        const double serving_d = topo.extent.distance(rx_pos, topo.position(tx));
        for (std::size_t u = 0; u < topo.cc_ul_ues.size(); ++u) {
            const NodeRef ue{NodeKind::CcUplinkUe, u};
            if (ue == tx)
                continue;
            if (ppp) {
                if (topo.extent.distance(rx_pos, topo.cc_ul_ues[u]) <= serving_d)
                    continue;
            } else if (topo.cc_ul_serving[u] == rx.index) {
                continue;
            }
            out.push_back(ue);
        }
        break;
    }
    case TransmissionMode::D2dDownlinkBand: {
        const std::size_t parent = topo.serving(rx);
        for (std::size_t b = 0; b < topo.bs.size(); ++b) {
            if (config.exclude_parent_bs && b == parent)
                continue;
            out.push_back({NodeKind::Bs, b});
        }
        break;
    }
    case TransmissionMode::D2dUplinkBand: {
        const std::size_t rx_cell = topo.serving(rx);
        for (std::size_t u = 0; u < topo.cc_ul_ues.size(); ++u)
            if (topo.cc_ul_serving[u] != rx_cell)
                out.push_back({NodeKind::CcUplinkUe, u});
        const NodeRef self_tx = tx;
        auto add_d2d = [&](std::size_t i) {
            const NodeRef n{NodeKind::D2dUe, i};
            if (n != self_tx && n != rx)
                out.push_back(n);
        };
        if (ppp || config.all_d2d_active) {
            for (std::size_t i = 0; i < topo.d2d_ues.size(); ++i)
                add_d2d(i);
        } else {
            const std::size_t tx_cell = topo.serving(tx);
            for (std::size_t b = 0; b < topo.d2d_designated.size(); ++b)
                if (b != tx_cell && topo.d2d_designated[b] != npos)
                    add_d2d(topo.d2d_designated[b]);
        }
        break;
    }
    }
    return out;
}

/// Signal plus a fresh draw for every interferer, combined per the SINR definition.
inline SinrSample draw_sinr(const Topology &topo, NodeRef tx, NodeRef rx, std::span<const NodeRef> interferers,
                            const ScenarioConfig &config, Rng &rng)
{
    SinrSample out;
    out.signal_w = draw_link(topo, tx, rx, config, rng).received_power_w;
    out.noise_w = config.noise_w();
    for (const NodeRef &i : interferers)
        out.interference_w += draw_link(topo, i, rx, config, rng).received_power_w;
    const double denom = out.noise_w + out.interference_w;
    out.sinr_linear = denom > 0.0 ? out.signal_w / denom : std::numeric_limits<double>::infinity();
    return out;
}

} // namespace d2dsim

#endif // D2DSIM_CHANNEL_HPP_
