#include <gtest/gtest.h>

#include <cmath>

#include "d2dsim/channel.hpp"
#include "oracles.hpp"

using namespace d2dsim;

namespace {

Topology hex_topology(const ScenarioConfig &c, std::uint64_t stream = 0)
{
    Rng rng(11, stream);
    return build_topology(c, rng);
}

int count_kind(const std::vector<NodeRef> &v, NodeKind k)
{
    return static_cast<int>(std::count_if(v.begin(), v.end(), [k](const NodeRef &n) { return n.kind == k; }));
}

} // namespace

TEST(Channel, SinrWorkedExample)
{
    LinkSample s;
    s.received_power_w = 2e-10;
    std::vector<LinkSample> interf(2);
    interf[0].received_power_w = 1e-10;
    interf[1].received_power_w = 3e-10;
    const auto r = compute_sinr(s, interf, 6e-17);
    EXPECT_NEAR(r.sinr_linear, oracle::kSinrExample, 1e-15);
}

TEST(Channel, OutageIsStrict)
{
    ScenarioConfig c;
    SinrSample s;
    s.sinr_linear = c.sinr_threshold_linear;
    EXPECT_FALSE(link_in_outage(s, c));
    s.sinr_linear = std::nextafter(c.sinr_threshold_linear, 0.0);
    EXPECT_TRUE(link_in_outage(s, c));
}

TEST(Channel, ZeroDenominatorThrows)
{
    LinkSample s;
    s.received_power_w = 1.0;
    EXPECT_THROW(compute_sinr(s, {}, 0.0), std::domain_error);
}

TEST(Channel, PathGain)
{
    ScenarioConfig c;
    EXPECT_NEAR(path_gain(100.0, c), c.pathloss_constant * 1e-8, 1e-22);
    EXPECT_DOUBLE_EQ(path_gain(0.2, c), c.pathloss_constant);
    c.pathloss_exponent = 3.0;
    EXPECT_NEAR(path_gain(10.0, c), c.pathloss_constant * 1e-3, 1e-18);
}

TEST(Channel, FadingMeanAndValidationShadowing)
{
    ScenarioConfig c;
    c.fidelity_mode = FidelityMode::Validation;
    Rng rng(12, 0);
    double s = 0;
    const int n = 100000;
    for (int i = 0; i < n; ++i) {
        const auto l = draw_link(100.0, 1.0, c, rng);
        ASSERT_EQ(l.shadow_gain, 1.0);
        s += l.received_power_w;
    }
    EXPECT_NEAR(s / n / path_gain(100.0, c), 1.0, 0.02);
}

TEST(Channel, ShadowingSpreadInFullMode)
{
    ScenarioConfig c;
    Rng rng(13, 0);
    double s = 0, s2 = 0;
    const int n = 100000;
    for (int i = 0; i < n; ++i) {
        const double g = linear_to_db(draw_shadow_gain(c, rng));
        s += g;
        s2 += g * g;
    }
    EXPECT_NEAR(s / n, 0.0, 0.1);
    EXPECT_NEAR(std::sqrt(s2 / n), 6.0, 0.1);
}

TEST(Interferers, Hex19CcSets)
{
    ScenarioConfig c;
    const Topology t = hex_topology(c);
    const NodeRef ue{NodeKind::CcDownlinkUe, 0};
    const NodeRef bs{NodeKind::Bs, t.serving(ue)};
    const auto dl = interferer_set(ue, bs, TransmissionMode::CcDownlink, t, c);
    EXPECT_EQ(dl.size(), 18u);
    EXPECT_EQ(std::find(dl.begin(), dl.end(), bs), dl.end());

    const NodeRef ul_ue{NodeKind::CcUplinkUe, 3};
    const NodeRef ul_bs{NodeKind::Bs, t.serving(ul_ue)};
    const auto ul = interferer_set(ul_bs, ul_ue, TransmissionMode::CcUplink, t, c);
    EXPECT_EQ(ul.size(), 18u);
    for (const auto &n : ul)
        EXPECT_NE(t.serving(n), ul_bs.index);
}

TEST(Interferers, D2dDownlinkBand)
{
    ScenarioConfig c;
    const Topology t = hex_topology(c);
    const NodeRef tx{NodeKind::D2dUe, 0};
    const NodeRef rx{NodeKind::D2dUe, 1};
    EXPECT_EQ(interferer_set(rx, tx, TransmissionMode::D2dDownlinkBand, t, c).size(), 19u);
    c.exclude_parent_bs = true;
    EXPECT_EQ(interferer_set(rx, tx, TransmissionMode::D2dDownlinkBand, t, c).size(), 18u);
}

TEST(Interferers, D2dUplinkBand)
{
    ScenarioConfig c;
    const Topology t = hex_topology(c);
    const NodeRef tx{NodeKind::D2dUe, 0};
    const NodeRef rx{NodeKind::D2dUe, 1};
    ASSERT_EQ(t.serving(tx), t.serving(rx));
    const auto set = interferer_set(rx, tx, TransmissionMode::D2dUplinkBand, t, c);
    EXPECT_EQ(count_kind(set, NodeKind::CcUplinkUe), 18);
    EXPECT_EQ(count_kind(set, NodeKind::D2dUe), 18);
    EXPECT_EQ(count_kind(set, NodeKind::Bs), 0);
    for (const auto &n : set) {
        if (n.kind == NodeKind::D2dUe) {
            EXPECT_NE(t.serving(n), t.serving(tx));
        }
    }

    c.all_d2d_active = true;
    const auto all = interferer_set(rx, tx, TransmissionMode::D2dUplinkBand, t, c);
    EXPECT_EQ(count_kind(all, NodeKind::D2dUe), static_cast<int>(t.d2d_ues.size()) - 2);
}

TEST(Interferers, PppCcExcludesCloserTransmitters)
{
    ScenarioConfig c;
    c.topology_mode = TopologyMode::PppField;
    const Topology t = hex_topology(c, 1);
    const NodeRef ue{NodeKind::CcDownlinkUe, 0};
    const NodeRef bs{NodeKind::Bs, t.serving(ue)};
    const double serving = t.extent.distance(t.position(ue), t.position(bs));
    const auto dl = interferer_set(ue, bs, TransmissionMode::CcDownlink, t, c);
    EXPECT_EQ(dl.size(), t.bs.size() - 1);
    for (const auto &n : dl)
        EXPECT_GT(t.extent.distance(t.position(ue), t.position(n)), serving);
}

TEST(Channel, DrawSinrNoiseOnlyInfinityInValidation)
{
    ScenarioConfig c;
    c.fidelity_mode = FidelityMode::Validation;
    const Topology t = hex_topology(c);
    Rng rng(14, 0);
    const auto s = draw_sinr(t, {NodeKind::Bs, 0}, {NodeKind::CcDownlinkUe, 0}, {}, c, rng);
    EXPECT_TRUE(std::isinf(s.sinr_linear));
}
