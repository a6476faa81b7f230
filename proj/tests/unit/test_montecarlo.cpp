#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "d2dsim/montecarlo.hpp"
#include "oracles.hpp"

using namespace d2dsim;

namespace {

ScenarioConfig validation_ppp(double r)
{
    ScenarioConfig c;
    c.topology_mode = TopologyMode::PppField;
    c.fidelity_mode = FidelityMode::Validation;
    c.cc_uplink_distance_m = r;
    c.cc_downlink_distance_m = r;
    return c;
}

} // namespace

TEST(Estimate, InvariantsHold)
{
    ScenarioConfig c;
    const auto e = estimate_cc_outage(c, 500);
    EXPECT_EQ(e.trials, 500);
    EXPECT_GE(e.failures, 0);
    EXPECT_LE(e.failures, e.trials);
    EXPECT_DOUBLE_EQ(e.outage, static_cast<double>(e.failures) / 500.0);
    EXPECT_DOUBLE_EQ(e.ci95_halfwidth, 1.96 * std::sqrt(e.outage * (1 - e.outage) / 500.0));
    EXPECT_EQ(e.config_hash, config_hash(c));
    EXPECT_EQ(e.mode, LinkMode::Cc);
    EXPECT_EQ(e.scheme, RoutingScheme::None);
}

TEST(Estimate, ThresholdExtremes)
{
    ScenarioConfig c;
    c.sinr_threshold_linear = 1e-12;
    EXPECT_EQ(estimate_cc_outage(c, 300).failures, 0);
    c.sinr_threshold_linear = 1e12;
    EXPECT_EQ(estimate_cc_outage(c, 300).failures, 300);
}

TEST(Estimate, WorkerCountDoesNotChangeResults)
{
    ScenarioConfig c;
    c.d2d_ues_per_bs = 20;
    for (RoutingScheme s : {RoutingScheme::Spr, RoutingScheme::Br}) {
        const auto a = estimate_d2d_outage(c, s, Band::Ul, 301, 1);
        const auto b = estimate_d2d_outage(c, s, Band::Ul, 301, 3);
        const auto d = estimate_d2d_outage(c, s, Band::Ul, 301, 8);
        EXPECT_EQ(a.failures, b.failures);
        EXPECT_EQ(a.failures, d.failures);
        EXPECT_EQ(a.no_route, d.no_route);
    }
    EXPECT_EQ(estimate_cc_outage(c, 257, 1).failures, estimate_cc_outage(c, 257, 5).failures);
}

TEST(Estimate, MergeOrderIrrelevant)
{
    const OutageCounts a{10, 3, 1}, b{7, 7, 0}, d{100, 12, 4};
    EXPECT_EQ((a + b) + d, a + (b + d));
    EXPECT_EQ(a + b + d, d + a + b);
}

TEST(Estimate, ConfidenceShrinksWithTrials)
{
    const ScenarioConfig c = validation_ppp(300);
    const auto small = estimate_cc_outage(c, 1000);
    const auto large = estimate_cc_outage(c, 10000);
    EXPECT_NEAR(small.ci95_halfwidth / large.ci95_halfwidth, std::sqrt(10.0), 0.35 * std::sqrt(10.0));
}

TEST(Estimate, FixedDistanceCcMatchesClosedForm)
{
    const ScenarioConfig c = validation_ppp(300);
    const auto e = estimate_cc_outage(c, 8000);
    EXPECT_NEAR(e.outage, oracle::kCcOutage300_300, 3 * e.ci95_halfwidth);
}

TEST(Estimate, AdjacentD2dPairWithoutInterferenceNeverFails)
{
    ScenarioConfig c;
    c.d2d_pair_distance_m = 5;
    c.shadow_sigma_db = 0;
    c.bs_power_w = 1e-12;
    c.cc_power_w = 1e-12;
    const auto e = estimate_d2d_outage(c, RoutingScheme::Spr, Band::Dl, 500);
    EXPECT_LE(e.outage, 0.01);
    EXPECT_EQ(e.no_route, 0);
}

TEST(Estimate, MissingRouteCountedAsFailure)
{
    ScenarioConfig c;
    c.forwarding_radius_m = 1;
    c.d2d_pair_distance_m = 400;
    const auto e = estimate_d2d_outage(c, RoutingScheme::Spr, Band::Ul, 50);
    EXPECT_EQ(e.failures, 50);
    EXPECT_EQ(e.no_route, 50);
    const auto b = estimate_d2d_outage(c, RoutingScheme::Br, Band::Ul, 50);
    EXPECT_EQ(b.no_route, 50);
}

TEST(RouteOutage, ProductOfHopsWithinNoise)
{
    ScenarioConfig c;
    c.d2d_pair_distance_m = 1500;
    Rng rng(30, 0);
    Topology t = build_topology(c, rng);
    const auto pair = draw_d2d_pair(t, c, rng);
    ASSERT_TRUE(pair);
    const Route r = spr_route(pair->first, pair->second, t, c);
    ASSERT_TRUE(r.found);
    const auto out = estimate_route_outage(t, r, Band::Ul, c, 4000);
    ASSERT_EQ(out.per_hop.size(), r.hop_count());
    std::vector<double> p;
    double var = 0;
    for (const auto &h : out.per_hop) {
        p.push_back(h.outage);
        var += h.outage * (1 - h.outage) / h.trials;
    }
    const double predicted = multihop_outage(p);
    const double tol = 3 * std::sqrt(std::pow(out.route.ci95_halfwidth / 1.96, 2) + var);
    EXPECT_NEAR(out.route.outage, predicted, tol);
}

TEST(SinrCdf, MonotoneAndEndsAtOne)
{
    ScenarioConfig c;
    for (Band band : {Band::Ul, Band::Dl}) {
        const auto cdf = sinr_cdf(c, band, 400);
        ASSERT_EQ(cdf.points.size(), 400u);
        for (std::size_t i = 1; i < cdf.points.size(); ++i) {
            EXPECT_GE(cdf.points[i].first, cdf.points[i - 1].first);
            EXPECT_GT(cdf.points[i].second, cdf.points[i - 1].second);
        }
        EXPECT_DOUBLE_EQ(cdf.points.back().second, 1.0);
        EXPECT_DOUBLE_EQ(cdf.evaluate(-1e9), 0.0);
        EXPECT_DOUBLE_EQ(cdf.evaluate(1e9), 1.0);
    }
}

TEST(SinrCdf, NoiseOnlyRayleighLaw)
{
    ScenarioConfig c;
    c.shadow_sigma_db = 0;
    c.antenna_height_diff_m = 0;
    Topology t;
    t.mode = TopologyMode::PppField;
    t.extent = Extent::square(1e5);
    t.bs = {{0, 0}};
    const double r = 2000;
    t.cc_dl_ues = {{r, 0}};
    t.cc_dl_serving = {0};
    t.refresh_designated();

    std::vector<double> db;
    for (std::uint64_t s = 0; s < 5000; ++s) {
        Rng rng(31, s);
        const auto v = central_link_sinr(t, Band::Dl, c, rng);
        ASSERT_TRUE(v);
        db.push_back(linear_to_db(*v));
    }
    const double mean_snr = c.bs_power_w * c.pathloss_constant / (std::pow(r, 4) * c.awgn_power_w);
    const double ks =
        oracle::ks_statistic(db, [&](double x) { return 1.0 - std::exp(-db_to_linear(x) / mean_snr); });
    EXPECT_LT(ks, oracle::ks_critical_001(db.size()));
}

TEST(SinrCdf, AgreesWithCountedOutage)
{
    ScenarioConfig c;
    const auto cdf = sinr_cdf(c, Band::Dl, 2000);
    const auto e = estimate_central_outage(c, Band::Dl, 2000);
    EXPECT_NEAR(cdf.evaluate(linear_to_db(c.sinr_threshold_linear)), e.outage, 3 * e.ci95_halfwidth + 1e-3);
}

TEST(SinrCdf, NoBsGivesNothing)
{
    ScenarioConfig c;
    Topology t;
    Rng rng(32, 0);
    EXPECT_FALSE(central_link_sinr(t, Band::Ul, c, rng));
}

TEST(Sweep, EmptyValues)
{
    EXPECT_TRUE(run_sweep(ScenarioConfig{}, "bs_density_per_m2", {}, {{}}).empty());
}

TEST(Sweep, SingleValueEqualsDirectCall)
{
    ScenarioConfig c;
    c.trials = 300;
    const auto rows = run_sweep(c, "d2d_ues_per_bs", {"20"}, {{LinkMode::D2dUl, RoutingScheme::Spr}});
    ASSERT_EQ(rows.size(), 1u);
    c.d2d_ues_per_bs = 20;
    const auto direct = estimate_d2d_outage(c, RoutingScheme::Spr, Band::Ul, 300);
    EXPECT_EQ(rows[0].failures, direct.failures);
    EXPECT_EQ(rows[0].config_hash, direct.config_hash);
    EXPECT_EQ(rows[0].sweep_key, "d2d_ues_per_bs");
    EXPECT_EQ(rows[0].sweep_value, "20");
}

TEST(Sweep, UnknownKeyRejected)
{
    EXPECT_THROW(run_sweep(ScenarioConfig{}, "no_such_key", {"1"}, {{}}), ConfigError);
}

TEST(Sweep, BsDensityMonotoneAtFixedDistance)
{
    ScenarioConfig c = validation_ppp(300);
    c.trials = 3000;
    const auto rows = run_sweep(c, "bs_density_per_m2", {"3e-7", "1.27e-6", "4e-6"}, {{}});
    ASSERT_EQ(rows.size(), 3u);
    EXPECT_LE(rows[0].outage, rows[1].outage);
    EXPECT_LE(rows[1].outage, rows[2].outage);
}

TEST(Csv, HeaderAndRow)
{
    ScenarioConfig c;
    OutageEstimate e = make_estimate(LinkMode::D2dUl, RoutingScheme::Br, {4, 1, 0}, c);
    e.sweep_key = "d2d_ues_per_bs";
    e.sweep_value = "40";
    std::ostringstream os;
    write_estimates_csv(os, {e});
    EXPECT_EQ(os.str(), "mode,scheme,band,sweep_key,sweep_value,trials,failures,outage,ci95,no_route,seed,config_hash\n"
                        "D2D_UL,BR,UL,d2d_ues_per_bs,40,4,1,0.25,0.4243524478543749,0,1," +
                            config_hash(c) + "\n");
}
