#ifndef D2DSIM_TESTS_ORACLES_HPP_
#define D2DSIM_TESTS_ORACLES_HPP_

// Reference values computed offline with mpmath at 40 significant digits, and
// small independent reference algorithms used by the tests.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <deque>
#include <functional>
#include <vector>

#include "d2dsim/geometry.hpp"

namespace oracle {

inline constexpr double kZeta = 0.25118864315095801; // -6 dB

inline constexpr double kA_zeta_4 = 0.23285005750795029;
inline constexpr double kB_zeta_4 = 0.78726306561821500;
inline constexpr double kA_zeta_3 = 0.47468937966537945;
inline constexpr double kB_zeta_3 = 0.96278204379602220;
inline constexpr double kA_2_3p5 = 1.8769604242462277;
inline constexpr double kB_half_6 = 0.95974233961488294;

inline constexpr double kCcSuccess300 = 0.91978738451537771;
inline constexpr double kCcOutage300_300 = 0.15399116728636071;
inline constexpr double kD2dDlOutageEqualDensity = 0.48484268908714788;
inline constexpr double kD2dPrefactor = 1.0303146218257042;
inline constexpr double kD2dUlOutageDefaults = 0.95093739896068075;

inline constexpr double kSprUlN11 = 0.13603374456836047;
inline constexpr double kSprUlN10 = 0.14889803209104444;
inline constexpr double kSprUlN40 = 0.038805779915794900;
inline constexpr double kSprUlN80 = 0.019541239729687115;
inline constexpr double kSprUlN140 = 0.011200650463274524;

inline constexpr double kNearestBsMedian = 416.80789222114773;
inline constexpr double kNearestBsMean = 443.67825470805689;

inline constexpr double kPathlossConstant = 1.2905745254293538e-4;
inline constexpr double kForwardingRadius = 961.96209496710031;

inline constexpr double kSinrExample = 0.4999999250000112; // 2e-10 / (6e-17 + 4e-10)

/// Hop distances from src on the disk graph of radius rho (-1: unreachable).
inline std::vector<int> bfs_layers(const std::vector<d2dsim::Point> &pts, std::size_t src, double rho,
                                   const std::function<double(d2dsim::Point, d2dsim::Point)> &dist)
{
    std::vector<int> layer(pts.size(), -1);
    std::deque<std::size_t> queue{src};
    layer[src] = 0;
    while (!queue.empty()) {
        const std::size_t u = queue.front();
        queue.pop_front();
        for (std::size_t v = 0; v < pts.size(); ++v)
            if (layer[v] < 0 && dist(pts[u], pts[v]) <= rho) {
                layer[v] = layer[u] + 1;
                queue.push_back(v);
            }
    }
    return layer;
}

/// One-sample Kolmogorov-Smirnov statistic against a continuous CDF.
inline double ks_statistic(std::vector<double> samples, const std::function<double(double)> &cdf)
{
    std::sort(samples.begin(), samples.end());
    const double n = static_cast<double>(samples.size());
    double d = 0.0;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const double f = cdf(samples[i]);
        d = std::max({d, f - static_cast<double>(i) / n, static_cast<double>(i + 1) / n - f});
    }
    return d;
}

/// Asymptotic KS critical value at significance 0.01.
inline double ks_critical_001(std::size_t n) { return 1.628 / std::sqrt(static_cast<double>(n)); }

} // namespace oracle

#endif // D2DSIM_TESTS_ORACLES_HPP_
