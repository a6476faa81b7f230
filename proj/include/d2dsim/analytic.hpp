#ifndef D2DSIM_ANALYTIC_HPP_
#define D2DSIM_ANALYTIC_HPP_

#include <cmath>
#include <span>
#include <stdexcept>
#include <string>

#include <boost/math/quadrature/tanh_sinh.hpp>

#include "config.hpp"

namespace d2dsim {

enum class FormulaId { CcEq7, D2dDlEq8, D2dUlEq9, SprUlEq11, MultihopEq10 };

inline std::string to_string(FormulaId id)
{
    switch (id) {
    case FormulaId::CcEq7: return "CC_EQ7";
    case FormulaId::D2dDlEq8: return "D2D_DL_EQ8";
    case FormulaId::D2dUlEq9: return "D2D_UL_EQ9";
    case FormulaId::SprUlEq11: return "SPR_UL_EQ11";
    case FormulaId::MultihopEq10: return "MULTIHOP_EQ10";
    }
    return {};
}

struct OutageFormulaResult {
    double value = 0.0;
    bool clamped = false;
    double raw_value = 0.0;
    FormulaId formula_id = FormulaId::CcEq7;
};

namespace detail {

inline void check_interference_args(double zeta, double alpha)
{
    if (!(zeta > 0.0))
        throw std::domain_error("interference integral: zeta must be > 0");
    if (!(alpha > 2.0))
        throw std::domain_error("interference integral: alpha must be > 2 (integral diverges)");
}

inline boost::math::quadrature::tanh_sinh<double> &quadrature()
{
    thread_local boost::math::quadrature::tanh_sinh<double> q;
    return q;
}

/// Integral of zeta^(2/alpha) / (1 + u^(alpha/2)) over [lower, infinity).
inline double interference_tail(double zeta, double alpha, double lower)
{
    const double scale = std::pow(zeta, 2.0 / alpha);
    const double half = 0.5 * alpha;
    auto f = [half](double u) { return 1.0 / (1.0 + std::pow(u, half)); };
    // u = 1/t maps [1, inf) onto (0, 1]; the integrand becomes t^(half-2) / (t^half + 1).
    auto g = [half](double t) { return std::pow(t, half - 2.0) / (std::pow(t, half) + 1.0); };
    constexpr double tol = 1e-13;
    auto &q = quadrature();
    double total = 0.0;
    if (lower < 1.0) {
        total += q.integrate(f, lower, 1.0, tol);
        total += q.integrate(g, 0.0, 1.0, tol);
    } else {
        total += q.integrate(g, 0.0, 1.0 / lower, tol);
    }
    return scale * total;
}

inline OutageFormulaResult clamp_probability(double raw, FormulaId id)
{
    OutageFormulaResult r;
    r.raw_value = raw;
    r.formula_id = id;
    r.clamped = !(raw >= 0.0 && raw <= 1.0);
    r.value = raw < 0.0 ? 0.0 : (raw > 1.0 ? 1.0 : raw);
    return r;
}

} // namespace detail

/// A(zeta, alpha) by quadrature, regardless of alpha.
inline double a_func_quadrature(double zeta, double alpha)
{
    detail::check_interference_args(zeta, alpha);
    return detail::interference_tail(zeta, alpha, std::pow(zeta, -2.0 / alpha));
}

/// B(zeta, alpha) by quadrature, regardless of alpha.
inline double b_func_quadrature(double zeta, double alpha)
{
    detail::check_interference_args(zeta, alpha);
    return detail::interference_tail(zeta, alpha, 0.0);
}

/// Interference integral with exclusion radius; sqrt(zeta) atan(sqrt(zeta)) at alpha = 4.
inline double a_func(double zeta, double alpha)
{
    detail::check_interference_args(zeta, alpha);
    if (alpha == 4.0) {
        const double s = std::sqrt(zeta);
        return s * std::atan(s);
    }
    return a_func_quadrature(zeta, alpha);
}

/// Interference integral without exclusion; pi sqrt(zeta) / 2 at alpha = 4.
inline double b_func(double zeta, double alpha)
{
    detail::check_interference_args(zeta, alpha);
    if (alpha == 4.0)
        return 0.5 * kPi * std::sqrt(zeta);
    return b_func_quadrature(zeta, alpha);
}

/// Success probability of a CC hop of length r with PPP co-channel interferers beyond r.
inline double cc_link_success(double r, const ScenarioConfig &config)
{
    const double a = a_func(config.sinr_threshold_linear, config.pathloss_exponent);
    return std::exp(-config.bs_density_per_m2 * kPi * r * r * a);
}

inline double cc_uplink_success(double r_mn, const ScenarioConfig &config) { return cc_link_success(r_mn, config); }

inline double cc_downlink_success(double r_nm2, const ScenarioConfig &config)
{
    return cc_link_success(r_nm2, config);
}

/// End-to-end CC outage: uplink to the serving BS, downlink to the destination.
inline OutageFormulaResult cc_outage(double r_mn, double r_nm2, const ScenarioConfig &config)
{
    const double a = a_func(config.sinr_threshold_linear, config.pathloss_exponent);
    const double raw = -std::expm1(-config.bs_density_per_m2 * kPi * (r_mn * r_mn + r_nm2 * r_nm2) * a);
    return detail::clamp_probability(raw, FormulaId::CcEq7);
}

namespace detail {

inline double d2d_success_prefactor(const ScenarioConfig &config)
{
    const double alpha = config.pathloss_exponent;
    const double zeta = config.sinr_threshold_linear;
    const double a = a_func(zeta, alpha);
    return alpha * std::sin(2.0 * kPi / alpha) / (2.0 * kPi * (1.0 + a)) * std::pow(zeta, -2.0 / alpha);
}

} // namespace detail

/// D2D in the downlink band, BS interferers. May leave [0, 1]; see `clamped`.
inline OutageFormulaResult d2d_dl_outage(const ScenarioConfig &config)
{
    const double density_ratio = config.bs_density_per_m2 / config.d2d_density_per_m2;
    const double success = detail::d2d_success_prefactor(config) / (1.0 + density_ratio);
    return detail::clamp_probability(1.0 - success, FormulaId::D2dDlEq8);
}

/**
 * D2D in the uplink band. The cross-tier term uses P_BS / P_D2D by default;
 * uplink_power_ratio = cc_over_d2d switches it to the uplink CC UE power.
 */
inline OutageFormulaResult d2d_ul_outage(const ScenarioConfig &config)
{
    const double density_ratio = config.bs_density_per_m2 / config.d2d_density_per_m2;
    const double p_interf =
        config.uplink_power_ratio == UplinkPowerRatio::BsOverD2d ? config.bs_power_w : config.cc_power_w;
    const double power_term = std::pow(p_interf / config.d2d_power_w, 2.0 / config.pathloss_exponent);
    const double success = detail::d2d_success_prefactor(config) / (1.0 + density_ratio * power_term);
    return detail::clamp_probability(1.0 - success, FormulaId::D2dUlEq9);
}

/// Distance-averaged single-link SPR outage in the uplink band with n_d2d UEs per cell.
inline OutageFormulaResult spr_ul_link_outage(int n_d2d, const ScenarioConfig &config)
{
    if (n_d2d < 1)
        throw std::domain_error("spr_ul_link_outage: n_d2d must be >= 1");
    const double b = b_func(config.sinr_threshold_linear, config.pathloss_exponent);
    const double candidates = static_cast<double>(n_d2d - 1);
    const double raw = 1.0 - candidates / (candidates + 2.0 * b);
    return detail::clamp_probability(raw, FormulaId::SprUlEq11);
}

/// Decode-and-forward composition: 1 - prod(1 - p_j).
inline double multihop_outage(std::span<const double> per_hop_outages)
{
    double success = 1.0;
    for (double p : per_hop_outages) {
        if (!(p >= 0.0 && p <= 1.0))
            throw std::domain_error("multihop_outage: per-hop outage outside [0, 1]");
        success *= 1.0 - p;
    }
    return 1.0 - success;
}

} // namespace d2dsim

#endif // D2DSIM_ANALYTIC_HPP_
