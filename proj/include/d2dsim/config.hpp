#ifndef D2DSIM_CONFIG_HPP_
#define D2DSIM_CONFIG_HPP_

#include <charconv>
#include <cmath>
#include <cstdint>
#include <iomanip>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace d2dsim {

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kSpeedOfLight = 299792458.0;

enum class TopologyMode { Hex19Wraparound, PppField };
enum class FidelityMode { Full, Validation };

/// How the destination of a D2D session is drawn for a given source.
enum class D2dDestination { SameCell, Nearest, Anywhere };

/// Which power ratio enters the uplink-band D2D closed form.
enum class UplinkPowerRatio { BsOverD2d, CcOverD2d };

inline double db_to_linear(double x_db) { return std::pow(10.0, x_db / 10.0); }
inline double linear_to_db(double x) { return 10.0 * std::log10(x); }

/// Free-space reference gain at 1 m, (lambda / 4 pi)^2.
inline double free_space_gain_1m(double carrier_hz)
{
    const double wavelength = kSpeedOfLight / carrier_hz;
    const double g = wavelength / (4.0 * kPi);
    return g * g;
}

class ConfigError : public std::runtime_error {
public:
    enum class Kind { Parse, Validation, UnknownKey };

    ConfigError(Kind kind, std::string field, const std::string &what)
        : std::runtime_error(what), kind_(kind), field_(std::move(field))
    {}

    Kind kind() const noexcept { return kind_; }
    /// Offending key (empty for malformed lines without a key).
    const std::string &field() const noexcept { return field_; }

private:
    Kind kind_;
    std::string field_;
};

/**
 * Scenario parameters. SI units throughout: meters, watts, m^-2, linear ratios.
 * Decibel and per-km^2 spellings are accepted by load_config only.
 */
struct ScenarioConfig {
    double bandwidth_hz = 20e6;
    double carrier_hz = 2.1e9;
    double sinr_threshold_linear = db_to_linear(-6.0);
    double pathloss_exponent = 4.0;
    double pathloss_constant = free_space_gain_1m(2.1e9);
    double awgn_power_w = 6e-17;
    double bs_density_per_m2 = 1.27e-6;
    double cc_ue_density_per_m2 = 1.27e-6;
    double d2d_density_per_m2 = 1.27e-6;
    int d2d_ues_per_bs = 10;
    double bs_radius_m = 500.0;
    double bs_power_w = 40.0;
    double d2d_power_w = 0.1;
    double cc_power_w = 0.1;
    double antenna_height_diff_m = 35.0;
    /// Log-normal shadowing standard deviation.
    double shadow_sigma_db = 6.0;
    TopologyMode topology_mode = TopologyMode::Hex19Wraparound;
    FidelityMode fidelity_mode = FidelityMode::Full;
    std::uint64_t seed = 1;
    int trials = 10000;

    // Run controls beyond the system parameter table.
    double ppp_extent_m = 10000.0;
    /// 0 selects the radius where mean D2D SNR equals the threshold.
    double forwarding_radius_m = 0.0;
    bool exclude_parent_bs = false;
    bool all_d2d_active = false;
    int hop_limit = 10;
    /// Fixed CC link lengths; 0 draws source/destination UEs at random.
    double cc_uplink_distance_m = 0.0;
    double cc_downlink_distance_m = 0.0;
    D2dDestination d2d_destination = D2dDestination::SameCell;
    /// Fixed D2D source-destination separation; 0 uses d2d_destination.
    double d2d_pair_distance_m = 0.0;
    UplinkPowerRatio uplink_power_ratio = UplinkPowerRatio::BsOverD2d;

    bool validation() const noexcept { return fidelity_mode == FidelityMode::Validation; }

    double noise_w() const noexcept { return validation() ? 0.0 : awgn_power_w; }

    double forwarding_radius() const
    {
        if (forwarding_radius_m > 0.0)
            return forwarding_radius_m;
        const double ratio = d2d_power_w * pathloss_constant / (sinr_threshold_linear * awgn_power_w);
        return std::pow(ratio, 1.0 / pathloss_exponent);
    }

    bool operator==(const ScenarioConfig &) const = default;
};

namespace detail {

inline std::string_view trim(std::string_view s)
{
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string_view::npos)
        return {};
    const auto last = s.find_last_not_of(" \t\r\n");
    return s.substr(first, last - first + 1);
}

inline std::string format_double(double v)
{
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

inline double parse_double(std::string_view key, std::string_view text)
{
    double v = 0.0;
    auto res = std::from_chars(text.data(), text.data() + text.size(), v);
    if (res.ec != std::errc{} || res.ptr != text.data() + text.size() || !std::isfinite(v))
        throw ConfigError(ConfigError::Kind::Parse, std::string(key),
                          "invalid number for '" + std::string(key) + "': " + std::string(text));
    return v;
}

template <typename Int>
Int parse_int(std::string_view key, std::string_view text)
{
    Int v{};
    auto res = std::from_chars(text.data(), text.data() + text.size(), v);
    if (res.ec != std::errc{} || res.ptr != text.data() + text.size())
        throw ConfigError(ConfigError::Kind::Parse, std::string(key),
                          "invalid integer for '" + std::string(key) + "': " + std::string(text));
    return v;
}

inline bool parse_bool(std::string_view key, std::string_view text)
{
    if (text == "true" || text == "1" || text == "yes")
        return true;
    if (text == "false" || text == "0" || text == "no")
        return false;
    throw ConfigError(ConfigError::Kind::Parse, std::string(key),
                      "invalid boolean for '" + std::string(key) + "': " + std::string(text));
}

[[noreturn]] inline void bad_enum(std::string_view key, std::string_view text)
{
    throw ConfigError(ConfigError::Kind::Parse, std::string(key),
                      "invalid value for '" + std::string(key) + "': " + std::string(text));
}

} // namespace detail

inline std::string to_string(TopologyMode m)
{
    return m == TopologyMode::Hex19Wraparound ? "hex19_wraparound" : "ppp_field";
}

inline std::string to_string(FidelityMode m) { return m == FidelityMode::Full ? "full" : "validation"; }

inline std::string to_string(D2dDestination d)
{
    switch (d) {
    case D2dDestination::SameCell: return "same_cell";
    case D2dDestination::Nearest: return "nearest";
    case D2dDestination::Anywhere: return "anywhere";
    }
    return {};
}

inline std::string to_string(UplinkPowerRatio r)
{
    return r == UplinkPowerRatio::BsOverD2d ? "bs_over_d2d" : "cc_over_d2d";
}

/// Keys whose value is a single number and may be swept.
inline bool is_numeric_key(std::string_view key)
{
    static const char *const keys[] = {
        "bandwidth_hz", "carrier_hz", "sinr_threshold_linear", "sinr_threshold_db",
        "pathloss_exponent", "pathloss_constant", "awgn_power_w", "bs_density_per_m2",
        "bs_density_per_km2", "cc_ue_density_per_m2", "cc_ue_density_per_km2",
        "d2d_density_per_m2", "d2d_density_per_km2", "d2d_ues_per_bs", "bs_radius_m",
        "bs_power_w", "d2d_power_w", "cc_power_w", "antenna_height_diff_m", "shadow_sigma_db",
        "seed", "trials", "ppp_extent_m", "forwarding_radius_m", "hop_limit",
        "cc_uplink_distance_m", "cc_downlink_distance_m", "d2d_pair_distance_m"};
    for (const char *k : keys)
        if (key == k)
            return true;
    return false;
}

/// Assigns one key from its textual value. Does not validate cross-field invariants.
inline void set_field(ScenarioConfig &c, std::string_view key, std::string_view value)
{
    using detail::parse_double;
    auto num = [&] { return parse_double(key, value); };

    if (key == "bandwidth_hz") c.bandwidth_hz = num();
    else if (key == "carrier_hz") c.carrier_hz = num();
    else if (key == "sinr_threshold_linear") c.sinr_threshold_linear = num();
    else if (key == "sinr_threshold_db") c.sinr_threshold_linear = db_to_linear(num());
    else if (key == "pathloss_exponent") c.pathloss_exponent = num();
    else if (key == "pathloss_constant") c.pathloss_constant = num();
    else if (key == "awgn_power_w") c.awgn_power_w = num();
    else if (key == "bs_density_per_m2") c.bs_density_per_m2 = num();
    else if (key == "bs_density_per_km2") c.bs_density_per_m2 = num() * 1e-6;
    else if (key == "cc_ue_density_per_m2") c.cc_ue_density_per_m2 = num();
    else if (key == "cc_ue_density_per_km2") c.cc_ue_density_per_m2 = num() * 1e-6;
    else if (key == "d2d_density_per_m2") c.d2d_density_per_m2 = num();
    else if (key == "d2d_density_per_km2") c.d2d_density_per_m2 = num() * 1e-6;
    else if (key == "d2d_ues_per_bs") c.d2d_ues_per_bs = detail::parse_int<int>(key, value);
    else if (key == "bs_radius_m") c.bs_radius_m = num();
    else if (key == "bs_power_w") c.bs_power_w = num();
    else if (key == "d2d_power_w") c.d2d_power_w = num();
    else if (key == "cc_power_w") c.cc_power_w = num();
    else if (key == "antenna_height_diff_m") c.antenna_height_diff_m = num();
    else if (key == "shadow_sigma_db") c.shadow_sigma_db = num();
    else if (key == "topology_mode") {
        if (value == "hex19_wraparound") c.topology_mode = TopologyMode::Hex19Wraparound;
        else if (value == "ppp_field") c.topology_mode = TopologyMode::PppField;
        else detail::bad_enum(key, value);
    }
    else if (key == "fidelity_mode") {
        if (value == "full") c.fidelity_mode = FidelityMode::Full;
        else if (value == "validation") c.fidelity_mode = FidelityMode::Validation;
        else detail::bad_enum(key, value);
    }
    else if (key == "seed") c.seed = detail::parse_int<std::uint64_t>(key, value);
    else if (key == "trials") c.trials = detail::parse_int<int>(key, value);
    else if (key == "ppp_extent_m") c.ppp_extent_m = num();
    else if (key == "forwarding_radius_m") c.forwarding_radius_m = num();
    else if (key == "exclude_parent_bs") c.exclude_parent_bs = detail::parse_bool(key, value);
    else if (key == "all_d2d_active") c.all_d2d_active = detail::parse_bool(key, value);
    else if (key == "hop_limit") c.hop_limit = detail::parse_int<int>(key, value);
    else if (key == "cc_uplink_distance_m") c.cc_uplink_distance_m = num();
    else if (key == "cc_downlink_distance_m") c.cc_downlink_distance_m = num();
    else if (key == "d2d_destination") {
        if (value == "same_cell") c.d2d_destination = D2dDestination::SameCell;
        else if (value == "nearest") c.d2d_destination = D2dDestination::Nearest;
        else if (value == "anywhere") c.d2d_destination = D2dDestination::Anywhere;
        else detail::bad_enum(key, value);
    }
    else if (key == "d2d_pair_distance_m") c.d2d_pair_distance_m = num();
    else if (key == "uplink_power_ratio") {
        if (value == "bs_over_d2d") c.uplink_power_ratio = UplinkPowerRatio::BsOverD2d;
        else if (value == "cc_over_d2d") c.uplink_power_ratio = UplinkPowerRatio::CcOverD2d;
        else detail::bad_enum(key, value);
    }
    else
        throw ConfigError(ConfigError::Kind::UnknownKey, std::string(key),
                          "unknown configuration key '" + std::string(key) + "'");
}

/// Throws ConfigError(Validation) naming the first field that breaks an invariant.
inline void validate(const ScenarioConfig &c)
{
    auto require = [](bool ok, const char *field, const char *rule) {
        if (!ok)
            throw ConfigError(ConfigError::Kind::Validation, field,
                              std::string(field) + " must be " + rule);
    };
    require(c.bandwidth_hz > 0, "bandwidth_hz", "> 0");
    require(c.carrier_hz > 0, "carrier_hz", "> 0");
    require(c.sinr_threshold_linear > 0, "sinr_threshold_linear", "> 0");
    // The interference integrals diverge for alpha <= 2.
    require(c.pathloss_exponent > 2, "pathloss_exponent", "> 2");
    require(c.pathloss_constant > 0, "pathloss_constant", "> 0");
    require(c.awgn_power_w > 0, "awgn_power_w", "> 0");
    require(c.bs_density_per_m2 > 0, "bs_density_per_m2", "> 0");
    require(c.cc_ue_density_per_m2 > 0, "cc_ue_density_per_m2", "> 0");
    require(c.d2d_density_per_m2 > 0, "d2d_density_per_m2", "> 0");
    require(c.d2d_ues_per_bs >= 1, "d2d_ues_per_bs", ">= 1");
    require(c.bs_radius_m > 0, "bs_radius_m", "> 0");
    require(c.bs_power_w > 0, "bs_power_w", "> 0");
    require(c.d2d_power_w > 0, "d2d_power_w", "> 0");
    require(c.cc_power_w > 0, "cc_power_w", "> 0");
    require(c.antenna_height_diff_m >= 0, "antenna_height_diff_m", ">= 0");
    require(c.shadow_sigma_db >= 0, "shadow_sigma_db", ">= 0");
    require(c.trials >= 1, "trials", ">= 1");
    require(c.ppp_extent_m > 0, "ppp_extent_m", "> 0");
    require(c.forwarding_radius_m >= 0, "forwarding_radius_m", ">= 0");
    require(c.hop_limit >= 1, "hop_limit", ">= 1");
    require(c.cc_uplink_distance_m >= 0, "cc_uplink_distance_m", ">= 0");
    require(c.cc_downlink_distance_m >= 0, "cc_downlink_distance_m", ">= 0");
    require(c.d2d_pair_distance_m >= 0, "d2d_pair_distance_m", ">= 0");
}

/**
 * Parses `key = value` lines. `#` starts a comment. Omitted keys keep their
 * defaults; when pathloss_constant is omitted it follows carrier_hz.
 */
inline ScenarioConfig load_config(std::string_view text)
{
    ScenarioConfig c;
    bool explicit_k = false;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        auto end = text.find('\n', pos);
        if (end == std::string_view::npos)
            end = text.size();
        std::string_view line = text.substr(pos, end - pos);
        pos = end + 1;
        ++line_no;

        if (auto hash = line.find('#'); hash != std::string_view::npos)
            line = line.substr(0, hash);
        line = detail::trim(line);
        if (line.empty())
            continue;

        const auto eq = line.find('=');
        if (eq == std::string_view::npos)
            throw ConfigError(ConfigError::Kind::Parse, {},
                              "line " + std::to_string(line_no) + ": expected 'key = value'");
        const auto key = detail::trim(line.substr(0, eq));
        const auto value = detail::trim(line.substr(eq + 1));
        if (key.empty() || value.empty())
            throw ConfigError(ConfigError::Kind::Parse, std::string(key),
                              "line " + std::to_string(line_no) + ": empty key or value");
        set_field(c, key, value);
        if (key == "pathloss_constant")
            explicit_k = true;
    }
    if (!explicit_k)
        c.pathloss_constant = free_space_gain_1m(c.carrier_hz);
    validate(c);
    return c;
}

/// Canonical text form; load_config(to_config_text(c)) == c.
inline std::string to_config_text(const ScenarioConfig &c)
{
    using detail::format_double;
    std::ostringstream os;
    auto kv = [&](const char *k, const std::string &v) { os << k << " = " << v << '\n'; };
    kv("bandwidth_hz", format_double(c.bandwidth_hz));
    kv("carrier_hz", format_double(c.carrier_hz));
    kv("sinr_threshold_linear", format_double(c.sinr_threshold_linear));
    kv("pathloss_exponent", format_double(c.pathloss_exponent));
    kv("pathloss_constant", format_double(c.pathloss_constant));
    kv("awgn_power_w", format_double(c.awgn_power_w));
    kv("bs_density_per_m2", format_double(c.bs_density_per_m2));
    kv("cc_ue_density_per_m2", format_double(c.cc_ue_density_per_m2));
    kv("d2d_density_per_m2", format_double(c.d2d_density_per_m2));
    kv("d2d_ues_per_bs", std::to_string(c.d2d_ues_per_bs));
    kv("bs_radius_m", format_double(c.bs_radius_m));
    kv("bs_power_w", format_double(c.bs_power_w));
    kv("d2d_power_w", format_double(c.d2d_power_w));
    kv("cc_power_w", format_double(c.cc_power_w));
    kv("antenna_height_diff_m", format_double(c.antenna_height_diff_m));
    kv("shadow_sigma_db", format_double(c.shadow_sigma_db));
    kv("topology_mode", to_string(c.topology_mode));
    kv("fidelity_mode", to_string(c.fidelity_mode));
    kv("seed", std::to_string(c.seed));
    kv("trials", std::to_string(c.trials));
    kv("ppp_extent_m", format_double(c.ppp_extent_m));
    kv("forwarding_radius_m", format_double(c.forwarding_radius_m));
    kv("exclude_parent_bs", c.exclude_parent_bs ? "true" : "false");
    kv("all_d2d_active", c.all_d2d_active ? "true" : "false");
    kv("hop_limit", std::to_string(c.hop_limit));
    kv("cc_uplink_distance_m", format_double(c.cc_uplink_distance_m));
    kv("cc_downlink_distance_m", format_double(c.cc_downlink_distance_m));
    kv("d2d_destination", to_string(c.d2d_destination));
    kv("d2d_pair_distance_m", format_double(c.d2d_pair_distance_m));
    kv("uplink_power_ratio", to_string(c.uplink_power_ratio));
    return os.str();
}

/// 64-bit FNV-1a over the canonical text, as 16 hex digits.
inline std::string digest_hex(std::string_view bytes)
{
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : bytes) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    std::ostringstream os;
    os << std::hex << std::setw(16) << std::setfill('0') << h;
    return os.str();
}

inline std::string config_hash(const ScenarioConfig &c) { return digest_hex(to_config_text(c)); }

} // namespace d2dsim

#endif // D2DSIM_CONFIG_HPP_
