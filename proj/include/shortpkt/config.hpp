// SPDX-License-Identifier: Apache-2.0
//
// Run configuration: a flat `key = value` text file, one key per line, `#`
// starts a comment. Unknown or repeated keys are errors. Every key takes part
// in the canonical form and therefore in config_hash.

#pragma once

#include <charconv>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "shortpkt/common.hpp"
#include "shortpkt/detector.hpp"
#include "shortpkt/metrics.hpp"
#include "shortpkt/receiver.hpp"

namespace shortpkt {

#ifdef SHORTPKT_VERSION
inline constexpr const char* kVersion = SHORTPKT_VERSION;
#else
inline constexpr const char* kVersion = "0.0.0";
#endif

struct RunConfig {
    int n = 64;
    int k = 64;
    int n_taps = kNumTaps;
    double beta = 0.3;
    StoPulse sto_pulse = StoPulse::raised_cosine;
    std::uint64_t seed = 1;
    std::vector<double> snr_list = {6, 8, 10, 12, 14, 16, 18};
    std::uint64_t trials = 10000;
    std::uint64_t none_trials = 10000;
    std::uint64_t max_block_errors = 200;

    ReceiverConfig receiver;
    /// 0 selects the per-n table.
    int preamble_length = 0;
    int preamble_root = 7;

    DetectionStatistic statistic = DetectionStatistic::multipath_projection;
    ChannelEstimator estimator = ChannelEstimator::least_squares;
    double target_far = 1e-3;
    std::uint64_t calibration_trials = 100000;
    double calibration_snr_lo = 0.0;
    double calibration_snr_hi = 20.0;

    std::vector<int> length_list = {40, 48, 56, 64, 96};
    double length_snr = 18.0;
    int papr_oversample = 16;
    std::uint64_t papr_frames = 10000;
    std::uint64_t golden_count = 100;
    std::string output_path;

    ChannelParams channel() const
    {
        ChannelParams p;
        p.n = n;
        p.n_taps = n_taps;
        p.beta = beta;
        p.pulse = sto_pulse;
        return p;
    }

    PreambleSpec preamble() const
    {
        return {preamble_length > 0 ? preamble_length : preamble_length_for(n), preamble_root};
    }

    DetectorConfig detector() const { return {statistic, estimator, 0.0}; }

    CalibrationOptions calibration() const
    {
        return {target_far, calibration_trials, calibration_snr_lo, calibration_snr_hi, seed};
    }

    void validate() const
    {
        channel().validate();
        receiver.validate();
        require(k > 0, "k must be positive");
        require(!snr_list.empty(), "snr_list must not be empty");
        require(trials > 0, "trials must be positive");
        require(preamble_length >= 0 && preamble_length < n, "preamble_length must lie in [0, n)");
        require(target_far > 0.0 && target_far <= 1.0, "target_far must lie in (0, 1]");
        require(calibration_snr_lo <= calibration_snr_hi, "calibration SNR range is empty");
        require(!length_list.empty(), "length_list must not be empty");
        require(papr_oversample >= 2, "papr_oversample must be at least 2");
    }
};

namespace detail {

inline std::string trim(std::string_view s)
{
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos)
        return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

inline std::string fmt_double(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline double parse_double(const std::string& key, const std::string& v)
{
    std::size_t used = 0;
    double out = 0.0;
    try {
        out = std::stod(v, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used == 0 || used != v.size())
        throw ConfigError("key '" + key + "': not a number: '" + v + "'");
    return out;
}

template <typename Int>
Int parse_int(const std::string& key, const std::string& v)
{
    Int out{};
    const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc{} || p != v.data() + v.size())
        throw ConfigError("key '" + key + "': not an integer: '" + v + "'");
    return out;
}

inline std::vector<std::string> split_list(const std::string& v)
{
    std::vector<std::string> out;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ','))
        out.push_back(trim(item));
    return out;
}

template <typename Enum>
Enum parse_enum(const std::string& key, const std::string& v,
                std::initializer_list<std::pair<const char*, Enum>> names)
{
    for (const auto& [name, e] : names)
        if (v == name)
            return e;
    std::string allowed;
    for (const auto& [name, e] : names)
        allowed += (allowed.empty() ? "" : ", ") + std::string(name);
    throw ConfigError("key '" + key + "': unknown value '" + v + "' (expected one of: " + allowed + ")");
}

template <typename Enum>
std::string enum_name(Enum e, std::initializer_list<std::pair<const char*, Enum>> names)
{
    for (const auto& [name, v] : names)
        if (v == e)
            return name;
    return "?";
}

struct ConfigField {
    const char* key;
    std::function<void(RunConfig&, const std::string&)> parse;
    std::function<std::string(const RunConfig&)> format;
};

// clang-format off
inline const std::initializer_list<std::pair<const char*, StoPulse>> kPulseNames = {
    {"raised_cosine", StoPulse::raised_cosine}, {"printed", StoPulse::printed}};
inline const std::initializer_list<std::pair<const char*, DampingWeight>> kDampingNames = {
    {"new", DampingWeight::new_message}, {"old", DampingWeight::old_message}};
inline const std::initializer_list<std::pair<const char*, CsiMode>> kCsiNames = {
    {"estimated", CsiMode::estimated}, {"genie", CsiMode::genie}};
inline const std::initializer_list<std::pair<const char*, NoiseVarMode>> kNoiseVarNames = {
    {"ls_residual", NoiseVarMode::ls_residual}, {"nominal", NoiseVarMode::nominal}};
inline const std::initializer_list<std::pair<const char*, BcjrMode>> kBcjrNames = {
    {"max_log", BcjrMode::max_log}, {"exact", BcjrMode::exact}};
inline const std::initializer_list<std::pair<const char*, DetectionStatistic>> kStatisticNames = {
    {"projection", DetectionStatistic::multipath_projection},
    {"correlation", DetectionStatistic::normalized_correlation}};
inline const std::initializer_list<std::pair<const char*, ChannelEstimator>> kEstimatorNames = {
    {"least_squares", ChannelEstimator::least_squares}, {"matched_filter", ChannelEstimator::matched_filter}};
// clang-format on

#define SHORTPKT_INT_FIELD(name, member, type)                                                   \
    ConfigField{name, [](RunConfig& c, const std::string& v) { c.member = parse_int<type>(name, v); }, \
                [](const RunConfig& c) { return std::to_string(c.member); }}
#define SHORTPKT_DOUBLE_FIELD(name, member)                                                        \
    ConfigField{name, [](RunConfig& c, const std::string& v) { c.member = parse_double(name, v); }, \
                [](const RunConfig& c) { return fmt_double(c.member); }}
#define SHORTPKT_ENUM_FIELD(name, member, table)                                                         \
    ConfigField{name, [](RunConfig& c, const std::string& v) { c.member = parse_enum(name, v, table); }, \
                [](const RunConfig& c) { return enum_name(c.member, table); }}

inline const std::vector<ConfigField>& config_fields()
{
    static const std::vector<ConfigField> fields = {
        SHORTPKT_INT_FIELD("n", n, int),
        SHORTPKT_INT_FIELD("k", k, int),
        SHORTPKT_INT_FIELD("n_taps", n_taps, int),
        SHORTPKT_DOUBLE_FIELD("beta", beta),
        SHORTPKT_ENUM_FIELD("sto_pulse", sto_pulse, kPulseNames),
        SHORTPKT_INT_FIELD("seed", seed, std::uint64_t),
        ConfigField{"snr_list",
                    [](RunConfig& c, const std::string& v) {
                        c.snr_list.clear();
                        for (const auto& s : split_list(v))
                            c.snr_list.push_back(parse_double("snr_list", s));
                    },
                    [](const RunConfig& c) {
                        std::string s;
                        for (double x : c.snr_list)
                            s += (s.empty() ? "" : ",") + fmt_double(x);
                        return s;
                    }},
        SHORTPKT_INT_FIELD("trials", trials, std::uint64_t),
        SHORTPKT_INT_FIELD("none_trials", none_trials, std::uint64_t),
        SHORTPKT_INT_FIELD("max_block_errors", max_block_errors, std::uint64_t),
        SHORTPKT_INT_FIELD("l_iedd", receiver.l_iedd, int),
        SHORTPKT_INT_FIELD("l_bp", receiver.l_bp, int),
        SHORTPKT_DOUBLE_FIELD("damping", receiver.damping),
        SHORTPKT_ENUM_FIELD("damping_weight", receiver.damping_weight, kDampingNames),
        SHORTPKT_DOUBLE_FIELD("apriori_weight", receiver.apriori_weight),
        SHORTPKT_ENUM_FIELD("csi_mode", receiver.csi_mode, kCsiNames),
        SHORTPKT_ENUM_FIELD("noise_var_mode", receiver.noise_var_mode, kNoiseVarNames),
        SHORTPKT_DOUBLE_FIELD("nominal_noise_var", receiver.nominal_noise_var),
        SHORTPKT_ENUM_FIELD("bcjr_mode", receiver.bcjr_mode, kBcjrNames),
        SHORTPKT_INT_FIELD("preamble_length", preamble_length, int),
        SHORTPKT_INT_FIELD("preamble_root", preamble_root, int),
        SHORTPKT_ENUM_FIELD("detector_statistic", statistic, kStatisticNames),
        SHORTPKT_ENUM_FIELD("channel_estimator", estimator, kEstimatorNames),
        SHORTPKT_DOUBLE_FIELD("target_far", target_far),
        SHORTPKT_INT_FIELD("calibration_trials", calibration_trials, std::uint64_t),
        SHORTPKT_DOUBLE_FIELD("calibration_snr_lo", calibration_snr_lo),
        SHORTPKT_DOUBLE_FIELD("calibration_snr_hi", calibration_snr_hi),
        ConfigField{"length_list",
                    [](RunConfig& c, const std::string& v) {
                        c.length_list.clear();
                        for (const auto& s : split_list(v))
                            c.length_list.push_back(parse_int<int>("length_list", s));
                    },
                    [](const RunConfig& c) {
                        std::string s;
                        for (int x : c.length_list)
                            s += (s.empty() ? "" : ",") + std::to_string(x);
                        return s;
                    }},
        SHORTPKT_DOUBLE_FIELD("length_snr", length_snr),
        SHORTPKT_INT_FIELD("papr_oversample", papr_oversample, int),
        SHORTPKT_INT_FIELD("papr_frames", papr_frames, std::uint64_t),
        SHORTPKT_INT_FIELD("golden_count", golden_count, std::uint64_t),
        ConfigField{"output_path", [](RunConfig& c, const std::string& v) { c.output_path = v; },
                    [](const RunConfig& c) { return c.output_path; }},
    };
    return fields;
}

#undef SHORTPKT_INT_FIELD
#undef SHORTPKT_DOUBLE_FIELD
#undef SHORTPKT_ENUM_FIELD

}  // namespace detail

/// Sets one key; throws ConfigError for unknown keys or malformed values.
inline void set_config_value(RunConfig& c, const std::string& key, const std::string& value)
{
    for (const auto& f : detail::config_fields())
        if (key == f.key) {
            f.parse(c, value);
            return;
        }
    throw ConfigError("unknown config key '" + key + "'");
}

/// Applies `key = value` lines on top of `base`.
inline RunConfig parse_config(std::istream& in, RunConfig base = {})
{
    std::vector<std::string> seen;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        const std::string body = detail::trim(std::string_view(line).substr(0, hash));
        if (body.empty())
            continue;
        const auto eq = body.find('=');
        if (eq == std::string::npos)
            throw ConfigError("line " + std::to_string(lineno) + ": expected 'key = value'");
        const std::string key = detail::trim(std::string_view(body).substr(0, eq));
        const std::string value = detail::trim(std::string_view(body).substr(eq + 1));
        if (std::find(seen.begin(), seen.end(), key) != seen.end())
            throw ConfigError("line " + std::to_string(lineno) + ": key '" + key + "' given twice");
        seen.push_back(key);
        try {
            set_config_value(base, key, value);
        } catch (const ConfigError& e) {
            throw ConfigError("line " + std::to_string(lineno) + ": " + e.what());
        }
    }
    return base;
}

inline RunConfig load_config(const std::string& path, RunConfig base = {})
{
    std::ifstream f(path);
    if (!f)
        throw ConfigError("cannot read config file: " + path);
    return parse_config(f, std::move(base));
}

/// One `key=value` line per field in a fixed order; parse_config reads it back.
inline std::string canonical_config(const RunConfig& c)
{
    std::string out;
    for (const auto& f : detail::config_fields())
        out += std::string(f.key) + "=" + f.format(c) + "\n";
    return out;
}

inline std::uint64_t fnv1a64(std::string_view s)
{
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : s) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    return h;
}

inline std::string config_hash(const RunConfig& c)
{
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a64(canonical_config(c))));
    return buf;
}

}  // namespace shortpkt
