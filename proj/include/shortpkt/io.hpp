// SPDX-License-Identifier: Apache-2.0
//
// File formats: metric CSV / JSON-lines, PAPR curves, golden channel vectors,
// and imported message frames ({bits, symbols: [[re, im], ...]} per line).

#pragma once

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "shortpkt/baseline_tx.hpp"
#include "shortpkt/chansim.hpp"
#include "shortpkt/metrics.hpp"
#include "shortpkt/papr.hpp"
#include "shortpkt/random.hpp"

namespace shortpkt {

inline constexpr std::uint64_t kGoldenStream = 0x676f6c64;

/// Provenance written into every output file.
struct OutputStamp {
    std::string config_hash;
    std::string version;
};

namespace detail {

inline std::ofstream open_out(const std::string& path)
{
    std::ofstream f(path, std::ios::binary);
    if (!f)
        throw std::runtime_error("cannot open output file: " + path);
    return f;
}

inline void close_out(std::ofstream& f, const std::string& path)
{
    f.flush();
    if (!f)
        throw std::runtime_error("write failed: " + path);
}

inline std::string num(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

inline std::string join(const std::vector<double>& v)
{
    std::string s;
    for (double x : v)
        s += (s.empty() ? "" : ";") + num(x);
    return s;
}

inline nlohmann::ordered_json complex_array(std::span<const cplx> v)
{
    auto a = nlohmann::ordered_json::array();
    for (const auto& c : v)
        a.push_back({c.real(), c.imag()});
    return a;
}

inline CVec read_complex_array(const nlohmann::json& a, const std::string& what)
{
    if (!a.is_array())
        throw std::runtime_error(what + " must be an array of [re, im] pairs");
    CVec out;
    out.reserve(a.size());
    for (const auto& p : a) {
        if (!p.is_array() || p.size() != 2 || !p[0].is_number() || !p[1].is_number())
            throw std::runtime_error(what + " must be an array of [re, im] pairs");
        const cplx c{p[0].get<double>(), p[1].get<double>()};
        if (!std::isfinite(c.real()) || !std::isfinite(c.imag()))
            throw std::runtime_error(what + " contains a non-finite value");
        out.push_back(c);
    }
    return out;
}

}  // namespace detail

/// MetricRecord columns first, then the extra columns.
inline const char* kMetricCsvHeader =
    "snr_db,trials,misdetections,sync_errors,false_alarms,none_trials,bit_errors,bits,block_errors,blocks,"
    "der,ber,bler,config_hash,n,k,system,csi_mode,l_iedd,far,der_lo,der_hi,ber_lo,ber_hi,bler_lo,bler_hi,"
    "far_lo,far_hi,ber_by_round,bler_by_round";

inline std::string metric_csv_row(const MetricRecord& r)
{
    using detail::num;
    std::ostringstream s;
    s << num(r.snr_db) << ',' << r.trials << ',' << r.misdetections << ',' << r.sync_errors << ','
      << r.false_alarms << ',' << r.none_trials << ',' << r.bit_errors << ',' << r.bits << ','
      << r.block_errors << ',' << r.blocks << ',' << num(r.der) << ',' << num(r.ber) << ','
      << num(r.bler) << ',' << r.config_hash << ',' << r.n << ',' << r.k << ',' << r.system << ','
      << r.csi_mode << ',' << r.l_iedd << ',' << num(r.far) << ',' << num(r.der_ci.lo) << ','
      << num(r.der_ci.hi) << ',' << num(r.ber_ci.lo) << ',' << num(r.ber_ci.hi) << ','
      << num(r.bler_ci.lo) << ',' << num(r.bler_ci.hi) << ',' << num(r.far_ci.lo) << ','
      << num(r.far_ci.hi) << ',' << detail::join(r.ber_by_round) << ',' << detail::join(r.bler_by_round);
    return s.str();
}

inline nlohmann::ordered_json metric_json(const MetricRecord& r)
{
    nlohmann::ordered_json j;
    j["snr_db"] = r.snr_db;
    j["trials"] = r.trials;
    j["misdetections"] = r.misdetections;
    j["sync_errors"] = r.sync_errors;
    j["false_alarms"] = r.false_alarms;
    j["none_trials"] = r.none_trials;
    j["bit_errors"] = r.bit_errors;
    j["bits"] = r.bits;
    j["block_errors"] = r.block_errors;
    j["blocks"] = r.blocks;
    j["der"] = r.der;
    j["ber"] = r.ber;
    j["bler"] = r.bler;
    j["config_hash"] = r.config_hash;
    j["n"] = r.n;
    j["k"] = r.k;
    j["system"] = r.system;
    j["csi_mode"] = r.csi_mode;
    j["l_iedd"] = r.l_iedd;
    j["far"] = r.far;
    j["der_ci"] = {r.der_ci.lo, r.der_ci.hi};
    j["ber_ci"] = {r.ber_ci.lo, r.ber_ci.hi};
    j["bler_ci"] = {r.bler_ci.lo, r.bler_ci.hi};
    j["far_ci"] = {r.far_ci.lo, r.far_ci.hi};
    j["ber_by_round"] = r.ber_by_round;
    j["bler_by_round"] = r.bler_by_round;
    return j;
}

inline void write_metrics_csv(const std::string& path, const std::vector<MetricRecord>& records,
                              const OutputStamp& stamp)
{
    auto f = detail::open_out(path);
    f << "# shortpkt " << stamp.version << "\n# config_hash=" << stamp.config_hash << '\n'
      << kMetricCsvHeader << '\n';
    for (const auto& r : records)
        f << metric_csv_row(r) << '\n';
    detail::close_out(f, path);
}

/// One JSON object per record; the version travels in every line.
inline void write_metrics_jsonl(const std::string& path, const std::vector<MetricRecord>& records,
                                const OutputStamp& stamp)
{
    auto f = detail::open_out(path);
    for (const auto& r : records) {
        auto j = metric_json(r);
        j["config_hash"] = stamp.config_hash;
        j["version"] = stamp.version;
        f << j.dump() << '\n';
    }
    detail::close_out(f, path);
}

inline void write_papr_csv(const std::string& path, const PaprCurve& c, const OutputStamp& stamp)
{
    auto f = detail::open_out(path);
    f << "# shortpkt " << stamp.version << "\n# config_hash=" << stamp.config_hash
      << "\n# oversample=" << c.oversample << " frames=" << c.frames << "\npapr_db,ccdf\n";
    for (std::size_t i = 0; i < c.papr_db.size(); ++i)
        f << detail::num(c.papr_db[i]) << ',' << detail::num(c.ccdf[i]) << '\n';
    detail::close_out(f, path);
}

// ---------------------------------------------------------------------------
// Golden channel vectors

struct GoldenRecord {
    std::uint64_t seed = 0;
    std::vector<double> taps;
    int tau_off = 0;
    double tau_sto = 0.0;
    double sigma2 = 0.0;
    double beta = 0.0;
    CVec x;
    CVec y;
    CVec noise;  // y minus the noiseless channel output
};

/// Record i: a random baseline frame through a fresh channel draw at an SNR uniform
/// in [0, 20] dB. Everything derives from derive_seed(seed, golden stream, i).
inline GoldenRecord make_golden_record(const BaselineTransmitter& tx, const ChannelParams& chan,
                                       std::uint64_t seed, std::uint64_t index)
{
    GoldenRecord g;
    g.seed = derive_seed(seed, kGoldenStream, index);
    Rng rng(g.seed);
    const Bits u = rng.bits(static_cast<std::size_t>(tx.code().k()));
    g.x = tx.build(u).symbols;
    const double snr = 20.0 * rng.uniform();
    const ChannelRealization real = draw_realization(rng, chan, snr_to_noise_var(snr), g.seed);
    g.taps = real.taps;
    g.tau_off = real.tau_off;
    g.tau_sto = real.tau_sto;
    g.sigma2 = real.sigma2;
    g.beta = chan.beta;
    const CVec clean = propagate_noiseless(g.x, real, chan);
    g.y = clean;
    add_noise(g.y, real.sigma2, rng);
    g.noise.resize(g.y.size());
    for (std::size_t i = 0; i < g.y.size(); ++i)
        g.noise[i] = g.y[i] - clean[i];
    return g;
}

inline nlohmann::ordered_json golden_json(const GoldenRecord& g, const OutputStamp& stamp)
{
    nlohmann::ordered_json j;
    j["seed"] = g.seed;
    j["taps"] = g.taps;
    j["tau_off"] = g.tau_off;
    j["tau_sto"] = g.tau_sto;
    j["sigma2"] = g.sigma2;
    j["x"] = detail::complex_array(g.x);
    j["y"] = detail::complex_array(g.y);
    j["noise"] = detail::complex_array(g.noise);
    j["beta"] = g.beta;
    j["config_hash"] = stamp.config_hash;
    j["version"] = stamp.version;
    return j;
}

inline void export_golden(const std::string& path, std::uint64_t count, std::uint64_t seed,
                          const BaselineTransmitter& tx, const ChannelParams& chan, const OutputStamp& stamp)
{
    auto f = detail::open_out(path);
    for (std::uint64_t i = 0; i < count; ++i)
        f << golden_json(make_golden_record(tx, chan, seed, i), stamp).dump() << '\n';
    detail::close_out(f, path);
}

inline std::vector<GoldenRecord> read_golden(const std::string& path)
{
    std::ifstream f(path);
    if (!f)
        throw std::runtime_error("cannot read golden file: " + path);
    std::vector<GoldenRecord> out;
    std::string line;
    while (std::getline(f, line)) {
        if (line.empty())
            continue;
        const auto j = nlohmann::json::parse(line);
        GoldenRecord g;
        g.seed = j.at("seed").get<std::uint64_t>();
        g.taps = j.at("taps").get<std::vector<double>>();
        g.tau_off = j.at("tau_off").get<int>();
        g.tau_sto = j.at("tau_sto").get<double>();
        g.sigma2 = j.at("sigma2").get<double>();
        g.beta = j.value("beta", 0.3);
        g.x = detail::read_complex_array(j.at("x"), "x");
        g.y = detail::read_complex_array(j.at("y"), "y");
        if (j.contains("noise"))
            g.noise = detail::read_complex_array(j.at("noise"), "noise");
        out.push_back(std::move(g));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Message frames exchanged with the learned transceiver

inline std::vector<Frame> parse_messages(std::istream& in, const std::string& source = "<stream>")
{
    std::vector<Frame> out;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos)
            continue;
        const std::string where = source + ":" + std::to_string(lineno) + ": ";
        try {
            const auto j = nlohmann::json::parse(line);
            Frame fr;
            fr.kind = FrameKind::phyae;
            for (const auto& b : j.at("bits")) {
                const int v = b.is_boolean() ? static_cast<int>(b.get<bool>()) : b.get<int>();
                if (v != 0 && v != 1)
                    throw std::runtime_error("bits must be 0 or 1");
                fr.info_bits.push_back(static_cast<std::uint8_t>(v));
            }
            fr.symbols = detail::read_complex_array(j.at("symbols"), "symbols");
            if (fr.symbols.empty())
                throw std::runtime_error("empty symbol list");
            if (!out.empty() && (fr.symbols.size() != out.front().symbols.size() ||
                                 fr.info_bits.size() != out.front().info_bits.size()))
                throw std::runtime_error("frame shape differs from the first frame");
            out.push_back(std::move(fr));
        } catch (const std::exception& e) {
            throw std::runtime_error(where + e.what());
        }
    }
    return out;
}

inline std::vector<Frame> import_messages(const std::string& path)
{
    std::ifstream f(path);
    if (!f)
        throw std::runtime_error("cannot read message file: " + path);
    return parse_messages(f, path);
}

inline void export_messages(const std::string& path, std::span<const Frame> frames)
{
    auto f = detail::open_out(path);
    for (const auto& fr : frames) {
        nlohmann::ordered_json j;
        j["bits"] = std::vector<int>(fr.info_bits.begin(), fr.info_bits.end());
        j["symbols"] = detail::complex_array(fr.symbols);
        f << j.dump() << '\n';
    }
    detail::close_out(f, path);
}

/// Mean of the imported frames; a stand-in preamble for correlating against
/// learned frames whose pilot structure is superimposed on the data.
inline CVec mean_frame(std::span<const Frame> frames)
{
    require(!frames.empty(), "no frames");
    CVec m(frames.front().symbols.size(), cplx{});
    for (const auto& f : frames)
        for (std::size_t i = 0; i < m.size(); ++i)
            m[i] += f.symbols[i];
    for (auto& v : m)
        v /= static_cast<double>(frames.size());
    return m;
}

}  // namespace shortpkt
