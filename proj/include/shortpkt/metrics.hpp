// SPDX-License-Identifier: Apache-2.0
//
// Monte-Carlo harness: detection error rate, BER/BLER after detection, and the
// variable-length sweep. Trial i of every SNR point draws from the same seed, so
// points (and CSI modes) are paired.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <exception>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include "shortpkt/baseline_tx.hpp"
#include "shortpkt/chansim.hpp"
#include "shortpkt/detector.hpp"
#include "shortpkt/random.hpp"
#include "shortpkt/receiver.hpp"

namespace shortpkt {

inline constexpr std::uint64_t kMessageStream = 0x6d657373;
inline constexpr std::uint64_t kNoneStream = 0x6e6f6e65;

/// Two-sided 95% normal quantile used for reported intervals.
inline constexpr double kZ95TwoSided = 1.959963984540054;

struct ErrorCounts {
    std::uint64_t trials = 0;
    std::uint64_t misdetections = 0;
    std::uint64_t sync_errors = 0;
    std::uint64_t false_alarms = 0;
    std::uint64_t none_trials = 0;
    std::uint64_t bit_errors = 0;
    std::uint64_t bits = 0;
    std::uint64_t block_errors = 0;
    std::uint64_t blocks = 0;
    /// Errors after each IEDD round, over the same detected frames.
    std::vector<std::uint64_t> round_bit_errors;
    std::vector<std::uint64_t> round_block_errors;

    ErrorCounts& operator+=(const ErrorCounts& o)
    {
        trials += o.trials;
        misdetections += o.misdetections;
        sync_errors += o.sync_errors;
        false_alarms += o.false_alarms;
        none_trials += o.none_trials;
        bit_errors += o.bit_errors;
        bits += o.bits;
        block_errors += o.block_errors;
        blocks += o.blocks;
        add(round_bit_errors, o.round_bit_errors);
        add(round_block_errors, o.round_block_errors);
        return *this;
    }

private:
    static void add(std::vector<std::uint64_t>& a, const std::vector<std::uint64_t>& b)
    {
        if (a.size() < b.size())
            a.resize(b.size(), 0);
        for (std::size_t i = 0; i < b.size(); ++i)
            a[i] += b[i];
    }
};

struct Interval {
    double lo = 0.0;
    double hi = 1.0;
};

inline Interval wilson_interval(std::uint64_t k, std::uint64_t n)
{
    if (n == 0)
        return {0.0, 1.0};
    return {wilson_lower(k, n, kZ95TwoSided), wilson_upper(k, n, kZ95TwoSided)};
}

struct MetricRecord {
    double snr_db = 0.0;
    std::uint64_t trials = 0;
    std::uint64_t misdetections = 0;
    std::uint64_t sync_errors = 0;
    std::uint64_t false_alarms = 0;
    std::uint64_t none_trials = 0;
    std::uint64_t bit_errors = 0;
    std::uint64_t bits = 0;
    std::uint64_t block_errors = 0;
    std::uint64_t blocks = 0;
    double der = 0.0;
    double ber = 0.0;
    double bler = 0.0;
    std::string config_hash;

    int n = 0;
    int k = 0;
    std::string system = "baseline";
    std::string csi_mode = "estimated";
    int l_iedd = 0;  // 0 for detection-only records
    double far = 0.0;
    Interval der_ci, ber_ci, bler_ci, far_ci;
    std::vector<double> ber_by_round;
    std::vector<double> bler_by_round;

    static MetricRecord from_counts(double snr_db, const ErrorCounts& c)
    {
        MetricRecord r;
        r.snr_db = snr_db;
        r.trials = c.trials;
        r.misdetections = c.misdetections;
        r.sync_errors = c.sync_errors;
        r.false_alarms = c.false_alarms;
        r.none_trials = c.none_trials;
        r.bit_errors = c.bit_errors;
        r.bits = c.bits;
        r.block_errors = c.block_errors;
        r.blocks = c.blocks;
        auto rate = [](std::uint64_t a, std::uint64_t b) { return b ? static_cast<double>(a) / b : 0.0; };
        r.der = rate(c.misdetections + c.sync_errors, c.trials);
        r.ber = rate(c.bit_errors, c.bits);
        r.bler = rate(c.block_errors, c.blocks);
        r.far = rate(c.false_alarms, c.none_trials);
        r.der_ci = wilson_interval(c.misdetections + c.sync_errors, c.trials);
        r.ber_ci = wilson_interval(c.bit_errors, c.bits);
        r.bler_ci = wilson_interval(c.block_errors, c.blocks);
        r.far_ci = wilson_interval(c.false_alarms, c.none_trials);
        const std::uint64_t bits_per_block = c.blocks ? c.bits / c.blocks : 0;
        for (std::size_t i = 0; i < c.round_bit_errors.size(); ++i) {
            r.ber_by_round.push_back(rate(c.round_bit_errors[i], c.blocks * bits_per_block));
            r.bler_by_round.push_back(rate(c.round_block_errors[i], c.blocks));
        }
        return r;
    }
};

/// Everything fixed for one frame length: channel, transmitter, calibrated detector, receiver.
struct LinkSetup {
    ChannelParams chan;
    BaselineTransmitter tx;
    PreambleDetector det;
    ReceiverConfig rx;
};

struct SweepOptions {
    std::uint64_t seed = 1;
    std::uint64_t trials = 10000;
    std::uint64_t none_trials = 0;
    /// Stop a point once every CSI mode has this many block errors; 0 disables.
    std::uint64_t max_block_errors = 200;
    /// The stopping rule is checked at multiples of this many trials, so results
    /// do not depend on the worker count.
    std::uint64_t chunk = 500;
    int workers = 1;
    std::string config_hash;
    std::function<void(const MetricRecord&)> on_point;
};

namespace detail {

/// Runs body(worker, index) for index in [begin, end) on `workers` threads.
/// Indices are dealt round-robin; each worker touches only its own state.
template <typename Body>
void parallel_for(std::uint64_t begin, std::uint64_t end, int workers, Body&& body)
{
    workers = std::max(1, workers);
    if (workers == 1 || end - begin < 2) {
        for (std::uint64_t i = begin; i < end; ++i)
            body(0, i);
        return;
    }
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
            try {
                for (std::uint64_t i = begin + static_cast<std::uint64_t>(w); i < end;
                     i += static_cast<std::uint64_t>(workers))
                    body(w, i);
            } catch (...) {
                errors[static_cast<std::size_t>(w)] = std::current_exception();
            }
        });
    }
    for (auto& t : pool)
        t.join();
    for (auto& e : errors)
        if (e)
            std::rethrow_exception(e);
}

inline std::uint64_t count_bit_errors(std::span<const std::uint8_t> a, std::span<const std::uint8_t> b)
{
    std::uint64_t e = 0;
    for (std::size_t i = 0; i < a.size(); ++i)
        e += a[i] != b[i];
    return e;
}

inline void check_options(const SweepOptions& o, std::span<const double> snr_list)
{
    require(!snr_list.empty(), "SNR list must not be empty");
    require(o.trials > 0, "trials must be positive");
    require(o.chunk > 0, "chunk must be positive");
    require(o.workers >= 1, "workers must be at least 1");
}

/// Message window of trial `index`: same bits, taps and offsets at every SNR.
inline RxWindow message_window(const LinkSetup& s, std::span<const cplx> symbols_override, Bits* u_out,
                               std::uint64_t seed, std::uint64_t index, double sigma2)
{
    Rng rng(derive_seed(seed, kMessageStream, index));
    Bits u = rng.bits(static_cast<std::size_t>(s.tx.code().k()));
    CVec x;
    if (symbols_override.empty())
        x = s.tx.build(u).symbols;
    const ChannelRealization real = draw_realization(rng, s.chan, sigma2, index);
    RxWindow w = propagate(symbols_override.empty() ? std::span<const cplx>(x) : symbols_override, real, s.chan, rng);
    if (u_out)
        *u_out = std::move(u);
    return w;
}

/// None-window trials use a separate stream so adding them never shifts message draws.
inline void count_none_windows(const PreambleDetector& det, const SweepOptions& o, double sigma2, int n,
                               std::vector<ErrorCounts>& acc)
{
    parallel_for(0, o.none_trials, o.workers, [&](int w, std::uint64_t i) {
        Rng rng(derive_seed(o.seed, kNoneStream, i));
        const RxWindow win = none_window(sigma2, n, rng);
        acc[static_cast<std::size_t>(w)].none_trials += 1;
        acc[static_cast<std::size_t>(w)].false_alarms += det.detect(win).detected() ? 1 : 0;
    });
}

inline bool sync_ok(const DetectionOutcome& d, int tau_off)
{
    return std::abs(*d.tau_hat - tau_off) <= kChannelMemory;
}

inline MetricRecord finish(double snr, const ErrorCounts& c, const SweepOptions& o, int n, int k,
                           const std::string& system, const std::string& csi, int rounds)
{
    MetricRecord r = MetricRecord::from_counts(snr, c);
    r.config_hash = o.config_hash;
    r.n = n;
    r.k = k;
    r.system = system;
    r.csi_mode = csi;
    r.l_iedd = rounds;
    if (o.on_point)
        o.on_point(r);
    return r;
}

}  // namespace detail

inline std::string to_string(CsiMode m) { return m == CsiMode::genie ? "genie" : "estimated"; }

/// Detection-only sweep of the baseline frame: misses and sync errors on message
/// windows, false alarms on none-windows at the same noise level.
inline std::vector<MetricRecord> der_sweep(const LinkSetup& s, std::span<const double> snr_list,
                                           const SweepOptions& o)
{
    detail::check_options(o, snr_list);
    std::vector<MetricRecord> out;
    for (double snr : snr_list) {
        const double sigma2 = snr_to_noise_var(snr);
        std::vector<ErrorCounts> acc(static_cast<std::size_t>(o.workers));
        detail::parallel_for(0, o.trials, o.workers, [&](int w, std::uint64_t i) {
            const RxWindow win = detail::message_window(s, {}, nullptr, o.seed, i, sigma2);
            const DetectionOutcome d = s.det.detect(win);
            ErrorCounts& c = acc[static_cast<std::size_t>(w)];
            c.trials += 1;
            if (!d.detected())
                c.misdetections += 1;
            else if (!detail::sync_ok(d, *win.truth->tau_off))
                c.sync_errors += 1;
        });
        detail::count_none_windows(s.det, o, sigma2, s.chan.n, acc);
        ErrorCounts total;
        for (const auto& c : acc)
            total += c;
        out.push_back(detail::finish(snr, total, o, s.chan.n, s.tx.code().k(), "baseline", "estimated", 0));
    }
    return out;
}

/// Detection-only sweep over externally supplied frames (trial i sends frame i mod count).
/// The detector's reference is whatever the caller built it with.
inline std::vector<MetricRecord> der_sweep_frames(const LinkSetup& s, std::span<const Frame> frames,
                                                  std::span<const double> snr_list, const SweepOptions& o)
{
    detail::check_options(o, snr_list);
    require(!frames.empty(), "no frames to sweep");
    for (const auto& f : frames)
        require(static_cast<int>(f.symbols.size()) == s.chan.n, "imported frame length does not match n");
    std::vector<MetricRecord> out;
    for (double snr : snr_list) {
        const double sigma2 = snr_to_noise_var(snr);
        std::vector<ErrorCounts> acc(static_cast<std::size_t>(o.workers));
        detail::parallel_for(0, o.trials, o.workers, [&](int w, std::uint64_t i) {
            const Frame& f = frames[i % frames.size()];
            const RxWindow win = detail::message_window(s, f.symbols, nullptr, o.seed, i, sigma2);
            const DetectionOutcome d = s.det.detect(win);
            ErrorCounts& c = acc[static_cast<std::size_t>(w)];
            c.trials += 1;
            if (!d.detected())
                c.misdetections += 1;
            else if (!detail::sync_ok(d, *win.truth->tau_off))
                c.sync_errors += 1;
        });
        detail::count_none_windows(s.det, o, sigma2, s.chan.n, acc);
        ErrorCounts total;
        for (const auto& c : acc)
            total += c;
        out.push_back(detail::finish(snr, total, o, s.chan.n, static_cast<int>(frames.front().info_bits.size()),
                                     "phyae-import", "estimated", 0));
    }
    return out;
}

/// Full receive chain. Each message window is received once per CSI mode, so
/// modes are compared on identical windows. Records come out grouped by mode,
/// each group in SNR order. BER/BLER count only frames detected within +-n_M.
inline std::vector<MetricRecord> error_rate_sweep(const LinkSetup& s, std::span<const double> snr_list,
                                                  std::span<const CsiMode> modes, const SweepOptions& o)
{
    detail::check_options(o, snr_list);
    require(!modes.empty(), "at least one CSI mode is required");
    const int k = s.tx.code().k();
    const std::size_t nm = modes.size();
    const std::size_t nw = static_cast<std::size_t>(o.workers);

    // One receiver per worker and mode.
    std::vector<std::vector<IeddReceiver>> rx(nw);
    for (auto& per_worker : rx)
        for (CsiMode m : modes) {
            ReceiverConfig cfg = s.rx;
            cfg.csi_mode = m;
            per_worker.emplace_back(s.tx, s.det, s.chan, cfg);
        }

    std::vector<std::vector<MetricRecord>> grouped(nm);
    for (double snr : snr_list) {
        const double sigma2 = snr_to_noise_var(snr);
        std::vector<ErrorCounts> total(nm);
        std::uint64_t done = 0;
        while (done < o.trials) {
            const std::uint64_t end = std::min(o.trials, done + o.chunk);
            std::vector<std::vector<ErrorCounts>> acc(nw, std::vector<ErrorCounts>(nm));
            detail::parallel_for(done, end, o.workers, [&](int w, std::uint64_t i) {
                Bits u;
                const RxWindow win = detail::message_window(s, {}, &u, o.seed, i, sigma2);
                for (std::size_t m = 0; m < nm; ++m) {
                    const ReceiveResult res = rx[static_cast<std::size_t>(w)][m].receive(win);
                    ErrorCounts& c = acc[static_cast<std::size_t>(w)][m];
                    c.trials += 1;
                    if (!res.detected) {
                        c.misdetections += 1;
                        continue;
                    }
                    if (std::abs(*res.tau_hat - *win.truth->tau_off) > kChannelMemory) {
                        c.sync_errors += 1;
                        continue;
                    }
                    const std::uint64_t e = detail::count_bit_errors(res.u_hat, u);
                    c.bits += u.size();
                    c.bit_errors += e;
                    c.blocks += 1;
                    c.block_errors += e > 0;
                    c.round_bit_errors.resize(res.round_bits.size(), 0);
                    c.round_block_errors.resize(res.round_bits.size(), 0);
                    for (std::size_t r = 0; r < res.round_bits.size(); ++r) {
                        const std::uint64_t er = detail::count_bit_errors(res.round_bits[r], u);
                        c.round_bit_errors[r] += er;
                        c.round_block_errors[r] += er > 0;
                    }
                }
            });
            for (const auto& per_worker : acc)
                for (std::size_t m = 0; m < nm; ++m)
                    total[m] += per_worker[m];
            done = end;
            if (o.max_block_errors > 0 &&
                std::all_of(total.begin(), total.end(),
                            [&](const ErrorCounts& c) { return c.block_errors >= o.max_block_errors; }))
                break;
        }
        if (o.none_trials > 0) {
            // False alarms only make sense with a detector in the loop.
            std::vector<ErrorCounts> none(nw);
            detail::count_none_windows(s.det, o, sigma2, s.chan.n, none);
            for (std::size_t m = 0; m < nm; ++m)
                if (modes[m] == CsiMode::estimated)
                    for (const auto& c : none)
                        total[m] += c;
        }
        for (std::size_t m = 0; m < nm; ++m)
            grouped[m].push_back(
                detail::finish(snr, total[m], o, s.chan.n, k, "baseline", to_string(modes[m]), s.rx.l_iedd));
    }
    std::vector<MetricRecord> out;
    for (auto& g : grouped)
        out.insert(out.end(), g.begin(), g.end());
    return out;
}

struct CalibrationOptions {
    double target_far = 1e-3;
    std::uint64_t trials = 100000;
    double snr_lo_db = 0.0;
    double snr_hi_db = 20.0;
    std::uint64_t seed = 1;
};

/// Builds the baseline link for frame length n with k information bits and
/// calibrates its detector. The preamble length follows the per-n table unless
/// `preamble` overrides it.
inline LinkSetup make_link(const ChannelParams& chan, int k, std::optional<PreambleSpec> preamble,
                           const DetectorConfig& det_cfg, const ReceiverConfig& rx,
                           const CalibrationOptions& cal, std::optional<double> eta = std::nullopt)
{
    chan.validate();
    rx.validate();
    PreambleSpec ps = preamble.value_or(PreambleSpec{preamble_length_for(chan.n), 7});
    require(ps.length < chan.n, "preamble must be shorter than the frame");
    const int payload = chan.n - ps.length;
    const LdpcCode code = LdpcCode::build(k, 2 * payload);
    BaselineTransmitter tx(code, ps);
    PreambleDetector det(tx.preamble(), chan.n, det_cfg);
    if (eta) {
        det.set_threshold(*eta);
    } else {
        det.set_threshold(
            calibrate_threshold(det, cal.target_far, cal.trials, cal.snr_lo_db, cal.snr_hi_db, cal.seed).eta);
    }
    return LinkSetup{chan, std::move(tx), std::move(det), rx};
}

/// BLER versus frame length at one SNR with k = n (rate one bit per channel use).
inline std::vector<MetricRecord> length_sweep(std::span<const int> lengths, double snr_db, ChannelParams chan,
                                              const DetectorConfig& det_cfg, const ReceiverConfig& rx,
                                              const CalibrationOptions& cal, const SweepOptions& o)
{
    require(!lengths.empty(), "length list must not be empty");
    std::vector<MetricRecord> out;
    const double snr[] = {snr_db};
    const CsiMode modes[] = {rx.csi_mode};
    for (int n : lengths) {
        chan.n = n;
        const LinkSetup s = make_link(chan, n, std::nullopt, det_cfg, rx, cal);
        for (auto& r : error_rate_sweep(s, snr, modes, o))
            out.push_back(std::move(r));
    }
    return out;
}

/// Log-linear interpolation of the first SNR at which `rate` falls to `level`.
/// Returns nothing if the curve never reaches the level.
inline std::optional<double> crossing_snr(std::span<const double> snr, std::span<const double> rate, double level)
{
    require(snr.size() == rate.size(), "curve lengths differ");
    for (std::size_t i = 0; i < snr.size(); ++i) {
        if (rate[i] > level)
            continue;
        if (i == 0)
            return snr[0];
        const double r0 = std::log10(rate[i - 1]);
        const double r1 = std::log10(std::max(rate[i], 1e-300));
        const double f = (r0 - std::log10(level)) / (r0 - r1);
        return snr[i - 1] + f * (snr[i] - snr[i - 1]);
    }
    return std::nullopt;
}

}  // namespace shortpkt
