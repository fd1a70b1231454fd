// SPDX-License-Identifier: Apache-2.0
//
// Preamble-based detection, timing synchronization and channel estimation.
//
// Both detection statistics are energy-normalized, bounded to [0, 1] and
// invariant to a common scaling of the window, so one threshold serves every
// (unknown) SNR.

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <cstdint>
#include <fstream>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "shortpkt/chansim.hpp"
#include "shortpkt/common.hpp"
#include "shortpkt/random.hpp"

namespace shortpkt {

enum class DetectionStatistic {
    /// |<y_tau, p>|^2 / (|y_tau|^2 |p|^2) over the preamble span.
    normalized_correlation,
    /// Fraction of the span energy explained by an L-tap channel driven by the
    /// preamble (least-squares projection). Collects every multipath component.
    multipath_projection,
};

enum class ChannelEstimator { least_squares, matched_filter };

struct DetectorConfig {
    DetectionStatistic statistic = DetectionStatistic::multipath_projection;
    ChannelEstimator estimator = ChannelEstimator::least_squares;
    double threshold = 0.0;
};

struct ChannelEstimate {
    CVec taps;  // kEffectiveTaps complex taps relative to tau_hat
    double noise_var = 0.0;
};

struct DetectionOutcome {
    std::optional<int> tau_hat;  // empty: no message
    double metric = 0.0;
    std::optional<ChannelEstimate> channel_est;

    bool detected() const { return tau_hat.has_value(); }
};

class PreambleDetector {
public:
    /// `reference` is the known sequence at the start of every message, exactly as sent.
    PreambleDetector(CVec reference, int n, DetectorConfig cfg = {})
        : ref_(std::move(reference)), n_(n), cfg_(cfg)
    {
        const int len = static_cast<int>(ref_.size());
        require(len > kEffectiveTaps, "reference must be longer than the channel estimate");
        require(len <= n + kChannelMemory, "reference does not fit the detection window");
        ref_energy_ = 0.0;
        for (const auto& p : ref_)
            ref_energy_ += std::norm(p);
        require(ref_energy_ > 0.0, "reference has no energy");
        build_pseudo_inverse();
    }

    const DetectorConfig& config() const { return cfg_; }
    void set_threshold(double eta) { cfg_.threshold = eta; }
    double threshold() const { return cfg_.threshold; }
    int n() const { return n_; }
    int window_len() const { return 2 * n_; }
    /// Candidate offsets are 0 .. offset_count() - 1.
    int offset_count() const { return n_ - kChannelMemory; }
    const CVec& reference() const { return ref_; }

    double statistic(std::span<const cplx> y, int tau) const
    {
        return cfg_.statistic == DetectionStatistic::normalized_correlation ? correlation(y, tau)
                                                                            : projection(y, tau);
    }

    RVec profile(std::span<const cplx> y) const
    {
        check_window(y);
        RVec out(offset_count());
        for (int tau = 0; tau < offset_count(); ++tau)
            out[tau] = statistic(y, tau);
        return out;
    }

    double max_statistic(std::span<const cplx> y) const
    {
        const RVec p = profile(y);
        return *std::max_element(p.begin(), p.end());
    }

    /// Least-squares (or matched-filter) estimate of the effective taps at offset tau.
    ChannelEstimate estimate_channel(std::span<const cplx> y, int tau) const
    {
        check_window(y);
        require(tau >= 0 && tau < offset_count(), "offset out of range");
        const int len = static_cast<int>(ref_.size());
        ChannelEstimate est;
        est.taps.assign(kEffectiveTaps, cplx{});
        if (cfg_.estimator == ChannelEstimator::least_squares) {
            for (int d = 0; d < kEffectiveTaps; ++d)
                for (int m = 0; m < len; ++m)
                    est.taps[d] += pinv_[d * len + m] * y[tau + m];
        } else {
            for (int d = 0; d < kEffectiveTaps; ++d) {
                for (int j = 0; j + d < len; ++j)
                    est.taps[d] += y[tau + d + j] * std::conj(ref_[j]);
                est.taps[d] /= ref_energy_;
            }
        }
        double resid = 0.0;
        for (int m = 0; m < len; ++m) {
            cplx model{};
            for (int d = 0; d <= std::min(m, kEffectiveTaps - 1); ++d)
                model += est.taps[d] * ref_[m - d];
            resid += std::norm(y[tau + m] - model);
        }
        est.noise_var = resid / (len - kEffectiveTaps);
        return est;
    }

    DetectionOutcome detect(const RxWindow& w) const { return detect(std::span<const cplx>(w.samples)); }

    DetectionOutcome detect(std::span<const cplx> y) const
    {
        const RVec p = profile(y);
        const auto peak_it = std::max_element(p.begin(), p.end());
        DetectionOutcome out;
        out.metric = *peak_it;
        if (out.metric < cfg_.threshold)
            return out;
        int tau = 0;
        if (cfg_.statistic == DetectionStatistic::normalized_correlation) {
            // The correlation peaks on the strongest path; move back to the
            // start that lets the estimate capture the most energy.
            const int peak = static_cast<int>(peak_it - p.begin());
            const int lo = std::max(0, peak - kChannelMemory);
            RVec e(static_cast<std::size_t>(peak - lo + 1));
            for (int t = lo; t <= peak; ++t)
                e[static_cast<std::size_t>(t - lo)] = projection(y, t);
            tau = lo + plateau_argmax(e);
        } else {
            tau = plateau_argmax(p);
        }
        out.tau_hat = tau;
        out.channel_est = estimate_channel(y, tau);
        return out;
    }

    /// Position of the maximum. An exact plateau (only noiseless, sparse channels
    /// produce one) resolves to one before its last offset, which puts the STO
    /// main tap at delay 1 as in the channel model.
    static int plateau_argmax(std::span<const double> v)
    {
        const double top = *std::max_element(v.begin(), v.end());
        const double tol = 1e-12 * std::max(1.0, std::abs(top));
        int last = 0;
        for (int i = 0; i < static_cast<int>(v.size()); ++i)
            if (v[static_cast<std::size_t>(i)] >= top - tol)
                last = i;
        if (last > 0 && v[static_cast<std::size_t>(last - 1)] >= top - tol)
            return last - 1;
        return last;
    }

private:
    void check_window(std::span<const cplx> y) const
    {
        require(static_cast<int>(y.size()) == window_len(), "detection window must hold 2n samples");
    }

    double span_energy(std::span<const cplx> y, int tau) const
    {
        double e = 0.0;
        for (std::size_t i = 0; i < ref_.size(); ++i)
            e += std::norm(y[tau + i]);
        return e;
    }

    double correlation(std::span<const cplx> y, int tau) const
    {
        const double e = span_energy(y, tau);
        if (e <= 0.0)
            return 0.0;
        cplx c{};
        for (std::size_t i = 0; i < ref_.size(); ++i)
            c += y[tau + i] * std::conj(ref_[i]);
        return std::min(1.0, std::norm(c) / (e * ref_energy_));
    }

    double projection(std::span<const cplx> y, int tau) const
    {
        const double e = span_energy(y, tau);
        if (e <= 0.0)
            return 0.0;
        const int len = static_cast<int>(ref_.size());
        // z = A^H y, ||P y||^2 = z^H G^{-1} z
        std::array<cplx, kEffectiveTaps> z{};
        for (int d = 0; d < kEffectiveTaps; ++d)
            for (int j = 0; j + d < len; ++j)
                z[d] += std::conj(ref_[j]) * y[tau + d + j];
        double q = 0.0;
        for (int a = 0; a < kEffectiveTaps; ++a) {
            cplx row{};
            for (int b = 0; b < kEffectiveTaps; ++b)
                row += gram_inv_[a * kEffectiveTaps + b] * z[b];
            q += (std::conj(z[a]) * row).real();
        }
        return std::clamp(q / e, 0.0, 1.0);
    }

    // A[m][d] = ref[m - d] (zero before the reference starts); G = A^H A.
    void build_pseudo_inverse()
    {
        constexpr int L = kEffectiveTaps;
        const int len = static_cast<int>(ref_.size());
        auto a = [&](int m, int d) { return m - d >= 0 ? ref_[m - d] : cplx{}; };

        std::vector<cplx> g(L * L), inv(L * L, cplx{});
        for (int r = 0; r < L; ++r)
            for (int c = 0; c < L; ++c) {
                cplx acc{};
                for (int m = 0; m < len; ++m)
                    acc += std::conj(a(m, r)) * a(m, c);
                g[r * L + c] = acc;
            }
        for (int i = 0; i < L; ++i)
            inv[i * L + i] = 1.0;

        // Gauss-Jordan with partial pivoting.
        for (int col = 0; col < L; ++col) {
            int piv = col;
            for (int r = col + 1; r < L; ++r)
                if (std::abs(g[r * L + col]) > std::abs(g[piv * L + col]))
                    piv = r;
            require(std::abs(g[piv * L + col]) > 1e-9 * ref_energy_,
                    "reference gives a rank-deficient channel estimation problem");
            if (piv != col)
                for (int c = 0; c < L; ++c) {
                    std::swap(g[piv * L + c], g[col * L + c]);
                    std::swap(inv[piv * L + c], inv[col * L + c]);
                }
            const cplx d = g[col * L + col];
            for (int c = 0; c < L; ++c) {
                g[col * L + c] /= d;
                inv[col * L + c] /= d;
            }
            for (int r = 0; r < L; ++r) {
                if (r == col)
                    continue;
                const cplx f = g[r * L + col];
                for (int c = 0; c < L; ++c) {
                    g[r * L + c] -= f * g[col * L + c];
                    inv[r * L + c] -= f * inv[col * L + c];
                }
            }
        }
        gram_inv_ = inv;

        pinv_.assign(static_cast<std::size_t>(L) * len, cplx{});
        for (int d = 0; d < L; ++d)
            for (int m = 0; m < len; ++m) {
                cplx acc{};
                for (int b = 0; b < L; ++b)
                    acc += gram_inv_[d * L + b] * std::conj(a(m, b));
                pinv_[d * len + m] = acc;
            }
    }

    CVec ref_;
    int n_;
    DetectorConfig cfg_;
    double ref_energy_ = 0.0;
    std::vector<cplx> gram_inv_;
    std::vector<cplx> pinv_;
};

/// One-sided Wilson score interval bounds for `k` successes in `n` trials.
inline double wilson_upper(std::uint64_t k, std::uint64_t n, double z)
{
    if (n == 0)
        return 1.0;
    const double nn = static_cast<double>(n);
    const double p = static_cast<double>(k) / nn;
    const double z2 = z * z;
    const double centre = p + z2 / (2.0 * nn);
    const double half = z * std::sqrt(p * (1.0 - p) / nn + z2 / (4.0 * nn * nn));
    return std::min(1.0, (centre + half) / (1.0 + z2 / nn));
}

inline double wilson_lower(std::uint64_t k, std::uint64_t n, double z)
{
    if (n == 0 || k == 0)
        return 0.0;
    const double nn = static_cast<double>(n);
    const double p = static_cast<double>(k) / nn;
    const double z2 = z * z;
    const double centre = p + z2 / (2.0 * nn);
    const double half = z * std::sqrt(p * (1.0 - p) / nn + z2 / (4.0 * nn * nn));
    return std::max(0.0, (centre - half) / (1.0 + z2 / nn));
}

inline constexpr double kZ95OneSided = 1.6448536269514722;

struct Calibration {
    double eta = 0.0;
    double target_far = 0.0;
    std::uint64_t trials = 0;
    std::uint64_t seed = 0;
    /// False alarms among the calibration windows at eta.
    std::uint64_t false_alarms = 0;
};

/// Seed stream reserved for calibration none-windows.
inline constexpr std::uint64_t kCalibrationStream = 0xca11b;

/// Smallest threshold whose false-alarm count over `trials` none-windows keeps
/// the one-sided 95% Wilson upper bound at or below `target_far`.
inline Calibration calibrate_threshold(const PreambleDetector& det, double target_far,
                                       std::uint64_t trials, double snr_lo_db, double snr_hi_db,
                                       std::uint64_t seed)
{
    require(target_far > 0.0 && target_far <= 1.0, "target false-alarm rate must lie in (0, 1]");
    require(static_cast<double>(trials) >= 10.0 / target_far,
            "calibration needs at least 10 / target_far trials");
    require(snr_lo_db <= snr_hi_db, "empty SNR range");

    std::vector<double> maxima(trials);
    for (std::uint64_t t = 0; t < trials; ++t) {
        Rng rng(derive_seed(seed, kCalibrationStream, t));
        const double snr = snr_lo_db + (snr_hi_db - snr_lo_db) * rng.uniform();
        const RxWindow w = none_window(snr_to_noise_var(snr), det.n(), rng);
        maxima[t] = det.max_statistic(w.samples);
    }
    std::sort(maxima.begin(), maxima.end(), std::greater<>());

    std::uint64_t allowed = 0;
    while (allowed < trials && wilson_upper(allowed + 1, trials, kZ95OneSided) <= target_far)
        ++allowed;

    Calibration c;
    c.target_far = target_far;
    c.trials = trials;
    c.seed = seed;
    if (allowed >= trials || wilson_upper(0, trials, kZ95OneSided) > target_far) {
        // Either everything may alarm, or no count can meet the bound.
        c.eta = allowed >= trials ? 0.0 : std::nextafter(maxima.front(), 2.0);
    } else {
        c.eta = std::nextafter(maxima[allowed], 2.0);
    }
    c.false_alarms = static_cast<std::uint64_t>(
        std::count_if(maxima.begin(), maxima.end(), [&](double m) { return m >= c.eta; }));
    return c;
}

inline void save_calibration(const std::string& path, const Calibration& c)
{
    nlohmann::ordered_json j;
    j["eta"] = c.eta;
    j["target_far"] = c.target_far;
    j["trials"] = c.trials;
    j["seed"] = c.seed;
    j["false_alarms"] = c.false_alarms;
    std::ofstream f(path);
    if (!f)
        throw std::runtime_error("cannot write calibration file: " + path);
    f << j.dump(2) << '\n';
    if (!f)
        throw std::runtime_error("write failed: " + path);
}

inline Calibration load_calibration(const std::string& path)
{
    std::ifstream f(path);
    if (!f)
        throw std::runtime_error("cannot read calibration file: " + path);
    const auto j = nlohmann::json::parse(f);
    Calibration c;
    c.eta = j.at("eta").get<double>();
    c.target_far = j.at("target_far").get<double>();
    c.trials = j.at("trials").get<std::uint64_t>();
    c.seed = j.at("seed").get<std::uint64_t>();
    c.false_alarms = j.value("false_alarms", std::uint64_t{0});
    return c;
}

}  // namespace shortpkt
