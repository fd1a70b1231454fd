// SPDX-License-Identifier: Apache-2.0
//
// Random-access multipath channel: random start offset inside a 2n window,
// Proakis-C taps, a fractional sample-timing-offset (STO) filter, and
// circularly-symmetric AWGN.

#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "shortpkt/common.hpp"
#include "shortpkt/random.hpp"

namespace shortpkt {

/// Proakis type-C tap weights.
inline constexpr std::array<double, kNumTaps> kProakisWeights = {0.227, 0.46, 0.688, 0.46, 0.227};

/// Which closed form to use for the timing-offset pulse g(t).
///   raised_cosine: sinc(pi t) cos(pi beta t) / (1 - (2 beta t)^2), continuous at t = 0.
///   printed:       cos(beta t) / (pi t) * sinc(pi t), the alternative closed form,
///                  which is unbounded as t -> 0 and kept for comparison runs.
/// Both share the explicit values g(0) = 1 and g(1/(2 beta)) = pi/4 sinc(pi/(2 beta)).
enum class StoPulse { raised_cosine, printed };

/// Unnormalized sinc: sin(x)/x.
inline double sinc(double x)
{
    return x == 0.0 ? 1.0 : std::sin(x) / x;
}

struct ChannelParams {
    int n = 64;             // message length in symbols
    int n_taps = kNumTaps;  // only the 5-tap Proakis profile is supported
    double beta = 0.3;      // STO roll-off
    StoPulse pulse = StoPulse::raised_cosine;

    int window_len() const { return 2 * n; }
    /// Number of admissible start offsets; tau_off is drawn from [0, offset_count()).
    int offset_count() const { return n - kChannelMemory; }

    void validate() const
    {
        require(n > kChannelMemory, "n must exceed the channel memory");
        require(n_taps == kNumTaps, "only n_taps = 5 (Proakis C) is supported");
        require(beta > 0.0 && beta <= 1.0, "beta must lie in (0, 1]");
    }
};

struct ChannelRealization {
    std::vector<double> taps;
    int tau_off = 0;
    double tau_sto = 0.0;
    double sigma2 = 1.0;
    std::uint64_t seed = 0;
};

struct StoFilter {
    double beta = 0.3;
    double tau_sto = 0.0;
    std::array<double, kStoFilterTaps> taps{};

    /// Index of the tap sampled at t = tau_sto.
    static constexpr int kMainTap = kStoFilterTaps / 2;
};

struct WindowTruth {
    bool has_message = false;
    std::optional<int> tau_off;
    std::optional<ChannelRealization> realization;
};

/// Received detection window of n_det = 2n samples.
struct RxWindow {
    CVec samples;
    std::optional<WindowTruth> truth;
};

/// sigma^2 for a unit-energy-per-symbol transmit signal at `snr_db`.
inline double snr_to_noise_var(double snr_db)
{
    return std::pow(10.0, -snr_db / 10.0);
}

/// h_i = w_i * t_i for externally supplied standard-normal draws t.
inline std::vector<double> taps_from_normals(std::span<const double> t)
{
    require(t.size() == kProakisWeights.size(), "expected one normal draw per tap");
    std::vector<double> h(t.size());
    for (std::size_t i = 0; i < t.size(); ++i)
        h[i] = kProakisWeights[i] * t[i];
    return h;
}

inline std::vector<double> draw_taps(Rng& rng)
{
    std::array<double, kNumTaps> t{};
    for (auto& v : t)
        v = rng.normal();
    return taps_from_normals(t);
}

/// The timing-offset pulse g(t) with T = 1.
inline double sto_pulse(double t, double beta, StoPulse form = StoPulse::raised_cosine)
{
    if (t == 0.0)
        return 1.0;
    const double edge = 1.0 / (2.0 * beta);
    if (std::abs(std::abs(t) - edge) < 1e-12)
        return kPi / 4.0 * sinc(kPi / (2.0 * beta));
    if (form == StoPulse::printed)
        return std::cos(beta * t) / (kPi * t) * sinc(kPi * t);
    const double x = 2.0 * beta * t;
    return sinc(kPi * t) * std::cos(kPi * beta * t) / (1.0 - x * x);
}

/// 16 taps of g sampled at t in {-8, ..., 7} shifted by tau_sto.
inline StoFilter sto_filter(double tau_sto, double beta, StoPulse form = StoPulse::raised_cosine)
{
    require(beta > 0.0, "roll-off beta must be positive");
    require(tau_sto >= 0.0 && tau_sto < 1.0, "tau_sto must lie in [0, 1)");
    StoFilter f;
    f.beta = beta;
    f.tau_sto = tau_sto;
    for (int j = 0; j < kStoFilterTaps; ++j)
        f.taps[j] = sto_pulse(static_cast<double>(j - StoFilter::kMainTap) + tau_sto, beta, form);
    return f;
}

/// Draws taps, start offset and timing offset; noise variance is given.
inline ChannelRealization draw_realization(Rng& rng, const ChannelParams& p, double sigma2,
                                           std::uint64_t seed = 0)
{
    ChannelRealization r;
    r.taps = draw_taps(rng);
    r.tau_off = rng.uniform_int(0, p.offset_count());
    r.tau_sto = rng.uniform();
    r.sigma2 = sigma2;
    r.seed = seed;
    return r;
}

namespace detail {

// Output sample m of the trimmed STO convolution reads full-convolution index m + kStoTrim,
// so the main tap delays the signal by exactly one symbol.
inline constexpr int kStoTrim = StoFilter::kMainTap - 1;

inline void check_realization(const ChannelRealization& r, const ChannelParams& p)
{
    require(static_cast<int>(r.taps.size()) == p.n_taps, "tap count does not match n_taps");
    require(r.tau_off >= 0 && r.tau_off < p.offset_count(), "tau_off out of range");
    require(r.tau_sto >= 0.0 && r.tau_sto < 1.0, "tau_sto out of range");
    require(r.sigma2 >= 0.0, "sigma2 must be non-negative");
}

}  // namespace detail

/// Channel output before noise: offset, multipath, STO filtering; length 2n.
inline CVec propagate_noiseless(std::span<const cplx> x, const ChannelRealization& r,
                                const ChannelParams& p)
{
    require(static_cast<int>(x.size()) == p.n, "frame length does not match n");
    detail::check_realization(r, p);

    const int n = p.n;
    const int padded = 2 * n - kChannelMemory;
    const int taps = static_cast<int>(r.taps.size());

    // x at [tau_off, tau_off + n) in a zero buffer, then full convolution with h.
    CVec yh(padded + taps - 1, cplx{});
    for (int i = 0; i < n; ++i)
        for (int l = 0; l < taps; ++l)
            yh[r.tau_off + i + l] += r.taps[l] * x[i];

    const StoFilter g = sto_filter(r.tau_sto, p.beta, p.pulse);
    CVec y(p.window_len(), cplx{});
    const int len = static_cast<int>(yh.size());
    for (int m = 0; m < p.window_len(); ++m) {
        const int full = m + detail::kStoTrim;
        cplx acc{};
        for (int j = 0; j < kStoFilterTaps; ++j) {
            const int i = full - j;
            if (i >= 0 && i < len)
                acc += g.taps[j] * yh[i];
        }
        y[m] = acc;
    }
    return y;
}

inline void add_noise(CVec& y, double sigma2, Rng& rng)
{
    for (auto& v : y)
        v += rng.complex_normal(sigma2);
}

inline RxWindow propagate(std::span<const cplx> x, const ChannelRealization& r,
                          const ChannelParams& p, Rng& rng)
{
    RxWindow w;
    w.samples = propagate_noiseless(x, r, p);
    add_noise(w.samples, r.sigma2, rng);
    w.truth = WindowTruth{true, r.tau_off, r};
    return w;
}

inline RxWindow none_window(double sigma2, int n, Rng& rng)
{
    require(sigma2 >= 0.0, "sigma2 must be non-negative");
    RxWindow w;
    w.samples.assign(2 * static_cast<std::size_t>(n), cplx{});
    add_noise(w.samples, sigma2, rng);
    w.truth = WindowTruth{false, std::nullopt, std::nullopt};
    return w;
}

/// Effective symbol-spaced response h * g over delays 0..n_M relative to tau_off,
/// as seen in the trimmed output. Taps of g outside this span are not represented.
inline CVec effective_response(const ChannelRealization& r, const ChannelParams& p)
{
    const StoFilter g = sto_filter(r.tau_sto, p.beta, p.pulse);
    CVec eff(kEffectiveTaps, cplx{});
    for (int d = 0; d < kEffectiveTaps; ++d) {
        double acc = 0.0;
        for (int l = 0; l < static_cast<int>(r.taps.size()); ++l) {
            const int j = d + detail::kStoTrim - l;
            if (j >= 0 && j < kStoFilterTaps)
                acc += r.taps[l] * g.taps[j];
        }
        eff[d] = acc;
    }
    return eff;
}

}  // namespace shortpkt
