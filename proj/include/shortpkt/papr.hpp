// SPDX-License-Identifier: Apache-2.0
//
// Peak-to-average power ratio of frames and its CCDF over many frames.
//
// Oversampling is ideal (sinc) interpolation done as zero-padded spectral
// interpolation of the frame treated as one burst: the frame sits between
// kPaprGuard * n zeros on each side, the padded block is interpolated as a
// periodic signal, i.e. convolved with the Dirichlet kernel of its length.
// The guard keeps wrap-around ringing from the burst's far end small.

#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include "shortpkt/baseline_tx.hpp"
#include "shortpkt/common.hpp"

namespace shortpkt {

/// Guard length on each side, as a fraction of the frame length.
inline constexpr double kPaprGuard = 0.5;

/// Peak over mean power of the samples, in dB.
inline double papr_db(std::span<const cplx> x)
{
    require(!x.empty(), "empty frame");
    double peak = 0.0;
    double sum = 0.0;
    for (const auto& v : x) {
        const double p = std::norm(v);
        peak = std::max(peak, p);
        sum += p;
    }
    require(sum > 0.0, "PAPR of an all-zero frame is undefined");
    return 10.0 * std::log10(peak * static_cast<double>(x.size()) / sum);
}

/// Periodic sinc of period m evaluated at t (in input samples); even m splits the
/// Nyquist bin so the kernel is real.
inline double dirichlet(double t, int m)
{
    const double s = std::sin(kPi * t);
    const double d = static_cast<double>(m) * (m % 2 ? std::sin(kPi * t / m) : std::tan(kPi * t / m));
    if (std::abs(d) < 1e-12)
        return 1.0;  // t is a multiple of the period
    return s / d;
}

/// Interpolates one frame by `factor` with the guarded Dirichlet kernel.
class SincInterpolator {
public:
    SincInterpolator(int n, int factor) : n_(n), factor_(factor)
    {
        require(n > 0, "frame length must be positive");
        require(factor >= 1, "oversampling factor must be at least 1");
        guard_ = static_cast<int>(std::ceil(kPaprGuard * n));
        block_ = n + 2 * guard_;
        // Kernel at offsets j / factor for j = 0 .. block * factor - 1 (periodic).
        kernel_.resize(static_cast<std::size_t>(block_) * factor_);
        for (std::size_t j = 0; j < kernel_.size(); ++j)
            kernel_[j] = dirichlet(static_cast<double>(j) / factor_, block_);
    }

    int length() const { return n_; }
    int factor() const { return factor_; }
    int output_length() const { return block_ * factor_; }

    /// Interpolated burst of block * factor samples; sample guard * factor + i * factor equals x[i].
    CVec interpolate(std::span<const cplx> x) const
    {
        require(static_cast<int>(x.size()) == n_, "frame length does not match the interpolator");
        const int len = output_length();
        CVec out(static_cast<std::size_t>(len), cplx{});
        for (int o = 0; o < len; ++o) {
            cplx acc{};
            for (int i = 0; i < n_; ++i) {
                int j = o - (guard_ + i) * factor_;
                if (j < 0)
                    j += len;
                acc += kernel_[static_cast<std::size_t>(j)] * x[static_cast<std::size_t>(i)];
            }
            out[static_cast<std::size_t>(o)] = acc;
        }
        return out;
    }

    /// Peak power of the interpolated burst over the mean power of the frame's samples, in dB.
    double papr_db(std::span<const cplx> x) const
    {
        const CVec y = interpolate(x);
        double peak = 0.0;
        for (const auto& v : y)
            peak = std::max(peak, std::norm(v));
        double sum = 0.0;
        for (const auto& v : x)
            sum += std::norm(v);
        require(sum > 0.0, "PAPR of an all-zero frame is undefined");
        return 10.0 * std::log10(peak * n_ / sum);
    }

private:
    int n_;
    int factor_;
    int guard_ = 0;
    int block_ = 0;
    std::vector<double> kernel_;
};

struct PaprCurve {
    std::vector<double> papr_db;  // grid
    std::vector<double> ccdf;     // P(PAPR > grid value)
    int oversample = 1;
    std::size_t frames = 0;
};

inline constexpr std::size_t kMinPaprFrames = 1000;

/// Empirical CCDF on a uniform grid from 0 dB up to the largest observed PAPR.
inline PaprCurve ccdf_from_values(std::vector<double> values, int oversample, double step_db = 0.1)
{
    require(step_db > 0.0, "grid step must be positive");
    require(!values.empty(), "no PAPR values");
    std::sort(values.begin(), values.end());
    PaprCurve c;
    c.oversample = oversample;
    c.frames = values.size();
    const double top = values.back();
    const int points = static_cast<int>(std::floor(std::max(top, 0.0) / step_db)) + 2;
    for (int i = 0; i < points; ++i) {
        const double x = i * step_db;
        const auto above = values.end() - std::upper_bound(values.begin(), values.end(), x);
        c.papr_db.push_back(x);
        c.ccdf.push_back(static_cast<double>(above) / static_cast<double>(values.size()));
    }
    return c;
}

inline PaprCurve papr_ccdf(std::span<const Frame> frames, int oversample = 16, double step_db = 0.1)
{
    require(oversample >= 2, "oversampling factor must be at least 2");
    require(frames.size() >= kMinPaprFrames, "PAPR CCDF needs at least 1000 frames");
    const int n = static_cast<int>(frames.front().symbols.size());
    const SincInterpolator interp(n, oversample);
    std::vector<double> values;
    values.reserve(frames.size());
    for (const auto& f : frames) {
        require(static_cast<int>(f.symbols.size()) == n, "all frames must have the same length");
        values.push_back(interp.papr_db(f.symbols));
    }
    return ccdf_from_values(std::move(values), oversample, step_db);
}

}  // namespace shortpkt
