// SPDX-License-Identifier: Apache-2.0
//
// BCJR equalizer for QPSK over a 6-tap ISI channel (memory 5, 1024 states).
//
// State at step t holds the five most recent symbols, newest in the two least
// significant bits. Branch index b = input + 4 * previous_state, and the next
// state is b & 1023, so the predecessors of s' are (s' >> 2) + 256 k and the
// branches into it are s' + 1024 k, k = 0..3.
//
// The trellis starts in the state holding the known preamble tail and walks
// the payload followed by n_M tail steps whose input is the known zero that
// follows the frame. The final state is left free.

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <span>
#include <vector>

#include "shortpkt/baseline_tx.hpp"
#include "shortpkt/common.hpp"

namespace shortpkt {

enum class BcjrMode { max_log, exact };

class IsiTrellis {
public:
    static constexpr int kMemory = kEffectiveTaps - 1;
    static constexpr int kAlphabet = 4;
    static constexpr int kStates = 1 << (2 * kMemory);
    static constexpr int kBranches = kStates * kAlphabet;

    /// `taps`: effective channel (6 taps). `preamble`: known symbols preceding the
    /// payload, as transmitted. `symbol_scale` multiplies the unit QPSK alphabet.
    IsiTrellis(std::span<const cplx> taps, CVec preamble, int payload_len, double symbol_scale = 1.0)
        : preamble_(std::move(preamble)), payload_len_(payload_len), scale_(symbol_scale)
    {
        require(static_cast<int>(taps.size()) == kEffectiveTaps, "trellis needs exactly 6 channel taps");
        require(payload_len > 0, "payload must not be empty");
        std::copy(taps.begin(), taps.end(), taps_.begin());
    }

    int steps() const { return payload_len_ + kMemory; }
    int payload_len() const { return payload_len_; }
    int preamble_len() const { return static_cast<int>(preamble_.size()); }
    /// Samples consumed from the snippet: preamble + payload + channel tail.
    int snippet_len() const { return preamble_len() + steps(); }
    int coded_bits() const { return 2 * payload_len_; }
    const std::array<cplx, kEffectiveTaps>& taps() const { return taps_; }

    /// Input of step t is the known zero after the frame.
    bool tail_step(int t) const { return t >= payload_len_; }

    /// Transmitted value at frame position `pos` if the symbol there has digit `digit`.
    cplx symbol(int pos, int digit) const
    {
        if (pos < 0 || pos >= preamble_len() + payload_len_)
            return {};
        if (pos < preamble_len())
            return preamble_[pos];
        return scale_ * qpsk_symbol(static_cast<std::uint8_t>(digit >> 1),
                                    static_cast<std::uint8_t>(digit & 1));
    }

    /// Noise-free output of every branch at step t.
    void branch_gains(int t, std::span<cplx> out) const
    {
        require(static_cast<int>(out.size()) == kBranches, "gain buffer must hold 4096 entries");
        const int pos0 = preamble_len() + t;
        // Outer sum over digits, oldest (d = 5) most significant.
        std::size_t len = 1;
        out[0] = cplx{};
        for (int d = kMemory; d >= 0; --d) {
            std::array<cplx, kAlphabet> term;
            for (int a = 0; a < kAlphabet; ++a)
                term[a] = taps_[d] * symbol(pos0 - d, a);
            for (std::size_t i = len; i-- > 0;) {
                const cplx base = out[i];
                for (int a = 0; a < kAlphabet; ++a)
                    out[i * kAlphabet + a] = base + term[a];
            }
            len *= kAlphabet;
        }
    }

private:
    std::array<cplx, kEffectiveTaps> taps_{};
    CVec preamble_;
    int payload_len_;
    double scale_;
};

inline IsiTrellis build_trellis(std::span<const cplx> taps, const BaselineTransmitter& tx)
{
    return IsiTrellis(taps, tx.preamble(), tx.code().tx_len() / 2, tx.scale());
}

/// Caller-owned buffers for one equalizer; reuse across IEDD rounds.
/// Branch arrays are input-major: entry [a * 1024 + s] is input a from state s.
template <typename Real>
struct BcjrWorkspace {
    std::vector<Real> channel;  // steps x 4096 branch log-likelihoods
    std::vector<Real> alpha;    // (steps + 1) x 1024
    std::vector<Real> beta;     // 2 x 1024, rolling
    std::vector<Real> branch;   // 4096 scratch
    std::vector<Real> scratch;  // 1024 scratch
    std::vector<Real> gain_re;  // 1024 scratch
    std::vector<Real> gain_im;
    int steps = 0;
};

template <typename Real = float>
class BcjrEqualizer {
public:
    static constexpr int S = IsiTrellis::kStates;
    static constexpr int B = IsiTrellis::kBranches;
    static constexpr int Q = S / 4;
    static constexpr Real kNegInf = static_cast<Real>(-1e30);

    /// Computes -|y - gain|^2 / noise_var for every branch of every step. This part
    /// does not depend on the a-priori input and is done once per received frame.
    static void prepare(std::span<const cplx> snippet, const IsiTrellis& tr, double noise_var,
                        BcjrWorkspace<Real>& ws)
    {
        require(static_cast<int>(snippet.size()) == tr.snippet_len(), "snippet length does not match the trellis");
        require(noise_var > 0.0 && std::isfinite(noise_var), "noise variance must be positive");
        ws.steps = tr.steps();
        ws.channel.resize(static_cast<std::size_t>(ws.steps) * B);
        ws.alpha.resize(static_cast<std::size_t>(ws.steps + 1) * S);
        ws.beta.resize(2 * S);
        ws.branch.resize(B);
        ws.scratch.resize(S);
        ws.gain_re.resize(S);
        ws.gain_im.resize(S);
        const Real inv = static_cast<Real>(1.0 / noise_var);
        Real* gr = ws.gain_re.data();
        Real* gi = ws.gain_im.data();
        for (int t = 0; t < ws.steps; ++t) {
            const int pos0 = tr.preamble_len() + t;
            // State part of the gain (digits 1..5), outer sum with the oldest digit most significant.
            std::size_t len = 1;
            gr[0] = 0;
            gi[0] = 0;
            for (int d = IsiTrellis::kMemory; d >= 1; --d) {
                std::array<Real, 4> tr_re, tr_im;
                for (int a = 0; a < 4; ++a) {
                    const cplx v = tr.taps()[d] * tr.symbol(pos0 - d, a);
                    tr_re[a] = static_cast<Real>(v.real());
                    tr_im[a] = static_cast<Real>(v.imag());
                }
                for (std::size_t i = len; i-- > 0;) {
                    const Real br = gr[i];
                    const Real bi = gi[i];
                    for (int a = 0; a < 4; ++a) {
                        gr[i * 4 + a] = br + tr_re[a];
                        gi[i * 4 + a] = bi + tr_im[a];
                    }
                }
                len *= 4;
            }
            const cplx y = snippet[pos0];
            Real* ch = ws.channel.data() + static_cast<std::size_t>(t) * B;
            for (int a = 0; a < 4; ++a) {
                const cplx r = y - tr.taps()[0] * tr.symbol(pos0, a);
                const Real rr = static_cast<Real>(r.real());
                const Real ri = static_cast<Real>(r.imag());
                Real* c = ch + a * S;
                for (int st = 0; st < S; ++st) {
                    const Real dr = rr - gr[st];
                    const Real di = ri - gi[st];
                    c[st] = -(dr * dr + di * di) * inv;
                }
            }
        }
    }

    /// Posterior LLRs (positive favours bit 0) of the 2 * payload coded bits. The
    /// a-priori LLRs enter each branch metric as weight * sum(+-L/2).
    static RVec run(const IsiTrellis& tr, std::span<const double> apriori, double weight, BcjrMode mode,
                    BcjrWorkspace<Real>& ws)
    {
        require(ws.steps == tr.steps(), "workspace not prepared for this trellis");
        require(static_cast<int>(apriori.size()) == tr.coded_bits(), "a-priori length must equal the coded bits");
        const int T = ws.steps;
        const bool exact = mode == BcjrMode::exact;

        auto prior_at = [&](int t) {
            std::array<Real, 4> p{};
            if (tr.tail_step(t)) {
                p = {0, kNegInf, kNegInf, kNegInf};
                return p;
            }
            const double l0 = apriori[2 * t] * 0.5 * weight;
            const double l1 = apriori[2 * t + 1] * 0.5 * weight;
            for (int a = 0; a < 4; ++a)
                p[a] = static_cast<Real>(((a >> 1) ? -l0 : l0) + ((a & 1) ? -l1 : l1));
            return p;
        };

        // Forward: next state 4q + a has predecessors q + 256k.
        Real* alpha = ws.alpha.data();
        Real* br = ws.branch.data();
        Real* tmp = ws.scratch.data();
        std::fill(alpha, alpha + S, kNegInf);
        alpha[0] = 0;
        for (int t = 0; t < T; ++t) {
            const auto prior = prior_at(t);
            const Real* a_in = alpha + static_cast<std::size_t>(t) * S;
            Real* a_out = alpha + static_cast<std::size_t>(t + 1) * S;
            const Real* ch = ws.channel.data() + static_cast<std::size_t>(t) * B;
            for (int a = 0; a < 4; ++a) {
                const Real* c = ch + a * S;
                Real* m = br + a * S;
                for (int s = 0; s < S; ++s)
                    m[s] = a_in[s] + c[s];
                Real* o = tmp + a * Q;
                if (exact) {
                    for (int q = 0; q < Q; ++q)
                        o[q] = combine4(m[q], m[q + Q], m[q + 2 * Q], m[q + 3 * Q], true) + prior[a];
                } else {
                    for (int q = 0; q < Q; ++q)
                        o[q] = std::max(std::max(m[q], m[q + Q]), std::max(m[q + 2 * Q], m[q + 3 * Q])) + prior[a];
                }
            }
            for (int q = 0; q < Q; ++q)
                for (int a = 0; a < 4; ++a)
                    a_out[4 * q + a] = tmp[a * Q + q];
            normalize(a_out, S);
        }

        // Backward, emitting LLRs on the way. Successor of (s, a) is 4 (s mod 256) + a.
        RVec llr(static_cast<std::size_t>(tr.coded_bits()));
        Real* beta_next = ws.beta.data();
        Real* beta_cur = ws.beta.data() + S;
        std::fill(beta_next, beta_next + S, Real{0});
        for (int t = T - 1; t >= 0; --t) {
            const auto prior = prior_at(t);
            const Real* ch = ws.channel.data() + static_cast<std::size_t>(t) * B;
            for (int q = 0; q < Q; ++q)
                for (int a = 0; a < 4; ++a)
                    tmp[a * Q + q] = beta_next[4 * q + a];
            for (int a = 0; a < 4; ++a) {
                const Real* c = ch + a * S;
                const Real* bn = tmp + a * Q;
                Real* m = br + a * S;
                for (int k = 0; k < 4; ++k)
                    for (int q = 0; q < Q; ++q)
                        m[k * Q + q] = c[k * Q + q] + bn[q] + prior[a];
            }
            if (exact) {
                for (int s = 0; s < S; ++s)
                    beta_cur[s] = combine4(br[s], br[s + S], br[s + 2 * S], br[s + 3 * S], true);
            } else {
                for (int s = 0; s < S; ++s)
                    beta_cur[s] = std::max(std::max(br[s], br[s + S]), std::max(br[s + 2 * S], br[s + 3 * S]));
            }
            normalize(beta_cur, S);

            if (!tr.tail_step(t)) {
                const Real* a_t = alpha + static_cast<std::size_t>(t) * S;
                std::array<double, 4> lse{};
                for (int a = 0; a < 4; ++a) {
                    const Real* m = br + a * S;
                    for (int s = 0; s < S; ++s)
                        tmp[s] = a_t[s] + m[s];
                    const Real best = max_of(tmp, S);
                    lse[a] = static_cast<double>(best);
                    if (exact) {
                        double sum = 0.0;
                        for (int s = 0; s < S; ++s)
                            sum += std::exp(static_cast<double>(tmp[s] - best));
                        lse[a] += std::log(sum);
                    }
                }
                if (exact) {
                    llr[2 * t] = lse2(lse[0], lse[1]) - lse2(lse[2], lse[3]);
                    llr[2 * t + 1] = lse2(lse[0], lse[2]) - lse2(lse[1], lse[3]);
                } else {
                    llr[2 * t] = std::max(lse[0], lse[1]) - std::max(lse[2], lse[3]);
                    llr[2 * t + 1] = std::max(lse[0], lse[2]) - std::max(lse[1], lse[3]);
                }
            }
            std::swap(beta_cur, beta_next);
        }
        return llr;
    }

private:
    static Real combine4(Real a, Real b, Real c, Real d, bool exact)
    {
        const Real m = std::max(std::max(a, b), std::max(c, d));
        if (!exact || m <= kNegInf)
            return m;
        return m + static_cast<Real>(std::log(std::exp(static_cast<double>(a - m)) + std::exp(static_cast<double>(b - m)) +
                                              std::exp(static_cast<double>(c - m)) + std::exp(static_cast<double>(d - m))));
    }

    static double lse2(double a, double b)
    {
        const double m = std::max(a, b);
        return m + std::log1p(std::exp(-std::abs(a - b)));
    }

    // Eight independent lanes so the reduction vectorizes without fast-math.
    static Real max_of(const Real* v, int len)
    {
        std::array<Real, 8> acc;
        acc.fill(kNegInf);
        for (int i = 0; i < len; i += 8)
            for (int j = 0; j < 8; ++j)
                acc[j] = std::max(acc[j], v[i + j]);
        return *std::max_element(acc.begin(), acc.end());
    }

    static void normalize(Real* v, int len)
    {
        const Real m = max_of(v, len);
        for (int i = 0; i < len; ++i)
            v[i] = std::max(v[i] - m, kNegInf);
    }
};

/// One-shot convenience wrapper; the receiver reuses a workspace instead.
inline RVec equalize(std::span<const cplx> snippet, const IsiTrellis& tr, std::span<const double> apriori,
                     double weight, double noise_var, BcjrMode mode = BcjrMode::max_log)
{
    BcjrWorkspace<double> ws;
    BcjrEqualizer<double>::prepare(snippet, tr, noise_var, ws);
    return BcjrEqualizer<double>::run(tr, apriori, weight, mode, ws);
}

}  // namespace shortpkt
