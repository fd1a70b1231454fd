// SPDX-License-Identifier: Apache-2.0
//
// Baseline receiver: detection and synchronization, snippet extraction, then
// iterative equalization and decoding (IEDD) between the BCJR equalizer and
// the min-sum decoder with extrinsic exchange.

#pragma once

#include <optional>
#include <span>
#include <vector>

#include "shortpkt/baseline_tx.hpp"
#include "shortpkt/bcjr.hpp"
#include "shortpkt/chansim.hpp"
#include "shortpkt/detector.hpp"
#include "shortpkt/min_sum.hpp"

namespace shortpkt {

enum class CsiMode { estimated, genie };
enum class NoiseVarMode { ls_residual, nominal };

struct ReceiverConfig {
    int l_iedd = 4;
    int l_bp = 10;
    double damping = 0.7;
    DampingWeight damping_weight = DampingWeight::new_message;
    double apriori_weight = 0.2;
    CsiMode csi_mode = CsiMode::estimated;
    NoiseVarMode noise_var_mode = NoiseVarMode::ls_residual;
    double nominal_noise_var = 1.0;
    BcjrMode bcjr_mode = BcjrMode::max_log;
    /// Keep every round's soft values in the result (tests and diagnostics).
    bool keep_trace = false;

    void validate() const
    {
        require(l_iedd >= 1, "l_iedd must be at least 1");
        require(l_bp >= 1, "l_bp must be at least 1");
        require(damping > 0.0 && damping <= 1.0, "damping must lie in (0, 1]");
        require(apriori_weight >= 0.0, "apriori_weight must be non-negative");
        require(nominal_noise_var > 0.0, "nominal_noise_var must be positive");
    }
};

struct IeddRound {
    RVec apriori;        // decoder extrinsic fed to the equalizer
    RVec eq_posterior;   // equalizer output
    RVec eq_extrinsic;   // eq_posterior - weight * apriori, fed to the decoder
    RVec dec_extrinsic;  // decoder posterior minus its input
    Bits hard;
    bool parity_ok = false;
};

struct ReceiveResult {
    bool detected = false;
    std::optional<int> tau_hat;
    double metric = 0.0;
    Bits u_hat;
    /// Hard decisions after each IEDD round; the last equals u_hat.
    std::vector<Bits> round_bits;
    std::vector<IeddRound> trace;
};

/// Holds per-call scratch; use one instance per worker thread.
class IeddReceiver {
public:
    IeddReceiver(const BaselineTransmitter& tx, const PreambleDetector& det, const ChannelParams& chan,
                 ReceiverConfig cfg)
        : tx_(tx), det_(det), chan_(chan), cfg_(cfg), bp_(tx.code())
    {
        cfg_.validate();
        require(tx.frame_length() == chan.n, "transmitter frame length does not match n");
        require(det.n() == chan.n, "detector window does not match n");
    }

    const ReceiverConfig& config() const { return cfg_; }

    /// Samples handed to the equalizer: n + n_M starting at tau_hat.
    int snippet_len() const { return chan_.n + kChannelMemory; }

    /// Dispatches on csi_mode; genie mode needs the window's truth labels.
    ReceiveResult receive(const RxWindow& w)
    {
        if (cfg_.csi_mode == CsiMode::genie) {
            require(w.truth && w.truth->realization, "genie CSI needs the channel realization");
            return receive_full_csi(w, *w.truth->realization);
        }
        return receive_estimated(w);
    }

    ReceiveResult receive_estimated(const RxWindow& w)
    {
        const DetectionOutcome det = det_.detect(w);
        ReceiveResult res;
        res.metric = det.metric;
        if (!det.detected())
            return res;
        res.detected = true;
        res.tau_hat = det.tau_hat;
        const double nv = cfg_.noise_var_mode == NoiseVarMode::ls_residual ? det.channel_est->noise_var
                                                                           : cfg_.nominal_noise_var;
        decode_snippet(snippet_at(w, *det.tau_hat), det.channel_est->taps, nv, res);
        return res;
    }

    /// Bypasses detection and estimation: true offset and effective response.
    ReceiveResult receive_full_csi(const RxWindow& w, const ChannelRealization& truth)
    {
        ReceiveResult res;
        res.detected = true;
        res.tau_hat = truth.tau_off;
        res.metric = 1.0;
        const CVec eff = effective_response(truth, chan_);
        const double nv = cfg_.noise_var_mode == NoiseVarMode::ls_residual ? truth.sigma2 : cfg_.nominal_noise_var;
        decode_snippet(snippet_at(w, truth.tau_off), eff, nv, res);
        return res;
    }

    /// IEDD on an extracted snippet with a given channel; fills u_hat and round data.
    void decode_snippet(std::span<const cplx> snippet, std::span<const cplx> taps, double noise_var,
                        ReceiveResult& res)
    {
        const IsiTrellis tr = build_trellis(taps, tx_);
        require(static_cast<int>(snippet.size()) == tr.snippet_len(), "snippet length mismatch");
        double power = 0.0;
        for (const auto& v : snippet)
            power += std::norm(v);
        power /= static_cast<double>(snippet.size());
        // Keep the metric scale finite on noiseless input.
        const double nv = std::max(noise_var, std::max(1e-6 * power, 1e-300));

        const int nbits = tr.coded_bits();
        const double w = cfg_.apriori_weight;
        BpConfig bp_cfg;
        bp_cfg.iterations = cfg_.l_bp;
        bp_cfg.damping = cfg_.damping;
        bp_cfg.damping_weight = cfg_.damping_weight;

        RVec apriori(nbits, 0.0);
        RVec eq_ext(nbits);
        res.round_bits.clear();
        res.trace.clear();
        if (cfg_.bcjr_mode == BcjrMode::exact) {
            BcjrEqualizer<double>::prepare(snippet, tr, nv, ws_exact_);
        } else {
            BcjrEqualizer<float>::prepare(snippet, tr, nv, ws_);
        }
        for (int round = 0; round < cfg_.l_iedd; ++round) {
            const RVec post = cfg_.bcjr_mode == BcjrMode::exact
                                  ? BcjrEqualizer<double>::run(tr, apriori, w, cfg_.bcjr_mode, ws_exact_)
                                  : BcjrEqualizer<float>::run(tr, apriori, w, cfg_.bcjr_mode, ws_);
            for (int i = 0; i < nbits; ++i)
                eq_ext[i] = post[i] - w * apriori[i];
            BpResult bp = bp_.decode(eq_ext, bp_cfg, bp_ws_);
            if (cfg_.keep_trace)
                res.trace.push_back({apriori, post, eq_ext, bp.extrinsic, bp.hard, bp.parity_ok});
            res.round_bits.push_back(bp.hard);
            apriori = std::move(bp.extrinsic);
        }
        res.u_hat = res.round_bits.back();
    }

private:
    std::span<const cplx> snippet_at(const RxWindow& w, int tau) const
    {
        require(static_cast<int>(w.samples.size()) == 2 * chan_.n, "window must hold 2n samples");
        require(tau >= 0 && tau + snippet_len() <= static_cast<int>(w.samples.size()), "snippet outside window");
        return std::span<const cplx>(w.samples).subspan(tau, snippet_len());
    }

    BaselineTransmitter tx_;
    PreambleDetector det_;
    ChannelParams chan_;
    ReceiverConfig cfg_;
    MinSumDecoder bp_;
    MinSumWorkspace bp_ws_;
    BcjrWorkspace<float> ws_;
    BcjrWorkspace<double> ws_exact_;
};

}  // namespace shortpkt
