// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include "shortpkt/receiver.hpp"

using namespace shortpkt;

namespace {

struct Link {
    LdpcCode code = build_code();
    BaselineTransmitter tx{code, PreambleSpec{}};
    ChannelParams chan{};
    PreambleDetector det{tx.preamble(), 64, DetectorConfig{DetectionStatistic::multipath_projection,
                                                           ChannelEstimator::least_squares, 0.5}};

    IeddReceiver receiver(ReceiverConfig cfg = {}) const { return IeddReceiver(tx, det, chan, cfg); }
};

RxWindow noiseless_window(const Link& l, const Bits& u, ChannelRealization r)
{
    RxWindow w;
    w.samples = propagate_noiseless(l.tx.build(u).symbols, r, l.chan);
    w.truth = WindowTruth{true, r.tau_off, r};
    return w;
}

}  // namespace

TEST(Receiver, NoiselessSingleTapRecoversMessage)
{
    const Link l;
    Rng rng(1);
    ChannelRealization r;
    r.taps = {1.0, 0.0, 0.0, 0.0, 0.0};
    r.tau_off = 17;
    r.tau_sto = 0.0;
    r.sigma2 = 0.0;
    for (auto mode : {BcjrMode::max_log, BcjrMode::exact}) {
        ReceiverConfig cfg;
        cfg.bcjr_mode = mode;
        IeddReceiver rx = l.receiver(cfg);
        for (int t = 0; t < 5; ++t) {
            const Bits u = rng.bits(64);
            const ReceiveResult res = rx.receive(noiseless_window(l, u, r));
            ASSERT_TRUE(res.detected);
            EXPECT_EQ(*res.tau_hat, 17);
            EXPECT_EQ(res.u_hat, u);
            EXPECT_EQ(res.round_bits.size(), 4u);
        }
    }
}

TEST(Receiver, GenieMatchesEstimatedOnNoiselessInput)
{
    const Link l;
    Rng rng(2);
    ReceiverConfig est_cfg;
    ReceiverConfig genie_cfg;
    genie_cfg.csi_mode = CsiMode::genie;
    IeddReceiver est = l.receiver(est_cfg);
    IeddReceiver genie = l.receiver(genie_cfg);
    for (int t = 0; t < 20; ++t) {
        ChannelRealization r = draw_realization(rng, l.chan, 0.0);
        r.tau_sto = 0.0;
        const Bits u = rng.bits(64);
        const RxWindow w = noiseless_window(l, u, r);
        const ReceiveResult a = est.receive(w);
        const ReceiveResult b = genie.receive(w);
        ASSERT_TRUE(a.detected);
        EXPECT_EQ(a.u_hat, b.u_hat);
        EXPECT_EQ(b.u_hat, u);
    }
}

TEST(Receiver, RoundTraceFollowsTheLoop)
{
    const Link l;
    Rng rng(3);
    ReceiverConfig cfg;
    cfg.keep_trace = true;
    cfg.csi_mode = CsiMode::genie;
    IeddReceiver rx = l.receiver(cfg);
    const ChannelRealization r = draw_realization(rng, l.chan, snr_to_noise_var(8.0));
    const RxWindow w = propagate(l.tx.build(rng.bits(64)).symbols, r, l.chan, rng);
    const ReceiveResult res = rx.receive(w);
    ASSERT_EQ(res.trace.size(), 4u);
    for (double v : res.trace[0].apriori)
        EXPECT_EQ(v, 0.0);
    for (std::size_t k = 0; k < res.trace.size(); ++k) {
        const IeddRound& rd = res.trace[k];
        for (std::size_t i = 0; i < rd.eq_posterior.size(); ++i)
            EXPECT_NEAR(rd.eq_extrinsic[i], rd.eq_posterior[i] - cfg.apriori_weight * rd.apriori[i], 1e-12);
        if (k + 1 < res.trace.size()) {
            EXPECT_EQ(res.trace[k + 1].apriori, rd.dec_extrinsic);
        }
        EXPECT_EQ(res.round_bits[k], rd.hard);
    }
    EXPECT_EQ(res.u_hat, res.round_bits.back());
}

TEST(Receiver, Deterministic)
{
    const Link l;
    Rng rng(4);
    const ChannelRealization r = draw_realization(rng, l.chan, snr_to_noise_var(10.0));
    const RxWindow w = propagate(l.tx.build(rng.bits(64)).symbols, r, l.chan, rng);
    IeddReceiver a = l.receiver();
    IeddReceiver b = l.receiver();
    const ReceiveResult ra = a.receive(w);
    const ReceiveResult rb = b.receive(w);
    const ReceiveResult ra2 = a.receive(w);
    EXPECT_EQ(ra.u_hat, rb.u_hat);
    EXPECT_EQ(ra.round_bits, ra2.round_bits);
    EXPECT_EQ(ra.metric, rb.metric);
}

TEST(Receiver, NoneWindowBelowThresholdIsNotDetected)
{
    const Link l;
    Rng rng(5);
    IeddReceiver rx = l.receiver();
    const RxWindow w = none_window(0.0, 64, rng);
    const ReceiveResult res = rx.receive(w);
    EXPECT_FALSE(res.detected);
    EXPECT_TRUE(res.u_hat.empty());
}

TEST(Receiver, GenieNeedsTruth)
{
    const Link l;
    ReceiverConfig cfg;
    cfg.csi_mode = CsiMode::genie;
    IeddReceiver rx = l.receiver(cfg);
    RxWindow w;
    w.samples.assign(128, cplx{});
    EXPECT_THROW(rx.receive(w), ConfigError);
}

TEST(Receiver, ValidatesConfiguration)
{
    const Link l;
    ReceiverConfig bad;
    bad.l_iedd = 0;
    EXPECT_THROW(l.receiver(bad), ConfigError);
    bad = {};
    bad.damping = 1.5;
    EXPECT_THROW(l.receiver(bad), ConfigError);
    bad = {};
    bad.apriori_weight = -0.1;
    EXPECT_THROW(l.receiver(bad), ConfigError);
    ChannelParams other;
    other.n = 48;
    EXPECT_THROW(IeddReceiver(l.tx, l.det, other, {}), ConfigError);
    EXPECT_EQ(l.receiver().snippet_len(), 69);
}

TEST(Receiver, NominalNoiseVarianceStillDecodesCleanInput)
{
    const Link l;
    Rng rng(6);
    ReceiverConfig cfg;
    cfg.noise_var_mode = NoiseVarMode::nominal;
    cfg.nominal_noise_var = 0.05;
    IeddReceiver rx = l.receiver(cfg);
    ChannelRealization r = draw_realization(rng, l.chan, 0.0);
    r.tau_sto = 0.0;
    const Bits u = rng.bits(64);
    EXPECT_EQ(rx.receive(noiseless_window(l, u, r)).u_hat, u);
}
