// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <cmath>

#include "reference_bcjr.hpp"
#include "shortpkt/bcjr.hpp"
#include "shortpkt/random.hpp"

using namespace shortpkt;
using ref::brute_force;
using ref::channel_output;
using ref::random_digits;

TEST(Bcjr, ExactModeMatchesBruteForce)
{
    Rng rng(1);
    const CVec preamble = {cplx(1, 0), cplx(0, 1), cplx(-1, 0)};
    for (int inst = 0; inst < 120; ++inst) {
        // Two active taps at random delays within the span.
        std::array<cplx, 6> taps{};
        const int d0 = rng.uniform_int(0, 6);
        int d1 = rng.uniform_int(0, 6);
        if (d1 == d0)
            d1 = (d0 + 1) % 6;
        taps[d0] = rng.complex_normal(1.0);
        taps[d1] = rng.complex_normal(0.5);
        const IsiTrellis tr(taps, preamble, 6, 0.9);
        const double nv = 0.05 + 0.5 * rng.uniform();
        const CVec y = channel_output(tr, random_digits(6, rng), nv, rng);
        RVec prior(12, 0.0);
        const double weight = inst % 3 == 0 ? 0.0 : (inst % 3 == 1 ? 1.0 : 0.5);
        for (auto& v : prior)
            v = 3.0 * rng.normal();
        const RVec got = equalize(y, tr, prior, weight, nv, BcjrMode::exact);
        const RVec want = brute_force(y, tr, prior, weight, nv);
        for (int i = 0; i < 12; ++i)
            ASSERT_NEAR(got[i], want[i], 1e-6) << "instance " << inst << " bit " << i;
    }
}

TEST(Bcjr, SingleTapMatchedFilterLlr)
{
    Rng rng(2);
    std::array<cplx, 6> taps{};
    taps[0] = 1.0;
    const double scale = 1.1;
    const IsiTrellis tr(taps, CVec(4, cplx(1, 0)), 10, scale);
    const double nv = 0.3;
    const CVec y = channel_output(tr, random_digits(10, rng), nv, rng);
    const RVec prior(20, 0.0);
    for (auto mode : {BcjrMode::exact, BcjrMode::max_log}) {
        const RVec llr = equalize(y, tr, prior, 0.0, nv, mode);
        for (int i = 0; i < 10; ++i) {
            const cplx v = y[4 + i];
            EXPECT_NEAR(llr[2 * i], 2.0 * std::sqrt(2.0) * scale * v.real() / nv, 1e-9);
            EXPECT_NEAR(llr[2 * i + 1], 2.0 * std::sqrt(2.0) * scale * v.imag() / nv, 1e-9);
        }
    }
}

TEST(Bcjr, NegatedInputFlipsEveryLlr)
{
    Rng rng(3);
    std::array<cplx, 6> taps{};
    taps[0] = cplx(0.8, 0.3);
    const IsiTrellis tr(taps, CVec(3, cplx(1, 0)), 8);
    const CVec y = channel_output(tr, random_digits(8, rng), 0.2, rng);
    CVec neg = y;
    for (auto& v : neg)
        v = -v;
    const RVec prior(16, 0.0);
    const RVec a = equalize(y, tr, prior, 1.0, 0.2, BcjrMode::exact);
    const RVec b = equalize(neg, tr, prior, 1.0, 0.2, BcjrMode::exact);
    for (std::size_t i = 0; i < a.size(); ++i)
        EXPECT_NEAR(a[i], -b[i], 1e-9);
}

TEST(Bcjr, ZeroWeightIgnoresApriori)
{
    Rng rng(4);
    std::array<cplx, 6> taps{};
    for (auto& t : taps)
        t = rng.complex_normal(1.0 / 6.0);
    const IsiTrellis tr(taps, CVec(5, cplx(0, 1)), 12);
    const CVec y = channel_output(tr, random_digits(12, rng), 0.1, rng);
    RVec prior(24);
    for (auto& v : prior)
        v = 10.0 * rng.normal();
    const RVec a = equalize(y, tr, RVec(24, 0.0), 1.0, 0.1);
    const RVec b = equalize(y, tr, prior, 0.0, 0.1);
    EXPECT_EQ(a, b);
}

TEST(Bcjr, MaxLogMatchesExactWhenOnePathDominates)
{
    Rng rng(5);
    std::array<cplx, 6> taps{};
    taps[1] = 1.0;
    taps[2] = 0.4;
    taps[4] = cplx(0.1, 0.2);
    const IsiTrellis tr(taps, CVec(4, cplx(1, 0)), 10);
    const double nv = 1e-3;
    const CVec y = channel_output(tr, random_digits(10, rng), nv, rng);
    const RVec prior(20, 0.0);
    const RVec ml = equalize(y, tr, prior, 0.0, nv, BcjrMode::max_log);
    const RVec ex = equalize(y, tr, prior, 0.0, nv, BcjrMode::exact);
    for (std::size_t i = 0; i < ml.size(); ++i)
        EXPECT_NEAR(ml[i], ex[i], 1e-6 * std::abs(ex[i]) + 1e-6);
}

TEST(Bcjr, FloatWorkspaceTracksDouble)
{
    Rng rng(6);
    std::array<cplx, 6> taps{};
    for (auto& t : taps)
        t = rng.complex_normal(1.0 / 6.0);
    const IsiTrellis tr(taps, CVec(20, cplx(1, 0)), 44);
    const double nv = 0.05;
    const CVec y = channel_output(tr, random_digits(44, rng), nv, rng);
    RVec prior(88);
    for (auto& v : prior)
        v = rng.normal();
    const RVec d = equalize(y, tr, prior, 1.0, nv);
    BcjrWorkspace<float> ws;
    BcjrEqualizer<float>::prepare(y, tr, nv, ws);
    const RVec f = BcjrEqualizer<float>::run(tr, prior, 1.0, BcjrMode::max_log, ws);
    for (std::size_t i = 0; i < d.size(); ++i)
        EXPECT_NEAR(f[i], d[i], 1e-3 * std::abs(d[i]) + 1e-2);
}

TEST(Bcjr, TrellisDimensions)
{
    EXPECT_EQ(IsiTrellis::kStates, 1024);
    EXPECT_EQ(IsiTrellis::kBranches, 4096);
    std::array<cplx, 6> taps{};
    const IsiTrellis tr(taps, CVec(20, cplx(1, 0)), 44);
    EXPECT_EQ(tr.steps(), 49);
    EXPECT_EQ(tr.snippet_len(), 69);
    EXPECT_EQ(tr.coded_bits(), 88);
}

TEST(Bcjr, RejectsMismatchedLengths)
{
    std::array<cplx, 6> taps{};
    taps[0] = 1.0;
    const IsiTrellis tr(taps, CVec(4, cplx(1, 0)), 10);
    EXPECT_THROW(equalize(CVec(18), tr, RVec(20, 0.0), 1.0, 0.1), ConfigError);
    EXPECT_THROW(equalize(CVec(19), tr, RVec(19, 0.0), 1.0, 0.1), ConfigError);
    EXPECT_THROW(equalize(CVec(19), tr, RVec(20, 0.0), 1.0, 0.0), ConfigError);
    const CVec five(5);
    EXPECT_THROW(IsiTrellis(five, CVec(4), 10), ConfigError);
}

TEST(Bcjr, CorrectAprioriStrengthensNeighbours)
{
    // Knowing every other symbol removes the ISI around the remaining one.
    Rng rng(7);
    double with = 0.0, without = 0.0;
    for (int inst = 0; inst < 200; ++inst) {
        std::array<cplx, 6> taps{};
        taps[0] = rng.complex_normal(0.5);
        taps[1] = rng.complex_normal(0.5);
        const IsiTrellis tr(taps, CVec(4, cplx(1, 0)), 8);
        const auto digits = random_digits(8, rng);
        const CVec y = channel_output(tr, digits, 0.3, rng);
        RVec prior(16, 0.0);
        for (int i = 0; i < 8; ++i) {
            if (i == 4)
                continue;
            prior[2 * i] = (digits[i] >> 1) ? -30.0 : 30.0;
            prior[2 * i + 1] = (digits[i] & 1) ? -30.0 : 30.0;
        }
        const RVec a = equalize(y, tr, prior, 1.0, 0.3, BcjrMode::exact);
        const RVec b = equalize(y, tr, RVec(16, 0.0), 1.0, 0.3, BcjrMode::exact);
        const double sign = (digits[4] >> 1) ? -1.0 : 1.0;
        with += sign * a[8];
        without += sign * b[8];
    }
    EXPECT_GT(with, without);
}
