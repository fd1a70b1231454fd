// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <cmath>

#include "shortpkt/baseline_tx.hpp"
#include "shortpkt/random.hpp"

using namespace shortpkt;

TEST(ZadoffChu, UnitModulusAndStartsAtOne)
{
    for (int n : {16, 20, 24, 31, 63}) {
        for (int q : {1, 3, 7}) {
            if (std::gcd(n, q) != 1)
                continue;
            const CVec z = zadoff_chu(n, q);
            ASSERT_EQ(static_cast<int>(z.size()), n);
            EXPECT_NEAR(z[0].real(), 1.0, 1e-15);
            EXPECT_NEAR(z[0].imag(), 0.0, 1e-15);
            for (const auto& v : z)
                EXPECT_NEAR(std::abs(v), 1.0, 1e-12);
        }
    }
}

TEST(ZadoffChu, MatchesClosedForm)
{
    const CVec even = zadoff_chu(20, 7);
    for (int m = 0; m < 20; ++m) {
        const double ph = -kPi * 7.0 * m * m / 20.0;
        EXPECT_NEAR(std::abs(even[m] - cplx(std::cos(ph), std::sin(ph))), 0.0, 1e-12);
    }
    const CVec odd = zadoff_chu(13, 5);
    for (int m = 0; m < 13; ++m) {
        const double ph = -kPi * 5.0 * m * (m + 1) / 13.0;
        EXPECT_NEAR(std::abs(odd[m] - cplx(std::cos(ph), std::sin(ph))), 0.0, 1e-12);
    }
}

TEST(ZadoffChu, IdealPeriodicAutocorrelation)
{
    const CVec z = zadoff_chu(20, 7);
    for (int lag = 1; lag < 20; ++lag) {
        cplx acc{};
        for (int m = 0; m < 20; ++m)
            acc += z[m] * std::conj(z[(m + lag) % 20]);
        EXPECT_NEAR(std::abs(acc), 0.0, 1e-9) << "lag " << lag;
    }
}

TEST(ZadoffChu, RejectsNonCoprimeRoot)
{
    EXPECT_THROW(zadoff_chu(20, 4), ConfigError);
    EXPECT_THROW(zadoff_chu(20, 10), ConfigError);
    EXPECT_THROW(zadoff_chu(0, 1), ConfigError);
}

TEST(Qpsk, GrayLabels)
{
    const double a = 1.0 / std::sqrt(2.0);
    const std::uint8_t bits[] = {0, 0, 0, 1, 1, 0, 1, 1};
    const CVec s = qpsk_map(bits);
    ASSERT_EQ(s.size(), 4u);
    EXPECT_NEAR(std::abs(s[0] - cplx(a, a)), 0.0, 1e-15);
    EXPECT_NEAR(std::abs(s[1] - cplx(a, -a)), 0.0, 1e-15);
    EXPECT_NEAR(std::abs(s[2] - cplx(-a, a)), 0.0, 1e-15);
    EXPECT_NEAR(std::abs(s[3] - cplx(-a, -a)), 0.0, 1e-15);
    EXPECT_NEAR(s[0].real(), 0.7071, 1e-4);
}

TEST(Qpsk, RoundTripAndUnitEnergy)
{
    Rng rng(1);
    const Bits b = rng.bits(88);
    const CVec s = qpsk_map(b);
    ASSERT_EQ(s.size(), 44u);
    for (const auto& v : s)
        EXPECT_NEAR(std::norm(v), 1.0, 1e-15);
    EXPECT_EQ(qpsk_demap_hard(s), b);
}

TEST(Qpsk, RejectsOddLength)
{
    const std::uint8_t bits[] = {0, 1, 1};
    EXPECT_THROW(qpsk_map(bits), ConfigError);
}

TEST(PreambleTable, PerLengthSizes)
{
    EXPECT_EQ(preamble_length_for(40), 16);
    EXPECT_EQ(preamble_length_for(48), 16);
    EXPECT_EQ(preamble_length_for(56), 20);
    EXPECT_EQ(preamble_length_for(64), 20);
    EXPECT_EQ(preamble_length_for(96), 24);
    EXPECT_THROW(preamble_length_for(32), ConfigError);
}

TEST(BuildFrame, DefaultLayout)
{
    const LdpcCode code = build_code();
    const BaselineTransmitter tx(code, PreambleSpec{});
    EXPECT_EQ(tx.frame_length(), 64);
    Rng rng(2);
    const Bits u = rng.bits(64);
    const Frame f = tx.build(u);
    ASSERT_EQ(f.symbols.size(), 64u);
    EXPECT_EQ(f.kind, FrameKind::baseline);
    EXPECT_EQ(f.info_bits, u);

    // Preamble is the scaled ZC sequence; payload is the scaled QPSK image of the codeword.
    const CVec z = zadoff_chu(20, 7);
    for (int m = 0; m < 20; ++m)
        EXPECT_NEAR(std::abs(f.symbols[m] - tx.scale() * z[m]), 0.0, 1e-12);
    const CVec payload = qpsk_map(code.encode(u));
    for (int m = 0; m < 44; ++m)
        EXPECT_NEAR(std::abs(f.symbols[20 + m] - tx.scale() * payload[m]), 0.0, 1e-12);
}

TEST(BuildFrame, AllZeroMessage)
{
    const LdpcCode code = build_code();
    const BaselineTransmitter tx(code, PreambleSpec{});
    const Bits u(64, 0);
    const Frame f = tx.build(u);
    const cplx zero_symbol = tx.scale() * qpsk_symbol(0, 0);
    for (int m = 20; m < 64; ++m)
        EXPECT_NEAR(std::abs(f.symbols[m] - zero_symbol), 0.0, 1e-12);
}

TEST(BuildFrame, UnitAveragePowerForAllLengths)
{
    Rng rng(3);
    for (int n : {40, 48, 56, 64, 96}) {
        const int np = preamble_length_for(n);
        const LdpcCode code = LdpcCode::build(n, 2 * (n - np));
        const BaselineTransmitter tx(code, PreambleSpec{np, 7});
        ASSERT_EQ(tx.frame_length(), n);
        for (int t = 0; t < 20; ++t) {
            const Frame f = tx.build(rng.bits(static_cast<std::size_t>(n)));
            double p = 0.0;
            for (const auto& v : f.symbols)
                p += std::norm(v);
            EXPECT_NEAR(p / n, 1.0, 1e-6) << "n " << n;
        }
    }
}

TEST(BuildFrame, NinetySixUsesTwentyFourPilots)
{
    const LdpcCode code = LdpcCode::build(96, 2 * (96 - 24));
    const BaselineTransmitter tx(code, PreambleSpec{preamble_length_for(96), 7});
    EXPECT_EQ(tx.preamble().size(), 24u);
    EXPECT_EQ(tx.frame_length(), 96);
}

TEST(BuildFrame, DeterministicAndLengthChecked)
{
    const LdpcCode code = build_code();
    const Bits u(64, 1);
    const Frame a = build_frame(u, code, PreambleSpec{});
    const Frame b = build_frame(u, code, PreambleSpec{});
    EXPECT_EQ(a.symbols, b.symbols);
    const Bits short_u(63, 0);
    EXPECT_THROW(build_frame(short_u, code, PreambleSpec{}), ConfigError);
}
