// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <algorithm>

#include "reference_ldpc.hpp"
#include "shortpkt/ldpc.hpp"
#include "shortpkt/nr_bg2_table.hpp"
#include "shortpkt/random.hpp"

using namespace shortpkt;

TEST(Bg2Table, EmbeddedTableMatchesCsvAsset)
{
    const auto csv = ref::read_bg2_csv();
    ASSERT_EQ(csv.size(), nr::kBg2Table.size());
    for (std::size_t i = 0; i < csv.size(); ++i) {
        EXPECT_EQ(csv[i].row, nr::kBg2Table[i].row);
        EXPECT_EQ(csv[i].col, nr::kBg2Table[i].col);
        for (int s = 0; s < 8; ++s)
            EXPECT_EQ(csv[i].shift[s], nr::kBg2Table[i].shift[s]) << "entry " << i << " set " << s;
    }
}

TEST(Bg2Table, Shape)
{
    const auto csv = ref::read_bg2_csv();
    int max_row = 0, max_col = 0;
    for (const auto& e : csv) {
        max_row = std::max(max_row, e.row);
        max_col = std::max(max_col, e.col);
    }
    EXPECT_EQ(max_row + 1, 42);
    EXPECT_EQ(max_col + 1, 52);
}

TEST(Lifting, SelectionRules)
{
    EXPECT_EQ(nr::bg2_info_columns(64), 6);
    EXPECT_EQ(nr::bg2_info_columns(192), 6);
    EXPECT_EQ(nr::bg2_info_columns(193), 8);
    EXPECT_EQ(nr::bg2_info_columns(561), 9);
    EXPECT_EQ(nr::bg2_info_columns(641), 10);
    EXPECT_EQ(nr::select_lifting(6, 64), 11);
    EXPECT_EQ(nr::select_lifting(6, 40), 7);
    EXPECT_EQ(nr::select_lifting(6, 48), 8);
    EXPECT_EQ(nr::select_lifting(6, 56), 10);
    EXPECT_EQ(nr::select_lifting(6, 96), 16);
    EXPECT_EQ(nr::lifting_set_index(11), 5);
    EXPECT_EQ(nr::lifting_set_index(16), 0);
    EXPECT_EQ(nr::lifting_set_index(17), -1);
}

TEST(BuildCode, DefaultDimensions)
{
    const LdpcCode c = build_code();
    EXPECT_EQ(c.lifting(), 11);
    EXPECT_EQ(c.info_columns(), 6);
    EXPECT_EQ(c.info_length(), 66);
    EXPECT_EQ(c.k(), 64);
    EXPECT_EQ(c.tx_len(), 88);
    EXPECT_EQ(c.check_count(), 462);
    EXPECT_DOUBLE_EQ(c.rate(), 64.0 / 88.0);
    EXPECT_EQ(c.puncture_head(), 22);
    EXPECT_EQ(c.puncture_tail(), 9);
    EXPECT_EQ(c.filler_positions(), (std::vector<int>{64, 65}));
}

TEST(BuildCode, RateMatchWindow)
{
    // First 22 bits punctured, bits 65 and 66 (1-indexed) shortened, the
    // 121-bit window ends with 9 unsent bits: positions 22..111 minus 64, 65.
    const LdpcCode c = build_code();
    std::vector<int> expect;
    for (int i = 22; i < 112; ++i)
        if (i != 64 && i != 65)
            expect.push_back(i);
    EXPECT_EQ(c.tx_positions(), expect);
    EXPECT_EQ(22 + 88 + 2 + 9, 121);
    for (int i = 0; i < c.mother_length(); ++i) {
        const BitRole want = (i == 64 || i == 65)                     ? BitRole::filler
                             : (std::find(expect.begin(), expect.end(), i) != expect.end()) ? BitRole::transmitted
                                                                                            : BitRole::punctured;
        EXPECT_EQ(c.roles()[i], want) << "position " << i;
    }
}

TEST(Encode, AllZero)
{
    const LdpcCode c = build_code();
    const Bits u(64, 0);
    const Bits cw = c.encode(u);
    ASSERT_EQ(cw.size(), 88u);
    EXPECT_TRUE(std::all_of(cw.begin(), cw.end(), [](auto b) { return b == 0; }));
}

TEST(Encode, SatisfiesFullParityCheckMatrix)
{
    // Checked against H built independently from the CSV asset, 1000 random words.
    const LdpcCode c = build_code();
    const ref::FullCode full = ref::full_code(11);
    ASSERT_EQ(full.checks.size(), 462u);
    Rng rng(1);
    for (int t = 0; t < 1000; ++t) {
        const Bits m = c.encode_mother(rng.bits(64));
        ASSERT_TRUE(c.syndrome_ok(m));
        ASSERT_TRUE(ref::parity_ok(full, ref::to_full(m, 6, 11))) << "trial " << t;
    }
}

TEST(Encode, SystematicAndFillersZero)
{
    const LdpcCode c = build_code();
    Rng rng(2);
    const Bits u = rng.bits(64);
    const Bits m = c.encode_mother(u);
    EXPECT_TRUE(std::equal(u.begin(), u.end(), m.begin()));
    EXPECT_EQ(m[64], 0);
    EXPECT_EQ(m[65], 0);
    const Bits tx = c.encode(u);
    for (std::size_t i = 0; i < tx.size(); ++i)
        EXPECT_EQ(tx[i], m[c.tx_positions()[i]]);
}

TEST(Encode, SingleBitChangesGiveDistinctCodewords)
{
    const LdpcCode c = build_code();
    Rng rng(3);
    const Bits u = rng.bits(64);
    const Bits base = c.encode(u);
    for (int i = 0; i < 64; ++i) {
        Bits v = u;
        v[i] ^= 1;
        const Bits other = c.encode(v);
        int d = 0;
        for (std::size_t j = 0; j < base.size(); ++j)
            d += base[j] != other[j];
        EXPECT_GE(d, 2) << "flip " << i;
    }
}

TEST(Encode, OtherLengthsSatisfyParity)
{
    Rng rng(4);
    for (int n : {40, 48, 56, 96}) {
        const int np = n <= 48 ? 16 : (n <= 64 ? 20 : 24);
        const LdpcCode c = LdpcCode::build(n, 2 * (n - np));
        EXPECT_EQ(static_cast<int>(c.tx_positions().size()), 2 * (n - np));
        const ref::FullCode full = ref::full_code(c.lifting());
        for (int t = 0; t < 50; ++t) {
            const Bits m = c.encode_mother(rng.bits(static_cast<std::size_t>(n)));
            ASSERT_TRUE(c.syndrome_ok(m));
            ASSERT_TRUE(ref::parity_ok(full, ref::to_full(m, c.info_columns(), c.lifting())));
        }
    }
}

TEST(Encode, RejectsWrongLength)
{
    const LdpcCode c = build_code();
    const Bits u(63, 0);
    EXPECT_THROW(c.encode(u), ConfigError);
    EXPECT_THROW(LdpcCode::build(64, 10000), ConfigError);
    EXPECT_THROW(LdpcCode::build(0, 88), ConfigError);
}
