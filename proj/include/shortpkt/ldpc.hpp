// SPDX-License-Identifier: Apache-2.0
//
// 5G NR LDPC code on base graph 2 with rate matching for very short blocks.
//
// Only the K_b information columns that can carry data are kept: base-graph
// columns K_b..9 hold nothing but filler bits for K_b < 10, so dropping them
// gives the same code. Mother-codeword layout is therefore
//   [ K = K_b*Z information bits | 4*Z core parity | 38*Z extension parity ]
// with filler (shortened) bits at information positions k..K-1.
//
// Rate matching follows redundancy version 0: the first 2*Z bits are never
// sent, then bits are read in order, skipping fillers, until E are collected.
// For k = 64, E = 88 this punctures the first 22 bits, shortens bits 65 and 66
// and leaves the last 9 bits of the 11-column window unsent.

#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "shortpkt/common.hpp"
#include "shortpkt/nr_bg2_table.hpp"

namespace shortpkt {

namespace nr {

inline constexpr std::array<int, 8> kLiftingBases = {2, 3, 5, 7, 9, 11, 13, 15};

/// Lifting set index iLS for Z, or -1 if Z is not a valid 5G lifting size.
inline int lifting_set_index(int z)
{
    for (int i = 0; i < 8; ++i)
        for (int v = kLiftingBases[i]; v <= 384; v *= 2)
            if (v == z)
                return i;
    return -1;
}

/// Smallest lifting size Z with kb * Z >= k.
inline int select_lifting(int kb, int k)
{
    int best = 0;
    for (int a : kLiftingBases)
        for (int v = a; v <= 384; v *= 2)
            if (kb * v >= k && (best == 0 || v < best))
                best = v;
    require(best > 0, "no lifting size large enough");
    return best;
}

/// Number of information columns for base graph 2 (38.212, 5.2.2).
inline int bg2_info_columns(int k)
{
    if (k > 640)
        return 10;
    if (k > 560)
        return 9;
    if (k > 192)
        return 8;
    return 6;
}

}  // namespace nr

enum class BitRole : std::uint8_t { transmitted, punctured, filler };

class LdpcCode {
public:
    /// Code for k information bits sent in tx_len coded bits.
    static LdpcCode build(int k, int tx_len)
    {
        require(k >= 1 && k <= 3840, "information length out of range");
        LdpcCode c;
        c.k_ = k;
        c.tx_len_ = tx_len;
        c.kb_ = nr::bg2_info_columns(k);
        c.z_ = nr::select_lifting(c.kb_, k);
        c.ils_ = nr::lifting_set_index(c.z_);
        c.build_graph();
        c.build_rate_match();
        return c;
    }

    int k() const { return k_; }
    int info_length() const { return kb_ * z_; }  // K, including fillers
    int lifting() const { return z_; }
    int info_columns() const { return kb_; }
    int lifting_set() const { return ils_; }
    int mother_length() const { return cols_ * z_; }
    int check_count() const { return nr::kBg2Rows * z_; }
    int tx_len() const { return tx_len_; }
    double rate() const { return static_cast<double>(k_) / tx_len_; }

    int puncture_head() const { return 2 * z_; }
    /// Unsent bits after the last transmitted one, up to the end of its column.
    int puncture_tail() const
    {
        const int end = tx_positions_.back() + 1;
        return (end + z_ - 1) / z_ * z_ - end;
    }
    /// 0-indexed mother positions of the shortened (filler) bits.
    std::vector<int> filler_positions() const
    {
        std::vector<int> out;
        for (int i = k_; i < info_length(); ++i)
            out.push_back(i);
        return out;
    }

    const std::vector<int>& tx_positions() const { return tx_positions_; }
    const std::vector<BitRole>& roles() const { return roles_; }

    /// Variable indices of each parity check of the lifted matrix.
    const std::vector<std::vector<int>>& checks() const { return checks_; }

    /// Full mother codeword for k information bits (fillers set to zero).
    Bits encode_mother(std::span<const std::uint8_t> u) const
    {
        require(static_cast<int>(u.size()) == k_, "encode expects exactly k information bits");
        const int z = z_;
        Bits c(static_cast<std::size_t>(mother_length()), 0);
        std::copy(u.begin(), u.end(), c.begin());

        auto block = [&](int col) { return std::span<std::uint8_t>(c.data() + col * z, z); };
        auto add_shifted = [z](std::span<std::uint8_t> dst, std::span<const std::uint8_t> src,
                               int s) {
            for (int i = 0; i < z; ++i)
                dst[i] ^= src[(i + s) % z];
        };

        // Core rows 0..3: lambda_r = sum over information columns.
        std::array<Bits, 4> lambda;
        for (auto& l : lambda)
            l.assign(z, 0);
        for (const auto& e : entries_)
            if (e.row < 4 && e.col < kb_)
                add_shifted(lambda[e.row], block(e.col), e.shift);

        // Double-diagonal core: summing the four rows leaves P^a2 * p0.
        Bits sum(z, 0);
        for (const auto& l : lambda)
            for (int i = 0; i < z; ++i)
                sum[i] ^= l[i];
        const int p0 = kb_;
        auto pb0 = block(p0);
        for (int i = 0; i < z; ++i)
            pb0[i] = sum[((i - core_shift_mid_) % z + z) % z];

        auto pb1 = block(p0 + 1);
        auto pb2 = block(p0 + 2);
        auto pb3 = block(p0 + 3);
        std::copy(lambda[0].begin(), lambda[0].end(), pb1.begin());
        add_shifted(pb1, pb0, core_shift_outer_);
        for (int i = 0; i < z; ++i)
            pb2[i] = lambda[1][i] ^ pb1[i];
        std::copy(lambda[2].begin(), lambda[2].end(), pb3.begin());
        add_shifted(pb3, pb0, core_shift_mid_);
        for (int i = 0; i < z; ++i)
            pb3[i] ^= pb2[i];

        // Extension rows: each adds one parity column with an identity block.
        for (int r = 4; r < nr::kBg2Rows; ++r) {
            auto pb = block(kb_ + r);
            for (const auto& e : entries_)
                if (e.row == r && e.col != kb_ + r)
                    add_shifted(pb, block(e.col), e.shift);
        }
        return c;
    }

    Bits rate_match(std::span<const std::uint8_t> mother) const
    {
        require(static_cast<int>(mother.size()) == mother_length(), "mother codeword length");
        Bits out(tx_positions_.size());
        for (std::size_t i = 0; i < out.size(); ++i)
            out[i] = mother[tx_positions_[i]];
        return out;
    }

    /// Rate-matched codeword of tx_len bits.
    Bits encode(std::span<const std::uint8_t> u) const { return rate_match(encode_mother(u)); }

    /// True iff every parity check of the lifted matrix is satisfied.
    bool syndrome_ok(std::span<const std::uint8_t> mother) const
    {
        require(static_cast<int>(mother.size()) == mother_length(), "mother codeword length");
        for (const auto& row : checks_) {
            std::uint8_t p = 0;
            for (int v : row)
                p ^= mother[v];
            if (p)
                return false;
        }
        return true;
    }

private:
    struct Entry {
        int row;
        int col;  // reduced column block
        int shift;
    };

    LdpcCode() = default;

    void build_graph()
    {
        cols_ = kb_ + (nr::kBg2Cols - 10);
        for (const auto& e : nr::kBg2Table) {
            int col = e.col;
            if (col >= kb_ && col < 10)
                continue;  // filler-only columns
            if (col >= 10)
                col = col - 10 + kb_;
            entries_.push_back({e.row, col, e.shift[ils_] % z_});
        }

        // Structure the encoder relies on: column p0 hit in rows 0, 2, 3 with
        // rows 0 and 3 sharing a shift; the rest of the core is a zero-shift
        // double diagonal; each extension row closes with an identity.
        auto shift_at = [&](int r, int c) {
            for (const auto& e : entries_)
                if (e.row == r && e.col == c)
                    return e.shift;
            return -1;
        };
        const int p0 = kb_;
        core_shift_outer_ = shift_at(0, p0);
        core_shift_mid_ = shift_at(2, p0);
        const bool core_ok = core_shift_outer_ >= 0 && core_shift_outer_ == shift_at(3, p0) &&
                             core_shift_mid_ >= 0 && shift_at(1, p0) < 0 &&
                             shift_at(0, p0 + 1) == 0 && shift_at(1, p0 + 1) == 0 &&
                             shift_at(1, p0 + 2) == 0 && shift_at(2, p0 + 2) == 0 &&
                             shift_at(2, p0 + 3) == 0 && shift_at(3, p0 + 3) == 0;
        require(core_ok, "unexpected base graph 2 core structure");
        for (int r = 4; r < nr::kBg2Rows; ++r)
            require(shift_at(r, kb_ + r) == 0, "unexpected base graph 2 extension structure");

        checks_.assign(static_cast<std::size_t>(check_count()), {});
        for (const auto& e : entries_)
            for (int i = 0; i < z_; ++i)
                checks_[e.row * z_ + i].push_back(e.col * z_ + (i + e.shift) % z_);
        for (auto& row : checks_)
            std::sort(row.begin(), row.end());
    }

    void build_rate_match()
    {
        roles_.assign(static_cast<std::size_t>(mother_length()), BitRole::punctured);
        for (int i = k_; i < info_length(); ++i)
            roles_[i] = BitRole::filler;
        for (int i = 2 * z_; i < mother_length() && static_cast<int>(tx_positions_.size()) < tx_len_;
             ++i) {
            if (roles_[i] == BitRole::filler)
                continue;
            roles_[i] = BitRole::transmitted;
            tx_positions_.push_back(i);
        }
        require(tx_len_ > 0 && static_cast<int>(tx_positions_.size()) == tx_len_,
                "tx_len exceeds the rate-matching buffer");
    }

    int k_ = 0;
    int tx_len_ = 0;
    int kb_ = 0;
    int z_ = 0;
    int ils_ = 0;
    int cols_ = 0;
    int core_shift_outer_ = 0;
    int core_shift_mid_ = 0;
    std::vector<Entry> entries_;
    std::vector<std::vector<int>> checks_;
    std::vector<int> tx_positions_;
    std::vector<BitRole> roles_;
};

/// The k = 64, 88-bit code of the default 64-symbol frame.
inline LdpcCode build_code()
{
    return LdpcCode::build(64, 88);
}

}  // namespace shortpkt
