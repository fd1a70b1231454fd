// SPDX-License-Identifier: Apache-2.0
//
// Flooding min-sum belief propagation with check-message damping and
// extrinsic soft output on the transmitted positions.

#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <vector>

#include "shortpkt/common.hpp"
#include "shortpkt/ldpc.hpp"

namespace shortpkt {

/// Which message the damping factor weights:
///   new_message: m <- lambda * m_new + (1 - lambda) * m_prev
///   old_message: m <- (1 - lambda) * m_new + lambda * m_prev
enum class DampingWeight { new_message, old_message };

struct BpConfig {
    int iterations = 10;
    double damping = 0.7;
    DampingWeight damping_weight = DampingWeight::new_message;
    bool early_stop = true;
    /// Finite stand-in for the infinite reliability of shortened bits.
    double shortened_llr = 127.0;
};

struct BpResult {
    Bits hard;       // k information bits
    RVec extrinsic;  // per transmitted bit: posterior minus input
    bool parity_ok = false;
    int iterations = 0;
};

/// Per-caller scratch space; one per concurrent decode.
struct MinSumWorkspace {
    RVec input;
    RVec total;
    RVec c2v;
    RVec c2v_next;
};

class MinSumDecoder {
public:
    /// Builds the decoding graph. Checks that contain a punctured bit of
    /// degree one can only ever emit zero messages, so they are dropped
    /// together with that bit; the result decodes identically.
    explicit MinSumDecoder(const LdpcCode& code) : k_(code.k()), tx_len_(code.tx_len())
    {
        const auto& roles = code.roles();
        const auto& checks = code.checks();
        std::vector<int> degree(roles.size(), 0);
        for (const auto& row : checks)
            for (int v : row)
                ++degree[v];

        std::vector<int> local(roles.size(), -1);
        check_start_.push_back(0);
        for (const auto& row : checks) {
            const bool vacuous = std::any_of(row.begin(), row.end(), [&](int v) {
                return roles[v] == BitRole::punctured && degree[v] == 1;
            });
            if (vacuous)
                continue;
            for (int v : row) {
                if (local[v] < 0) {
                    local[v] = static_cast<int>(var_mother_.size());
                    var_mother_.push_back(v);
                }
                edge_var_.push_back(local[v]);
            }
            check_start_.push_back(static_cast<int>(edge_var_.size()));
        }

        var_role_.resize(var_mother_.size());
        for (std::size_t i = 0; i < var_mother_.size(); ++i)
            var_role_[i] = roles[var_mother_[i]];

        for (int v : code.tx_positions()) {
            require(local[v] >= 0, "transmitted bit missing from decoding graph");
            tx_local_.push_back(local[v]);
        }
        for (int i = 0; i < k_; ++i) {
            require(local[i] >= 0, "information bit missing from decoding graph");
            info_local_.push_back(local[i]);
        }
    }

    int check_count() const { return static_cast<int>(check_start_.size()) - 1; }
    int variable_count() const { return static_cast<int>(var_mother_.size()); }
    int edge_count() const { return static_cast<int>(edge_var_.size()); }

    BpResult decode(std::span<const double> llr, const BpConfig& cfg, MinSumWorkspace& ws) const
    {
        require(static_cast<int>(llr.size()) == tx_len_, "decoder input length must equal tx_len");
        require(cfg.iterations >= 1, "BP needs at least one iteration");
        require(cfg.damping > 0.0 && cfg.damping <= 1.0, "damping must lie in (0, 1]");
        for (double v : llr)
            require(std::isfinite(v), "non-finite decoder input LLR");

        const std::size_t nv = var_mother_.size();
        const std::size_t ne = edge_var_.size();
        ws.input.assign(nv, 0.0);
        for (std::size_t i = 0; i < nv; ++i)
            if (var_role_[i] == BitRole::filler)
                ws.input[i] = cfg.shortened_llr;
        for (std::size_t i = 0; i < tx_local_.size(); ++i)
            ws.input[tx_local_[i]] = llr[i];
        ws.total = ws.input;
        ws.c2v.assign(ne, 0.0);
        ws.c2v_next.assign(ne, 0.0);

        const double w_new =
            cfg.damping_weight == DampingWeight::new_message ? cfg.damping : 1.0 - cfg.damping;
        const double w_old = 1.0 - w_new;

        BpResult res;
        for (int it = 0; it < cfg.iterations; ++it) {
            for (int c = 0; c < check_count(); ++c) {
                const int b = check_start_[c];
                const int e_end = check_start_[c + 1];
                double min1 = std::numeric_limits<double>::infinity();
                double min2 = min1;
                int arg = -1;
                bool neg = false;
                for (int e = b; e < e_end; ++e) {
                    const double m = ws.total[edge_var_[e]] - ws.c2v[e];
                    const double a = std::abs(m);
                    neg ^= (m < 0.0);
                    if (a < min1) {
                        min2 = min1;
                        min1 = a;
                        arg = e;
                    } else if (a < min2) {
                        min2 = a;
                    }
                }
                for (int e = b; e < e_end; ++e) {
                    const double m = ws.total[edge_var_[e]] - ws.c2v[e];
                    const bool s = neg ^ (m < 0.0);
                    const double mag = (e == arg) ? min2 : min1;
                    const double fresh = s ? -mag : mag;
                    ws.c2v_next[e] = w_new * fresh + w_old * ws.c2v[e];
                }
            }
            std::swap(ws.c2v, ws.c2v_next);
            ws.total = ws.input;
            for (std::size_t e = 0; e < ne; ++e)
                ws.total[edge_var_[e]] += ws.c2v[e];

            res.iterations = it + 1;
            res.parity_ok = syndrome_ok(ws.total);
            if (cfg.early_stop && res.parity_ok)
                break;
        }

        res.hard.resize(k_);
        for (int i = 0; i < k_; ++i)
            res.hard[i] = ws.total[info_local_[i]] < 0.0 ? 1 : 0;
        res.extrinsic.resize(tx_local_.size());
        for (std::size_t i = 0; i < tx_local_.size(); ++i)
            res.extrinsic[i] = ws.total[tx_local_[i]] - ws.input[tx_local_[i]];
        return res;
    }

    BpResult decode(std::span<const double> llr, const BpConfig& cfg) const
    {
        MinSumWorkspace ws;
        return decode(llr, cfg, ws);
    }

private:
    bool syndrome_ok(const RVec& total) const
    {
        for (int c = 0; c < check_count(); ++c) {
            bool p = false;
            for (int e = check_start_[c]; e < check_start_[c + 1]; ++e)
                p ^= total[edge_var_[e]] < 0.0;
            if (p)
                return false;
        }
        return true;
    }

    int k_;
    int tx_len_;
    std::vector<int> var_mother_;
    std::vector<BitRole> var_role_;
    std::vector<int> edge_var_;
    std::vector<int> check_start_;
    std::vector<int> tx_local_;
    std::vector<int> info_local_;
};

}  // namespace shortpkt
