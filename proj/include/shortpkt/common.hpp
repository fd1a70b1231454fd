// SPDX-License-Identifier: Apache-2.0
//
// Shared vocabulary types and link constants.

#pragma once

#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace shortpkt {

using cplx = std::complex<double>;
using CVec = std::vector<cplx>;
using RVec = std::vector<double>;
using Bits = std::vector<std::uint8_t>;

/// Number of Proakis-C multipath taps.
inline constexpr int kNumTaps = 5;

/// Channel memory n_M: n_taps - 1 taps of multipath plus one tap of timing offset.
inline constexpr int kChannelMemory = kNumTaps - 1 + 1;

/// Taps of the effective channel seen by the receiver (n_M + 1).
inline constexpr int kEffectiveTaps = kChannelMemory + 1;

/// Length of the sample-timing-offset filter.
inline constexpr int kStoFilterTaps = 16;

inline constexpr double kPi = 3.14159265358979323846;

/// Raised on violated preconditions (bad lengths, out-of-range parameters).
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

inline void require(bool cond, const std::string& what)
{
    if (!cond)
        throw ConfigError(what);
}

}  // namespace shortpkt
