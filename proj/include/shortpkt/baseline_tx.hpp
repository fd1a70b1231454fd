// SPDX-License-Identifier: Apache-2.0
//
// Conventional frame: Zadoff-Chu preamble followed by an LDPC-coded,
// Gray-mapped QPSK payload.

#pragma once

#include <cmath>
#include <numeric>
#include <span>
#include <vector>

#include "shortpkt/common.hpp"
#include "shortpkt/ldpc.hpp"

namespace shortpkt {

enum class FrameKind { baseline, phyae };

struct Frame {
    CVec symbols;
    FrameKind kind = FrameKind::baseline;
    Bits info_bits;
};

struct PreambleSpec {
    int length = 20;
    int root = 7;
};

/// Preamble length used for each supported frame length n.
inline int preamble_length_for(int n)
{
    switch (n) {
    case 40:
    case 48:
        return 16;
    case 56:
    case 64:
        return 20;
    case 96:
        return 24;
    default:
        throw ConfigError("no preamble length defined for n = " + std::to_string(n));
    }
}

/// z[m] = exp(-j pi q m(m+1)/N) for odd N, exp(-j pi q m^2/N) for even N.
inline CVec zadoff_chu(int length, int root)
{
    require(length > 0, "Zadoff-Chu length must be positive");
    require(std::gcd(root, length) == 1, "Zadoff-Chu root must be coprime with the length");
    CVec z(length);
    const int odd = length % 2;
    for (int m = 0; m < length; ++m) {
        // Reduce the exponent modulo 2N before scaling to keep the phase exact.
        const long long e = static_cast<long long>(root) * m * (m + odd) % (2LL * length);
        const double phase = -kPi * static_cast<double>(e) / length;
        z[m] = {std::cos(phase), std::sin(phase)};
    }
    return z;
}

/// Gray QPSK: first bit selects the sign of the real part, second the imaginary part.
inline cplx qpsk_symbol(std::uint8_t b0, std::uint8_t b1)
{
    constexpr double a = 0.70710678118654752440;
    return {b0 ? -a : a, b1 ? -a : a};
}

inline CVec qpsk_map(std::span<const std::uint8_t> bits)
{
    require(bits.size() % 2 == 0, "QPSK mapping needs an even number of bits");
    CVec out(bits.size() / 2);
    for (std::size_t i = 0; i < out.size(); ++i)
        out[i] = qpsk_symbol(bits[2 * i], bits[2 * i + 1]);
    return out;
}

inline Bits qpsk_demap_hard(std::span<const cplx> symbols)
{
    Bits out(2 * symbols.size());
    for (std::size_t i = 0; i < symbols.size(); ++i) {
        out[2 * i] = symbols[i].real() < 0.0;
        out[2 * i + 1] = symbols[i].imag() < 0.0;
    }
    return out;
}

/// Builds frames [preamble | QPSK(encode(u))] at unit average power.
class BaselineTransmitter {
public:
    BaselineTransmitter(const LdpcCode& code, PreambleSpec spec)
        : code_(code), spec_(spec), preamble_(zadoff_chu(spec.length, spec.root))
    {
        require(code.tx_len() % 2 == 0, "coded length must be even for QPSK");
        const double energy = spec.length + code.tx_len() / 2.0;  // all symbols unit modulus
        scale_ = std::sqrt(frame_length() / energy);
        for (auto& p : preamble_)
            p *= scale_;
    }

    int frame_length() const { return spec_.length + code_.tx_len() / 2; }
    const PreambleSpec& preamble_spec() const { return spec_; }
    /// Preamble exactly as transmitted (including the frame power scale).
    const CVec& preamble() const { return preamble_; }
    double scale() const { return scale_; }
    const LdpcCode& code() const { return code_; }

    Frame build(std::span<const std::uint8_t> u) const
    {
        require(static_cast<int>(u.size()) == code_.k(), "information length does not match the code");
        Frame f;
        f.kind = FrameKind::baseline;
        f.info_bits.assign(u.begin(), u.end());
        f.symbols = preamble_;
        const Bits c = code_.encode(u);
        for (const cplx& s : qpsk_map(c))
            f.symbols.push_back(scale_ * s);
        return f;
    }

private:
    LdpcCode code_;
    PreambleSpec spec_;
    CVec preamble_;
    double scale_ = 1.0;
};

inline Frame build_frame(std::span<const std::uint8_t> u, const LdpcCode& code, const PreambleSpec& spec)
{
    return BaselineTransmitter(code, spec).build(u);
}

}  // namespace shortpkt
