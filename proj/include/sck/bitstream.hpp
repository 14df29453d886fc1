#pragma once

#include <bit>
#include <cmath>
#include <cstdint>
#include <map>
#include <mutex>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "sck/errors.hpp"

namespace sck {

using Bit = std::uint8_t;

/// A finite pseudo-random bitstream. One byte per bit keeps the sequential
/// circuit models simple and fast; the packed layout only exists on disk
/// (see stream_file.hpp).
class BitStream {
public:
    BitStream() = default;
    explicit BitStream(std::size_t length) : bits_(length, 0) {}
    explicit BitStream(std::vector<Bit> bits) : bits_(std::move(bits)) {
        for (Bit& b : bits_) b = b ? 1 : 0;
    }

    static BitStream from_string(std::string_view s) {
        BitStream out(s.size());
        for (std::size_t i = 0; i < s.size(); ++i) {
            if (s[i] != '0' && s[i] != '1')
                throw structural_error("BitStream::from_string: expected '0'/'1'");
            out.bits_[i] = static_cast<Bit>(s[i] - '0');
        }
        return out;
    }

    std::size_t size() const { return bits_.size(); }
    bool empty() const { return bits_.empty(); }
    Bit operator[](std::size_t i) const { return bits_[i]; }
    void set(std::size_t i, Bit b) { bits_[i] = b ? 1 : 0; }

    const std::vector<Bit>& bits() const { return bits_; }
    std::vector<Bit>& bits() { return bits_; }

    std::size_t ones_count() const {
        std::size_t c = 0;
        for (Bit b : bits_) c += b;
        return c;
    }

    bool all_zero() const { return ones_count() == 0; }

    /// Unipolar value: fraction of ones.
    double decode_unipolar() const {
        if (bits_.empty()) throw std::domain_error("decode_unipolar: empty stream");
        return static_cast<double>(ones_count()) / static_cast<double>(bits_.size());
    }

    bool operator==(const BitStream&) const = default;

private:
    std::vector<Bit> bits_;
};

namespace detail {

/// 64-bit finalizer used wherever sub-seeds are derived from a master seed.
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

inline std::uint32_t lfsr_advance(std::uint32_t state, std::uint32_t taps_mask,
                                  std::uint32_t state_mask) {
    const std::uint32_t feedback = static_cast<std::uint32_t>(std::popcount(state & taps_mask) & 1);
    return ((state << 1) | feedback) & state_mask;
}

/// Full-period enumeration check, memoized per (width, taps) pair. Runs once
/// per distinct configuration; subsequent constructions are table lookups.
inline bool lfsr_is_maximal(unsigned width, std::uint32_t taps_mask) {
    static std::mutex mu;
    static std::map<std::uint64_t, bool> memo;
    const std::uint64_t key = (static_cast<std::uint64_t>(width) << 32) | taps_mask;
    {
        std::lock_guard<std::mutex> lock(mu);
        auto it = memo.find(key);
        if (it != memo.end()) return it->second;
    }
    const std::uint32_t state_mask = (width >= 32) ? ~0u : ((1u << width) - 1u);
    const std::uint64_t full_period = state_mask;
    std::uint32_t s = 1;
    std::uint64_t steps = 0;
    do {
        s = lfsr_advance(s, taps_mask, state_mask);
        ++steps;
        if (s == 0) { steps = 0; break; }  // degenerate taps collapse to zero
    } while (s != 1 && steps <= full_period);
    const bool maximal = (steps == full_period);
    {
        std::lock_guard<std::mutex> lock(mu);
        memo[key] = maximal;
    }
    return maximal;
}

// Bijective whitening of the register state before the threshold compare.
// Raw LFSR states are strongly serially correlated (each step roughly
// doubles the state), which biases stateful circuits fed by the resulting
// bitstreams. A fixed permutation of the state space removes the temporal
// structure while keeping the full-period counting exact: over one period
// the whitened words take every value in [0, 2^width - 2] exactly once.
inline std::uint32_t whiten_permute(std::uint32_t x, std::uint32_t mask, unsigned width) {
    x &= mask;
    x ^= x >> (width / 2);
    x = (x * 0x9E3Du) & mask;
    x ^= x >> ((width + 2) / 3);
    x = (x * 0x785DD13Du) & mask;
    x ^= x >> (width / 2 + 1);
    return x;
}

inline std::uint32_t whiten_word(std::uint32_t state, std::uint32_t mask, unsigned width) {
    // maps state 0 (never produced) to 2^width - 1, so the nonzero states
    // cover [0, 2^width - 2] exactly
    return whiten_permute(state, mask, width) ^ whiten_permute(0, mask, width) ^ mask;
}

} // namespace detail

/// Fibonacci linear feedback shift register used as the stochastic number
/// generator's uniform word source. Construction rejects zero seeds and any
/// tap set that does not yield the maximal period 2^width - 1.
class LfsrGenerator {
public:
    static constexpr unsigned kMinWidth = 2;
    static constexpr unsigned kMaxWidth = 24;
    static constexpr unsigned kDefaultWidth = 16;

    /// Known maximal-length tap sets (standard tables), positions 1-based
    /// with the register width as the highest tap.
    static std::vector<unsigned> default_taps(unsigned width) {
        switch (width) {
            case 2:  return {2, 1};
            case 3:  return {3, 2};
            case 4:  return {4, 3};
            case 5:  return {5, 3};
            case 6:  return {6, 5};
            case 7:  return {7, 6};
            case 8:  return {8, 6, 5, 4};
            case 9:  return {9, 5};
            case 10: return {10, 7};
            case 11: return {11, 9};
            case 12: return {12, 6, 4, 1};
            case 13: return {13, 4, 3, 1};
            case 14: return {14, 5, 3, 1};
            case 15: return {15, 14};
            case 16: return {16, 15, 13, 4};
            case 17: return {17, 14};
            case 18: return {18, 11};
            case 19: return {19, 6, 2, 1};
            case 20: return {20, 17};
            case 21: return {21, 19};
            case 22: return {22, 21};
            case 23: return {23, 18};
            case 24: return {24, 23, 22, 17};
            default:
                throw config_error("LfsrGenerator: no default taps for width " +
                                   std::to_string(width));
        }
    }

    /// A second maximal-length tap set per supported width, for stream pairs
    /// that must come from distinct sequences (validation and analysis paths).
    static std::vector<unsigned> alternate_taps(unsigned width) {
        switch (width) {
            case 16: return {16, 14, 13, 11};
            case 20: return {20, 3};
            default:
                throw config_error("LfsrGenerator: no alternate taps for width " +
                                   std::to_string(width));
        }
    }

    LfsrGenerator(unsigned width, const std::vector<unsigned>& taps, std::uint32_t seed)
        : width_(width) {
        if (width < kMinWidth || width > kMaxWidth)
            throw config_error("LfsrGenerator: width must be in [2, 24]");
        state_mask_ = (1u << width) - 1u;
        if (seed == 0 || seed > state_mask_)
            throw config_error("LfsrGenerator: seed must be a nonzero " +
                               std::to_string(width) + "-bit value");
        taps_mask_ = 0;
        for (unsigned p : taps) {
            if (p < 1 || p > width)
                throw config_error("LfsrGenerator: tap position out of range");
            taps_mask_ |= 1u << (p - 1);
        }
        if (!detail::lfsr_is_maximal(width, taps_mask_))
            throw config_error("LfsrGenerator: taps are not maximal-length for width " +
                               std::to_string(width));
        state_ = seed;
    }

    explicit LfsrGenerator(std::uint32_t seed)
        : LfsrGenerator(kDefaultWidth, default_taps(kDefaultWidth), seed) {}

    /// Advance one cycle and return the new state word (never zero).
    std::uint32_t step() {
        state_ = detail::lfsr_advance(state_, taps_mask_, state_mask_);
        return state_;
    }

    std::uint32_t state() const { return state_; }
    unsigned width() const { return width_; }
    std::uint32_t max_state() const { return state_mask_; }
    /// Number of distinct states visited before the sequence repeats.
    std::uint64_t period() const { return state_mask_; }

private:
    unsigned width_;
    std::uint32_t taps_mask_ = 0;
    std::uint32_t state_mask_ = 0;
    std::uint32_t state_ = 1;
};

/// Stochastic number generation: bit l is one iff the whitened generator
/// word at step l (a value in [0, 2^width - 2]) lies strictly below
/// round(value * (2^width - 1)). Over a full period the ones count is
/// exactly the threshold, so the quantization error is below 2^-width.
inline BitStream generate_unipolar(double value, std::size_t length, LfsrGenerator& gen) {
    if (!(value >= 0.0 && value <= 1.0))
        throw std::domain_error("generate_unipolar: value must lie in [0, 1]");
    if (length == 0) throw std::domain_error("generate_unipolar: length must be positive");
    const std::uint32_t mask = gen.max_state();
    const unsigned width = gen.width();
    const auto threshold =
        static_cast<std::uint32_t>(std::llround(value * static_cast<double>(mask)));
    BitStream out(length);
    Bit* bits = out.bits().data();
    for (std::size_t l = 0; l < length; ++l) {
        const std::uint32_t word = detail::whiten_word(gen.step(), mask, width);
        bits[l] = static_cast<Bit>(word < threshold);
    }
    return out;
}

/// Two-line bipolar stream: value = (ones(p) - ones(n)) / L in [-1, 1].
class TlbStream {
public:
    TlbStream() = default;
    TlbStream(BitStream p, BitStream n) : p_(std::move(p)), n_(std::move(n)) {
        if (p_.size() != n_.size())
            throw structural_error("TlbStream: line lengths differ");
    }

    static TlbStream zeros(std::size_t length) {
        return TlbStream(BitStream(length), BitStream(length));
    }

    const BitStream& p() const { return p_; }
    const BitStream& n() const { return n_; }
    BitStream& p() { return p_; }
    BitStream& n() { return n_; }
    std::size_t size() const { return p_.size(); }

    /// True when one of the two lines carries no ones (the minimum-variance
    /// representation produced by encode_tlb).
    bool is_canonical() const { return p_.all_zero() || n_.all_zero(); }

    /// Value negation: swap the positive and negative lines.
    TlbStream negated() const { return TlbStream(n_, p_); }

    bool operator==(const TlbStream&) const = default;

private:
    BitStream p_, n_;
};

/// Signed magnitude stream: value = (1/L) * sum (1 - 2*s[l]) * m[l].
class SignMagStream {
public:
    SignMagStream() = default;
    SignMagStream(BitStream sign, BitStream magnitude)
        : s_(std::move(sign)), m_(std::move(magnitude)) {
        if (s_.size() != m_.size())
            throw structural_error("SignMagStream: line lengths differ");
    }

    const BitStream& sign() const { return s_; }
    const BitStream& magnitude() const { return m_; }
    std::size_t size() const { return s_.size(); }

    bool operator==(const SignMagStream&) const = default;

private:
    BitStream s_, m_;
};

/// Exact decode on integer counts; the single division is the only rounding.
inline double decode_tlb(const TlbStream& t) {
    if (t.size() == 0) throw std::domain_error("decode_tlb: empty stream");
    const auto pos = static_cast<std::int64_t>(t.p().ones_count());
    const auto neg = static_cast<std::int64_t>(t.n().ones_count());
    return static_cast<double>(pos - neg) / static_cast<double>(t.size());
}

inline double decode_signmag(const SignMagStream& u) {
    if (u.size() == 0) throw std::domain_error("decode_signmag: empty stream");
    std::int64_t acc = 0;
    for (std::size_t l = 0; l < u.size(); ++l)
        if (u.magnitude()[l]) acc += u.sign()[l] ? -1 : 1;
    return static_cast<double>(acc) / static_cast<double>(u.size());
}

/// Canonical encoding: the line matching the sign of x carries the magnitude,
/// the other line is all-zero.
inline TlbStream encode_tlb(double x, std::size_t length, LfsrGenerator& gen) {
    if (!(x >= -1.0 && x <= 1.0))
        throw std::domain_error("encode_tlb: value must lie in [-1, 1]");
    if (x >= 0.0)
        return TlbStream(generate_unipolar(x, length, gen), BitStream(length));
    return TlbStream(BitStream(length), generate_unipolar(-x, length, gen));
}

/// Per position: p = m AND NOT s, n = m AND s. Preserves the decoded value
/// exactly for every input.
inline TlbStream signmag_to_tlb(const SignMagStream& u) {
    BitStream p(u.size()), n(u.size());
    for (std::size_t l = 0; l < u.size(); ++l) {
        const Bit m = u.magnitude()[l];
        const Bit s = u.sign()[l];
        p.set(l, static_cast<Bit>(m & static_cast<Bit>(!s)));
        n.set(l, static_cast<Bit>(m & s));
    }
    return TlbStream(std::move(p), std::move(n));
}

/// Per position: m = p OR n, s = n. Requires positionally non-overlapping
/// lines (run a cancellation stage first if needed).
inline SignMagStream tlb_to_signmag(const TlbStream& t) {
    BitStream s(t.size()), m(t.size());
    for (std::size_t l = 0; l < t.size(); ++l) {
        const Bit p = t.p()[l];
        const Bit n = t.n()[l];
        if (p & n)
            throw precondition_error("tlb_to_signmag: overlapping ones at position " +
                                     std::to_string(l));
        m.set(l, static_cast<Bit>(p | n));
        s.set(l, n);
    }
    return SignMagStream(std::move(s), std::move(m));
}

} // namespace sck
