#pragma once

#include <algorithm>
#include <cstdint>
#include <ostream>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "sck/bitstream.hpp"
#include "sck/errors.hpp"

namespace sck::circuits {

/// Removes a simultaneous one on both lines of a two-line pair. The decoded
/// value is invariant; the output never has both bits set.
inline std::pair<Bit, Bit> cancel_step(Bit p, Bit n) {
    return {static_cast<Bit>(p & static_cast<Bit>(!n)),
            static_cast<Bit>(n & static_cast<Bit>(!p))};
}

inline TlbStream cancel_stream(const TlbStream& t) {
    BitStream p(t.size()), n(t.size());
    for (std::size_t l = 0; l < t.size(); ++l) {
        auto [po, no] = cancel_step(t.p()[l], t.n()[l]);
        p.set(l, po);
        n.set(l, no);
    }
    return TlbStream(std::move(p), std::move(n));
}

/// Stochastic maximum of two unipolar streams, modeled as a bounded credit
/// counter with capacity equal to the shift-register length. Every one of
/// input B is passed through; ones of A are absorbed into the credit until
/// it saturates, at which point they appear on the output.
class MaxCircuit {
public:
    explicit MaxCircuit(int capacity) : capacity_(capacity) {
        if (capacity < 1) throw std::domain_error("MaxCircuit: capacity must be >= 1");
    }

    Bit step(Bit a, Bit b) {
        if (b) {
            if (!a && credit_ > 0) --credit_;
            return 1;
        }
        if (a) {
            if (credit_ < capacity_) {
                ++credit_;
                return 0;
            }
            return 1;
        }
        return 0;
    }

    int credit() const { return credit_; }
    int capacity() const { return capacity_; }

private:
    int capacity_;
    int credit_ = 0;
};

/// Folds MaxCircuit over two equal-length streams from credit 0. When
/// `trace` is set, one tab-separated row per cycle is written:
/// cycle, a, b, credit, out.
inline BitStream max_stream(const BitStream& a, const BitStream& b, int capacity,
                            std::ostream* trace = nullptr) {
    if (a.size() != b.size()) throw structural_error("max_stream: lengths differ");
    MaxCircuit mc(capacity);
    BitStream out(a.size());
    Bit* ob = out.bits().data();
    const Bit* ab = a.bits().data();
    const Bit* bb = b.bits().data();
    if (trace) *trace << "# cycle\ta\tb\tcredit\tout\n";
    for (std::size_t l = 0; l < a.size(); ++l) {
        ob[l] = mc.step(ab[l], bb[l]);
        if (trace)
            *trace << l << '\t' << int(ab[l]) << '\t' << int(bb[l]) << '\t' << mc.credit()
                   << '\t' << int(ob[l]) << '\n';
    }
    return out;
}

/// Soft-threshold circuit on a canonical two-line stream: one maximum block
/// per line, both fed the same threshold stream on input B, followed by a
/// cancellation stage. A zero input reproduces the threshold stream on both
/// maximum outputs, so the cancelled result is exactly zero.
inline TlbStream shrink_stream(const TlbStream& v, const BitStream& threshold_stream,
                               int capacity) {
    if (v.size() != threshold_stream.size())
        throw structural_error("shrink_stream: threshold stream length differs");
    if (!v.is_canonical())
        throw precondition_error("shrink_stream: input must be canonical (one all-zero line)");
    MaxCircuit max_p(capacity), max_n(capacity);
    BitStream p(v.size()), n(v.size());
    Bit* pb = p.bits().data();
    Bit* nb = n.bits().data();
    const Bit* vp = v.p().bits().data();
    const Bit* vn = v.n().bits().data();
    const Bit* th = threshold_stream.bits().data();
    for (std::size_t l = 0; l < v.size(); ++l) {
        const Bit mp = max_p.step(vp[l], th[l]);
        const Bit mn = max_n.step(vn[l], th[l]);
        auto [po, no] = cancel_step(mp, mn);
        pb[l] = po;
        nb[l] = no;
    }
    return TlbStream(std::move(p), std::move(n));
}

/// Bounded carry storage shared by the non-scaled adder, multiplier and
/// scalar product. Each cycle accepts any number of positive/negative carry
/// units (drops beyond the depth are counted), then either cancels one
/// positive against one negative unit or emits at most one bit per line.
class CarryAdder {
public:
    explicit CarryAdder(int depth = 20) : depth_(depth) {
        if (depth < 1) throw std::domain_error("CarryAdder: depth must be >= 1");
    }

    std::pair<Bit, Bit> step(int pos_in, int neg_in) {
        pushed_pos_ += static_cast<std::uint64_t>(pos_in);
        pushed_neg_ += static_cast<std::uint64_t>(neg_in);
        pos_ += pos_in;
        if (pos_ > depth_) {
            dropped_pos_ += static_cast<std::uint64_t>(pos_ - depth_);
            pos_ = depth_;
        }
        neg_ += neg_in;
        if (neg_ > depth_) {
            dropped_neg_ += static_cast<std::uint64_t>(neg_ - depth_);
            neg_ = depth_;
        }
        if (pos_ > 0 && neg_ > 0) {
            --pos_;
            --neg_;
            ++cancelled_;
            return {0, 0};
        }
        if (pos_ > 0) {
            --pos_;
            ++emitted_pos_;
            return {1, 0};
        }
        if (neg_ > 0) {
            --neg_;
            ++emitted_neg_;
            return {0, 1};
        }
        return {0, 0};
    }

    int depth() const { return depth_; }
    int positive_count() const { return pos_; }
    int negative_count() const { return neg_; }
    std::uint64_t pushed_positive() const { return pushed_pos_; }
    std::uint64_t pushed_negative() const { return pushed_neg_; }
    std::uint64_t emitted_positive() const { return emitted_pos_; }
    std::uint64_t emitted_negative() const { return emitted_neg_; }
    std::uint64_t dropped_positive() const { return dropped_pos_; }
    std::uint64_t dropped_negative() const { return dropped_neg_; }
    /// Implicit-subtraction events (one unit removed from each store).
    std::uint64_t cancelled_pairs() const { return cancelled_; }
    std::uint64_t dropped_total() const { return dropped_pos_ + dropped_neg_; }

private:
    int depth_;
    int pos_ = 0;
    int neg_ = 0;
    std::uint64_t pushed_pos_ = 0, pushed_neg_ = 0;
    std::uint64_t emitted_pos_ = 0, emitted_neg_ = 0;
    std::uint64_t dropped_pos_ = 0, dropped_neg_ = 0;
    std::uint64_t cancelled_ = 0;
};

/// Magnitude-preserving addition of two-line streams through one carry
/// store. Optional trace rows: cycle, pos_in, neg_in, pos_store, neg_store,
/// p_out, n_out.
inline TlbStream nonscaled_add(std::span<const TlbStream> inputs, CarryAdder& state,
                               std::ostream* trace = nullptr) {
    if (inputs.empty()) throw structural_error("nonscaled_add: needs at least one input");
    const std::size_t length = inputs.front().size();
    for (const TlbStream& in : inputs)
        if (in.size() != length) throw structural_error("nonscaled_add: lengths differ");
    BitStream p(length), n(length);
    if (trace) *trace << "# cycle\tpos_in\tneg_in\tpos_store\tneg_store\tp_out\tn_out\n";
    for (std::size_t l = 0; l < length; ++l) {
        int pos = 0, neg = 0;
        for (const TlbStream& in : inputs) {
            pos += in.p()[l];
            neg += in.n()[l];
        }
        auto [po, no] = state.step(pos, neg);
        p.set(l, po);
        n.set(l, no);
        if (trace)
            *trace << l << '\t' << pos << '\t' << neg << '\t' << state.positive_count() << '\t'
                   << state.negative_count() << '\t' << int(po) << '\t' << int(no) << '\n';
    }
    return TlbStream(std::move(p), std::move(n));
}

/// Two-line multiplier: AND-gate cross terms per position, merged through
/// the supplied carry store so each output line emits at most one bit per
/// cycle. Inputs must be mutually decorrelated for an unbiased product.
inline TlbStream tlb_multiply(const TlbStream& x, const TlbStream& y, CarryAdder& state) {
    if (x.size() != y.size()) throw structural_error("tlb_multiply: lengths differ");
    const std::size_t length = x.size();
    BitStream p(length), n(length);
    Bit* pb = p.bits().data();
    Bit* nb = n.bits().data();
    const Bit* xp = x.p().bits().data();
    const Bit* xn = x.n().bits().data();
    const Bit* yp = y.p().bits().data();
    const Bit* yn = y.n().bits().data();
    for (std::size_t l = 0; l < length; ++l) {
        const int pos = (xp[l] & yp[l]) + (xn[l] & yn[l]);
        const int neg = (xp[l] & yn[l]) + (xn[l] & yp[l]);
        auto [po, no] = state.step(pos, neg);
        pb[l] = po;
        nb[l] = no;
    }
    return TlbStream(std::move(p), std::move(n));
}

inline TlbStream tlb_multiply(const TlbStream& x, const TlbStream& y, int carry_depth = 20) {
    CarryAdder state(carry_depth);
    return tlb_multiply(x, y, state);
}

/// Sequential scalar product: the per-element multiplier cross terms all
/// push into one shared carry store, which emits the accumulated sum.
inline TlbStream scalar_product(std::span<const TlbStream> x, std::span<const TlbStream> a,
                                CarryAdder& state) {
    if (x.size() != a.size() || x.empty())
        throw structural_error("scalar_product: element counts differ or empty");
    const std::size_t length = x.front().size();
    const std::size_t n_elems = x.size();
    std::vector<const Bit*> xp(n_elems), xn(n_elems), ap(n_elems), an(n_elems);
    for (std::size_t j = 0; j < n_elems; ++j) {
        if (x[j].size() != length || a[j].size() != length)
            throw structural_error("scalar_product: stream lengths differ");
        xp[j] = x[j].p().bits().data();
        xn[j] = x[j].n().bits().data();
        ap[j] = a[j].p().bits().data();
        an[j] = a[j].n().bits().data();
    }
    BitStream p(length), n(length);
    Bit* pb = p.bits().data();
    Bit* nb = n.bits().data();
    for (std::size_t l = 0; l < length; ++l) {
        int pos = 0, neg = 0;
        for (std::size_t j = 0; j < n_elems; ++j) {
            pos += (xp[j][l] & ap[j][l]) + (xn[j][l] & an[j][l]);
            neg += (xp[j][l] & an[j][l]) + (xn[j][l] & ap[j][l]);
        }
        auto [po, no] = state.step(pos, neg);
        pb[l] = po;
        nb[l] = no;
    }
    return TlbStream(std::move(p), std::move(n));
}

/// Flip-flop shift register used to decorrelate a reused stream.
class DelayLine {
public:
    explicit DelayLine(std::size_t depth) : buffer_(depth, 0) {}

    Bit push(Bit in) {
        if (buffer_.empty()) return in;
        const Bit out = buffer_[index_];
        buffer_[index_] = in;
        index_ = (index_ + 1) % buffer_.size();
        return out;
    }

    std::size_t depth() const { return buffer_.size(); }

private:
    std::vector<Bit> buffer_;
    std::size_t index_ = 0;
};

inline BitStream delay_stream(const BitStream& s, std::size_t depth) {
    BitStream out(s.size());
    for (std::size_t l = depth; l < s.size(); ++l) out.set(l, s[l - depth]);
    return out;
}

/// Shift both lines by `depth` cycles with zero fill; length preserved.
inline TlbStream delay_stream(const TlbStream& s, std::size_t depth) {
    return TlbStream(delay_stream(s.p(), depth), delay_stream(s.n(), depth));
}

} // namespace sck::circuits
