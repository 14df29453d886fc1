#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "sck/bitstream.hpp"
#include "sck/circuits.hpp"
#include "sck/errors.hpp"

namespace sck::analysis {

/// Query point for the stochastic-maximum error probability: unipolar input
/// values and the register length of the maximum circuit.
struct ShrinkErrorQuery {
    double p_a;
    double p_b;
    int capacity;
};

namespace detail {

// r^M / sum_{j=0}^{M} r^j, evaluated without overflow on either side of r=1.
inline double geometric_ratio(double r, int m) {
    if (r <= 1.0) {
        double power = 1.0, sum = 0.0;
        for (int j = 0; j <= m; ++j) {
            sum += power;
            power *= r;
        }
        return std::pow(r, m) / sum;
    }
    double inv_power = 1.0, sum = 0.0;
    const double inv_r = 1.0 / r;
    for (int j = 0; j <= m; ++j) {
        sum += inv_power;
        inv_power *= inv_r;
    }
    return 1.0 / sum;
}

using sck::detail::splitmix64;

} // namespace detail

/// Per-bit probability that the stochastic maximum erroneously emits a one
/// of input A when value(A) <= value(B). Birth-death stationary form; the
/// ratio degenerates smoothly to 1/(M+1) at p_a == p_b.
inline double p_error_closed_form(const ShrinkErrorQuery& q) {
    if (q.capacity < 1) throw std::domain_error("p_error_closed_form: capacity must be >= 1");
    if (!(q.p_b > 0.0 && q.p_b < 1.0))
        throw std::domain_error("p_error_closed_form: p_b must lie in (0, 1)");
    if (!(q.p_a >= 0.0 && q.p_a <= q.p_b))
        throw std::domain_error("p_error_closed_form: requires 0 <= p_a <= p_b");
    if (q.p_a == 0.0) return 0.0;
    const double r = (q.p_a * (1.0 - q.p_b)) / (q.p_b * (1.0 - q.p_a));
    return detail::geometric_ratio(r, q.capacity) * q.p_a * (1.0 - q.p_b);
}

inline double p_error_closed_form(double p_a, double p_b, int capacity) {
    return p_error_closed_form(ShrinkErrorQuery{p_a, p_b, capacity});
}

/// Upper bound of the error probability over all inputs below the 0.5
/// threshold: 0.25 / M.
inline double p_error_max(int capacity) {
    if (capacity < 1) throw std::domain_error("p_error_max: capacity must be >= 1");
    return 0.25 / static_cast<double>(capacity);
}

/// Limit value of the closed form as p_a -> 0.5 with p_b = 0.5. Slightly
/// below p_error_max: 0.25 / (M + 1); both are reported by the sweep tools.
inline double p_error_limit_at_half(int capacity) {
    if (capacity < 1) throw std::domain_error("p_error_limit_at_half: capacity must be >= 1");
    return 0.25 / static_cast<double>(capacity + 1);
}

/// Expected error probability for inputs uniform on [0, 0.5] with a 0.5
/// threshold, by composite Simpson quadrature. `resolution` counts
/// subintervals (rounded up to even).
inline double expected_p_error(int capacity, int resolution = 10000) {
    if (capacity < 1) throw std::domain_error("expected_p_error: capacity must be >= 1");
    if (resolution < 100) throw std::domain_error("expected_p_error: resolution must be >= 100");
    if (resolution % 2 != 0) ++resolution;
    const double lo = 0.0, hi = 0.5;
    const double h = (hi - lo) / resolution;
    auto f = [capacity](double p_a) { return p_error_closed_form(p_a, 0.5, capacity); };
    double sum = f(lo) + f(hi);
    for (int k = 1; k < resolution; ++k) sum += f(lo + k * h) * (k % 2 ? 4.0 : 2.0);
    const double integral = sum * h / 3.0;
    return integral / (hi - lo);  // expectation under the uniform density
}

struct EmpiricalShrinkError {
    double mean_abs_error;
    double standard_error;
};

/// Monte Carlo counterpart of expected_p_error: per trial, a magnitude drawn
/// uniformly below the threshold is shrunk by the circuit and the absolute
/// decoded output (the residual error) is recorded. Draws are stratified
/// (trial t samples uniformly within the t-th slice of [0, 0.5]) so the
/// trial budget covers the magnitude range evenly; without stratification
/// the estimator's spread at desk-scale trial counts swamps the quantity
/// being measured. Magnitude and threshold streams come from generators with
/// distinct feedback polynomials. The generator width must give a period no
/// shorter than the stream length for unbiased sampling.
inline EmpiricalShrinkError empirical_shrink_error(int capacity, std::size_t stream_length,
                                                   int trials, std::uint64_t seed,
                                                   unsigned lfsr_width = 20) {
    if (capacity < 1) throw std::domain_error("empirical_shrink_error: capacity must be >= 1");
    if (stream_length == 0)
        throw std::domain_error("empirical_shrink_error: stream length must be positive");
    if (trials < 1) throw std::domain_error("empirical_shrink_error: trials must be >= 1");

    const auto taps_a = LfsrGenerator::default_taps(lfsr_width);
    const auto taps_b = LfsrGenerator::alternate_taps(lfsr_width);
    std::vector<double> errors(static_cast<std::size_t>(trials));
    for (int t = 0; t < trials; ++t) {
        std::mt19937_64 rng(detail::splitmix64(seed ^ detail::splitmix64(static_cast<std::uint64_t>(t))));
        auto draw_u01 = [&rng] { return static_cast<double>(rng() >> 11) * 0x1.0p-53; };
        const double magnitude =
            0.5 * (static_cast<double>(t) + draw_u01()) / static_cast<double>(trials);
        const std::uint32_t mask = (1u << lfsr_width) - 1u;
        auto draw_seed = [&rng, mask] {
            std::uint32_t s = 0;
            while (s == 0) s = static_cast<std::uint32_t>(rng()) & mask;
            return s;
        };
        LfsrGenerator gen_a(lfsr_width, taps_a, draw_seed());
        LfsrGenerator gen_b(lfsr_width, taps_b, draw_seed());
        TlbStream v(generate_unipolar(magnitude, stream_length, gen_a),
                    BitStream(stream_length));
        const BitStream threshold = generate_unipolar(0.5, stream_length, gen_b);
        const TlbStream out = circuits::shrink_stream(v, threshold, capacity);
        errors[static_cast<std::size_t>(t)] = std::abs(decode_tlb(out));
    }

    double mean = 0.0;
    for (double e : errors) mean += e;
    mean /= static_cast<double>(trials);
    double var = 0.0;
    if (trials > 1) {
        for (double e : errors) var += (e - mean) * (e - mean);
        var /= static_cast<double>(trials - 1);
    }
    return {mean, std::sqrt(var / static_cast<double>(trials))};
}

} // namespace sck::analysis
