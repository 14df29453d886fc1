#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>
#include <sstream>

#include "sck/analysis.hpp"
#include "sck/bitstream.hpp"
#include "sck/circuits.hpp"

using namespace sck;
using namespace sck::circuits;

namespace {

BitStream random_stream(std::mt19937_64& rng, std::size_t length, double density) {
    BitStream out(length);
    for (std::size_t i = 0; i < length; ++i)
        out.set(i, static_cast<double>(rng() >> 11) * 0x1.0p-53 < density ? 1 : 0);
    return out;
}

LfsrGenerator make_gen20(std::uint32_t seed) {
    return LfsrGenerator(20, LfsrGenerator::default_taps(20), seed);
}

} // namespace

TEST_CASE("cancel_step truth table") {
    CHECK(cancel_step(1, 1) == std::pair<Bit, Bit>{0, 0});
    CHECK(cancel_step(1, 0) == std::pair<Bit, Bit>{1, 0});
    CHECK(cancel_step(0, 1) == std::pair<Bit, Bit>{0, 1});
    CHECK(cancel_step(0, 0) == std::pair<Bit, Bit>{0, 0});
}

TEST_CASE("cancellation never overlaps and preserves the decoded value") {
    std::mt19937_64 rng(11);
    for (int it = 0; it < 500; ++it) {
        const std::size_t L = 1 + rng() % 64;
        const TlbStream t(random_stream(rng, L, 0.6), random_stream(rng, L, 0.4));
        const TlbStream c = cancel_stream(t);
        for (std::size_t l = 0; l < L; ++l) CHECK((c.p()[l] & c.n()[l]) == 0);
        CHECK(decode_tlb(c) == decode_tlb(t));
    }
}

TEST_CASE("max circuit transition rules") {
    SECTION("hand-simulated M=1 example") {
        // A=110, B=000: first one absorbed into the credit, second overflows
        const BitStream out =
            max_stream(BitStream::from_string("110"), BitStream::from_string("000"), 1);
        CHECK(out == BitStream::from_string("010"));
    }
    SECTION("ones of B are always output") {
        std::mt19937_64 rng(3);
        const BitStream a = random_stream(rng, 4000, 0.3);
        const BitStream b_ones(std::vector<Bit>(4000, 1));
        CHECK(max_stream(a, b_ones, 5).ones_count() == 4000);
    }
    SECTION("all-zero A passes B through bit-exactly") {
        std::mt19937_64 rng(4);
        const BitStream b = random_stream(rng, 4000, 0.5);
        CHECK(max_stream(BitStream(4000), b, 5) == b);
    }
    SECTION("identical inputs pass through unchanged") {
        std::mt19937_64 rng(5);
        const BitStream a = random_stream(rng, 4000, 0.5);
        CHECK(max_stream(a, a, 7) == a);
    }
    SECTION("output dominates B positionally; credit stays bounded") {
        std::mt19937_64 rng(6);
        const BitStream a = random_stream(rng, 2000, 0.6);
        const BitStream b = random_stream(rng, 2000, 0.4);
        MaxCircuit mc(3);
        for (std::size_t l = 0; l < a.size(); ++l) {
            const Bit out = mc.step(a[l], b[l]);
            if (b[l]) CHECK(out == 1);
            CHECK(mc.credit() >= 0);
            CHECK(mc.credit() <= 3);
        }
    }
    CHECK_THROWS_AS(MaxCircuit(0), std::domain_error);
    CHECK_THROWS_AS(max_stream(BitStream(3), BitStream(4), 2), structural_error);
}

TEST_CASE("max_stream approximates the maximum of two unipolar values") {
    const std::size_t L = 100000;
    SECTION("value(A) > value(B)") {
        auto ga = make_gen20(0xA001u);
        auto gb = make_gen20(0x5B17u);
        const BitStream a = generate_unipolar(0.9, L, ga);
        const BitStream b = generate_unipolar(0.5, L, gb);
        CHECK(max_stream(a, b, 20).decode_unipolar() == Catch::Approx(0.9).margin(0.02));
    }
    SECTION("value(A) < value(B): output follows B plus the stationary excess") {
        auto ga = make_gen20(0xA002u);
        auto gb = make_gen20(0x5B18u);
        const BitStream a = generate_unipolar(0.3, L, ga);
        const BitStream b = generate_unipolar(0.5, L, gb);
        const double expected = 0.5 + analysis::p_error_closed_form(0.3, 0.5, 20);
        CHECK(max_stream(a, b, 20).decode_unipolar() == Catch::Approx(expected).margin(0.02));
    }
}

TEST_CASE("max_stream excess-one rate matches the closed form at L = 1e6") {
    // Single-run regression binding the state machine to its stationary
    // analysis; the tolerance is three binomial standard errors. The two
    // inputs use distinct feedback polynomials for decorrelation.
    const std::size_t L = 1000000;
    const double p_a = 0.4, p_b = 0.5;
    const int capacity = 10;
    LfsrGenerator ga(20, LfsrGenerator::default_taps(20), 0x7c300u);
    LfsrGenerator gb(20, LfsrGenerator::alternate_taps(20), 0x19d02u);
    const BitStream a = generate_unipolar(p_a, L, ga);
    const BitStream b = generate_unipolar(p_b, L, gb);
    const BitStream out = max_stream(a, b, capacity);
    const double rate = static_cast<double>(out.ones_count() - b.ones_count()) /
                        static_cast<double>(L);
    const double theory = analysis::p_error_closed_form(p_a, p_b, capacity);
    const double sigma = std::sqrt(theory * (1.0 - theory) / static_cast<double>(L));
    CHECK(std::abs(rate - theory) <= 3.0 * sigma);
}

TEST_CASE("shrink_stream zero input yields exactly zero") {
    auto gl = make_gen20(0x321u);
    const BitStream lambda = generate_unipolar(0.5, 5000, gl);
    const TlbStream out = shrink_stream(TlbStream::zeros(5000), lambda, 10);
    CHECK(out.p().all_zero());
    CHECK(out.n().all_zero());
}

TEST_CASE("shrink_stream reproduces the scalar soft threshold") {
    const std::size_t L = 100000;
    SECTION("magnitude above the threshold") {
        auto gv = make_gen20(0x888u);
        auto gl = make_gen20(0x1234u);
        const TlbStream v = encode_tlb(0.8, L, gv);
        const BitStream lambda = generate_unipolar(0.5, L, gl);
        const TlbStream out = shrink_stream(v, lambda, 20);
        CHECK(decode_tlb(out) == Catch::Approx(0.3).margin(0.03));
    }
    SECTION("magnitude below the threshold leaves only overflow residue") {
        auto gv = make_gen20(0x777u);
        auto gl = make_gen20(0x4321u);
        const TlbStream v = encode_tlb(-0.2, L, gv);
        const BitStream lambda = generate_unipolar(0.5, L, gl);
        const TlbStream out = shrink_stream(v, lambda, 10);
        CHECK(std::abs(decode_tlb(out)) <= analysis::expected_p_error(10));
    }
    SECTION("non-canonical input is rejected") {
        const TlbStream bad(BitStream::from_string("10"), BitStream::from_string("01"));
        CHECK_THROWS_AS(shrink_stream(bad, BitStream(2), 4), precondition_error);
    }
}

TEST_CASE("shrink with a zero threshold stream is the identity up to the credit residue") {
    const std::size_t L = 65534;
    const int capacity = 10;
    auto gv = LfsrGenerator(0x2215u);
    const TlbStream v = encode_tlb(0.6, L, gv);
    const TlbStream out = shrink_stream(v, BitStream(L), capacity);
    // the register retains at most M ones of the input at stream end
    const double residue = static_cast<double>(capacity) / static_cast<double>(L);
    CHECK(decode_tlb(out) >= decode_tlb(v) - residue - 1e-12);
    CHECK(decode_tlb(out) <= decode_tlb(v) + 1e-12);
}

TEST_CASE("carry adder conserves carry mass per line") {
    std::mt19937_64 rng(21);
    for (int it = 0; it < 50; ++it) {
        const std::size_t L = 500 + rng() % 500;
        std::vector<TlbStream> inputs;
        const int k = 1 + static_cast<int>(rng() % 4);
        for (int i = 0; i < k; ++i)
            inputs.emplace_back(random_stream(rng, L, 0.4), random_stream(rng, L, 0.3));
        CarryAdder state(5);
        const TlbStream out = nonscaled_add(inputs, state);
        CHECK(state.pushed_positive() ==
              state.emitted_positive() + state.cancelled_pairs() + state.dropped_positive() +
                  static_cast<std::uint64_t>(state.positive_count()));
        CHECK(state.pushed_negative() ==
              state.emitted_negative() + state.cancelled_pairs() + state.dropped_negative() +
                  static_cast<std::uint64_t>(state.negative_count()));
        CHECK(out.p().ones_count() == state.emitted_positive());
        CHECK(out.n().ones_count() == state.emitted_negative());
    }
}

TEST_CASE("nonscaled_add behavior") {
    SECTION("single canonical input passes through bit-exactly") {
        auto g = make_gen20(0x999u);
        const TlbStream in = encode_tlb(0.37, 20000, g);
        CarryAdder state(20);
        CHECK(nonscaled_add(std::vector<TlbStream>{in}, state) == in);
    }
    SECTION("single non-canonical input: value error bounded by the residue") {
        std::mt19937_64 rng(22);
        const std::size_t L = 10000;
        const TlbStream in(random_stream(rng, L, 0.5), random_stream(rng, L, 0.3));
        CarryAdder state(20);
        const TlbStream out = nonscaled_add(std::vector<TlbStream>{in}, state);
        CHECK(std::abs(decode_tlb(out) - decode_tlb(in)) <=
              static_cast<double>(state.depth()) / static_cast<double>(L) + 1e-12);
    }
    SECTION("two independent inputs add") {
        const std::size_t L = 100000;
        auto g1 = make_gen20(0xaaaau);
        auto g2 = make_gen20(0x1357u);
        CarryAdder state(20);
        const TlbStream out = nonscaled_add(
            std::vector<TlbStream>{encode_tlb(0.3, L, g1), encode_tlb(0.4, L, g2)}, state);
        CHECK(decode_tlb(out) == Catch::Approx(0.7).margin(0.02));
        CHECK(state.dropped_total() == 0);
    }
    SECTION("sums beyond one saturate and are diagnosed") {
        const std::size_t L = 20000;
        auto g1 = make_gen20(0xbbbbu);
        auto g2 = make_gen20(0x2468u);
        CarryAdder state(20);
        const TlbStream out = nonscaled_add(
            std::vector<TlbStream>{encode_tlb(0.9, L, g1), encode_tlb(0.9, L, g2)}, state);
        CHECK(decode_tlb(out) >= 0.95);
        CHECK(state.dropped_total() > 0);
    }
    CarryAdder state(4);
    CHECK_THROWS_AS(nonscaled_add(std::vector<TlbStream>{}, state), structural_error);
    CHECK_THROWS_AS(CarryAdder(0), std::domain_error);
}

TEST_CASE("tlb_multiply") {
    const std::size_t L = 100000;
    SECTION("zero input gives an exactly zero product") {
        auto g = make_gen20(0xcafeu);
        const TlbStream y = encode_tlb(0.8, 4000, g);
        const TlbStream out = tlb_multiply(TlbStream::zeros(4000), y, 20);
        CHECK(out.p().all_zero());
        CHECK(out.n().all_zero());
    }
    SECTION("independent streams multiply with sign") {
        auto gx = make_gen20(0xd00du);
        auto gy = make_gen20(0x3141u);
        const TlbStream x = encode_tlb(0.5, L, gx);
        const TlbStream y = encode_tlb(-0.5, L, gy);
        CHECK(decode_tlb(tlb_multiply(x, y, 20)) == Catch::Approx(-0.25).margin(0.02));
    }
    SECTION("a correlated square is biased toward the value itself") {
        auto gx = make_gen20(0xe00eu);
        const TlbStream x = encode_tlb(0.5, L, gx);
        const double out = decode_tlb(tlb_multiply(x, x, 20));
        CHECK(out == Catch::Approx(0.5).margin(0.02));
        CHECK(out > 0.25 + 0.05);  // not the true square: decorrelation is required
    }
    CHECK_THROWS_AS(tlb_multiply(TlbStream::zeros(3), TlbStream::zeros(4), 2), structural_error);
}

TEST_CASE("scalar_product") {
    SECTION("zero vector gives an exactly zero stream") {
        auto g = make_gen20(0xf00fu);
        std::vector<TlbStream> x{TlbStream::zeros(2000), TlbStream::zeros(2000)};
        std::vector<TlbStream> a{encode_tlb(0.9, 2000, g), encode_tlb(-0.7, 2000, g)};
        CarryAdder state(20);
        const TlbStream out = scalar_product(x, a, state);
        CHECK(out.p().all_zero());
        CHECK(out.n().all_zero());
    }
    SECTION("two-element cancellation") {
        const std::size_t L = 100000;
        std::vector<TlbStream> x, a;
        std::uint32_t seed = 0x100;
        for (double v : {0.5, -0.5}) {
            auto g = make_gen20(seed += 0x111);
            x.push_back(encode_tlb(v, L, g));
        }
        for (double v : {0.5, 0.5}) {
            auto g = make_gen20(seed += 0x111);
            a.push_back(encode_tlb(v, L, g));
        }
        CarryAdder state(20);
        CHECK(decode_tlb(scalar_product(x, a, state)) == Catch::Approx(0.0).margin(0.02));
    }
    SECTION("n=16 random vectors against the float oracle") {
        const std::size_t L = 65534;
        std::mt19937_64 rng(88);
        for (int rep = 0; rep < 3; ++rep) {
            std::vector<double> xv(16), av(16);
            double dot;
            do {
                dot = 0.0;
                for (int j = 0; j < 16; ++j) {
                    xv[j] = 2.0 * (static_cast<double>(rng() >> 11) * 0x1.0p-53) - 1.0;
                    av[j] = 2.0 * (static_cast<double>(rng() >> 11) * 0x1.0p-53) - 1.0;
                    xv[j] *= 0.35;  // keep the true product inside [-0.5, 0.5]
                    dot += xv[j] * av[j];
                }
            } while (std::abs(dot) > 0.5);
            std::vector<TlbStream> x, a;
            for (int j = 0; j < 16; ++j) {
                LfsrGenerator gx(static_cast<std::uint32_t>(rng() % 65535 + 1));
                LfsrGenerator ga(static_cast<std::uint32_t>(rng() % 65535 + 1));
                x.push_back(encode_tlb(xv[j], L, gx));
                a.push_back(encode_tlb(av[j], L, ga));
            }
            CarryAdder state(20);
            CHECK(decode_tlb(scalar_product(x, a, state)) == Catch::Approx(dot).margin(0.05));
        }
    }
    std::vector<TlbStream> x{TlbStream::zeros(4)};
    std::vector<TlbStream> a{TlbStream::zeros(4), TlbStream::zeros(4)};
    CarryAdder state(4);
    CHECK_THROWS_AS(scalar_product(x, a, state), structural_error);
}

TEST_CASE("delay_stream") {
    std::mt19937_64 rng(31);
    const TlbStream s(random_stream(rng, 200, 0.5), random_stream(rng, 200, 0.5));
    SECTION("depth zero is the identity") { CHECK(delay_stream(s, 0) == s); }
    SECTION("depth equal to the length zeroes everything") {
        const TlbStream out = delay_stream(s, 200);
        CHECK(out.p().all_zero());
        CHECK(out.n().all_zero());
    }
    SECTION("matches the DelayLine flip-flop model") {
        DelayLine line(7);
        const BitStream direct = delay_stream(s.p(), 7);
        for (std::size_t l = 0; l < s.size(); ++l) CHECK(line.push(s.p()[l]) == direct[l]);
    }
    SECTION("a delayed self-product restores the square") {
        const std::size_t L = 65534;
        LfsrGenerator g(0x4242u);
        const BitStream a = generate_unipolar(0.5, L, g);
        const BitStream d = delay_stream(a, 10);
        std::size_t both = 0;
        for (std::size_t l = 0; l < L; ++l) both += a[l] & d[l];
        const double frac = static_cast<double>(both) / static_cast<double>(L);
        CHECK(frac == Catch::Approx(0.25).margin(0.01));
    }
}

TEST_CASE("circuits are deterministic functions of seeds") {
    auto run = [] {
        auto gv = make_gen20(0x6001u);
        auto gl = make_gen20(0x6002u);
        const TlbStream v = encode_tlb(0.42, 30000, gv);
        const BitStream lambda = generate_unipolar(0.5, 30000, gl);
        return shrink_stream(v, lambda, 10);
    };
    CHECK(run() == run());
}

TEST_CASE("trace output is a golden per-cycle dump") {
    SECTION("max circuit") {
        std::ostringstream trace;
        max_stream(BitStream::from_string("110"), BitStream::from_string("000"), 1, &trace);
        CHECK(trace.str() ==
              "# cycle\ta\tb\tcredit\tout\n"
              "0\t1\t0\t1\t0\n"
              "1\t1\t0\t1\t1\n"
              "2\t0\t0\t1\t0\n");
    }
    SECTION("carry adder") {
        std::ostringstream trace;
        CarryAdder state(4);
        const TlbStream in(BitStream::from_string("11"), BitStream::from_string("01"));
        nonscaled_add(std::vector<TlbStream>{in}, state, &trace);
        CHECK(trace.str() ==
              "# cycle\tpos_in\tneg_in\tpos_store\tneg_store\tp_out\tn_out\n"
              "0\t1\t0\t0\t0\t1\t0\n"
              "1\t1\t1\t0\t0\t0\t0\n");
    }
}
