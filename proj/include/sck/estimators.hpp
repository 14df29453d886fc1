#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <functional>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

#include "sck/bitstream.hpp"
#include "sck/circuits.hpp"
#include "sck/errors.hpp"
#include "sck/fixed_point.hpp"
#include "sck/linear_problem.hpp"

namespace sck::estimators {

enum class Backend { kFloat, kFixed, kStochastic };

inline std::string backend_name(Backend b) {
    switch (b) {
        case Backend::kFloat: return "float";
        case Backend::kFixed: return "fixed";
        case Backend::kStochastic: return "stochastic";
    }
    return "?";
}

struct SolverConfig {
    double lambda = 0.5;               // shrink threshold used inside the loop
    int iterations = 100;              // N
    Backend backend = Backend::kFloat;
    std::size_t stream_length = 65534; // L, one cycle less than a full period
    int max_credit = 10;               // register length of the shrink maximum blocks
    int carry_depth = 20;              // carry store depth of adders and multipliers
    int decorrelation_delay = 10;      // flip-flop delay on the reused row streams
    unsigned lfsr_width = 16;
    std::uint64_t seed = 1;
};

struct SolverDiagnostics {
    std::uint64_t value_clamps = 0;      // stochastic iterate left [-1, 1]
    std::uint64_t carry_drops = 0;       // carry units lost to store saturation
    std::uint64_t quant_saturations = 0; // fixed-point saturation events
};

struct EstimatorOutput {
    Eigen::VectorXd x_hat;
    std::vector<double> residual_log;    // ||y - A x_hat^(k)||_2 per iteration
    SolverDiagnostics diagnostics;
};

/// Observer invoked once per iteration with the freshly computed estimate
/// x_hat^(k) and the updated dual iterate v^(k+1).
using IterationObserver =
    std::function<void(int iteration, const Eigen::VectorXd& x_hat, const Eigen::VectorXd& v)>;

/// Soft threshold: max(|v| - lambda, 0) * sign(v).
inline double shrink_scalar(double v, double lambda) {
    if (!(lambda >= 0.0)) throw std::domain_error("shrink_scalar: lambda must be >= 0");
    const double magnitude = std::abs(v) - lambda;
    if (magnitude <= 0.0) return 0.0;
    return v < 0.0 ? -magnitude : magnitude;
}

/// Zero-based row index of iteration k (1-based): rows are reused cyclically.
inline Eigen::Index cyclic_row_index(int iteration, Eigen::Index rows) {
    return static_cast<Eigen::Index>((iteration - 1) % rows);
}

/// Scales each row of A and the matching measurement to unit row norm. The
/// iterate sequence of the row-action update is unchanged (the 1/||a_i||^2
/// coefficient becomes 1), which removes the division from the loop.
inline LinearProblem row_normalize(const LinearProblem& p) {
    validate_problem(p);
    LinearProblem out = p;
    for (Eigen::Index i = 0; i < p.A.rows(); ++i) {
        const double norm = p.A.row(i).norm();
        if (norm == 0.0)
            throw degenerate_error("row_normalize: zero row " + std::to_string(i));
        out.A.row(i) /= norm;
        out.y(i) /= norm;
    }
    return out;
}

/// Rescales the measurements so the solver can run with the fixed internal
/// threshold 0.5 in place of lambda_prime: y <- y * (0.5 / lambda_prime).
/// Returns the scaled problem and the scale factor; the solver's estimate
/// must be divided by that factor. The ground truth, when present, is scaled
/// along for consistency.
inline std::pair<LinearProblem, double> apply_lambda_scaling(const LinearProblem& p,
                                                             double lambda_prime) {
    if (!(lambda_prime > 0.0))
        throw std::domain_error("apply_lambda_scaling: lambda_prime must be > 0");
    const double scale = 0.5 / lambda_prime;
    LinearProblem out = p;
    out.y *= scale;
    for (Eigen::Index i = 0; i < out.y.size(); ++i)
        if (std::abs(out.y(i)) >= 1.0)
            throw std::range_error("apply_lambda_scaling: scaled measurement " +
                                   std::to_string(i) + " leaves [-1, 1)");
    if (out.x_true) *out.x_true *= scale;
    return {std::move(out), scale};
}

/// Double-precision reference: row-cyclic dual update with a soft-threshold
/// step, lines 1-9 of the iteration verbatim.
inline EstimatorOutput sparse_kaczmarz_float(const LinearProblem& p, const SolverConfig& cfg,
                                             const IterationObserver& observer = {}) {
    validate_problem(p);
    if (cfg.iterations < 1) throw std::domain_error("sparse_kaczmarz_float: N must be >= 1");
    if (!(cfg.lambda >= 0.0)) throw std::domain_error("sparse_kaczmarz_float: lambda >= 0");
    const Eigen::Index m = p.A.rows(), n = p.A.cols();
    Eigen::VectorXd row_norm_sq(m);
    for (Eigen::Index i = 0; i < m; ++i) {
        row_norm_sq(i) = p.A.row(i).squaredNorm();
        if (row_norm_sq(i) == 0.0)
            throw degenerate_error("sparse_kaczmarz_float: zero row " + std::to_string(i));
    }
    EstimatorOutput out;
    out.residual_log.reserve(static_cast<std::size_t>(cfg.iterations));
    Eigen::VectorXd v = Eigen::VectorXd::Zero(n);
    Eigen::VectorXd x_hat = Eigen::VectorXd::Zero(n);
    for (int k = 1; k <= cfg.iterations; ++k) {
        for (Eigen::Index j = 0; j < n; ++j) x_hat(j) = shrink_scalar(v(j), cfg.lambda);
        out.residual_log.push_back((p.y - p.A * x_hat).norm());
        const Eigen::Index i = cyclic_row_index(k, m);
        const double correction = (p.y(i) - p.A.row(i).dot(x_hat)) / row_norm_sq(i);
        v += correction * p.A.row(i).transpose();
        if (observer) observer(k, x_hat, v);
    }
    // the returned estimate incorporates all N row updates
    for (Eigen::Index j = 0; j < n; ++j) x_hat(j) = shrink_scalar(v(j), cfg.lambda);
    out.x_hat = std::move(x_hat);
    return out;
}

/// Bit-true fixed-point backend: rows are pre-normalized (the update is then
/// coefficient-free) and every stored quantity and arithmetic result is
/// quantized to the format. Saturation is diagnosed, never raised.
inline EstimatorOutput sparse_kaczmarz_fixed(const LinearProblem& p, const SolverConfig& cfg,
                                             const FixedPointFormat& fmt) {
    if (cfg.iterations < 1) throw std::domain_error("sparse_kaczmarz_fixed: N must be >= 1");
    if (!(cfg.lambda >= 0.0 && cfg.lambda < 1.0))
        throw std::domain_error("sparse_kaczmarz_fixed: lambda must lie in [0, 1)");
    const LinearProblem pn = row_normalize(p);
    const Eigen::Index m = pn.A.rows(), n = pn.A.cols();

    EstimatorOutput out;
    std::uint64_t& sat = out.diagnostics.quant_saturations;
    std::vector<std::int64_t> a_raw(static_cast<std::size_t>(m * n));
    for (Eigen::Index i = 0; i < m; ++i)
        for (Eigen::Index j = 0; j < n; ++j)
            a_raw[static_cast<std::size_t>(i * n + j)] = fmt.quantize(pn.A(i, j), sat);
    std::vector<std::int64_t> y_raw(static_cast<std::size_t>(m));
    for (Eigen::Index i = 0; i < m; ++i) y_raw[static_cast<std::size_t>(i)] = fmt.quantize(pn.y(i), sat);
    const std::int64_t lambda_raw = fmt.quantize(cfg.lambda, sat);

    std::vector<std::int64_t> v(static_cast<std::size_t>(n), 0);
    std::vector<std::int64_t> x(static_cast<std::size_t>(n), 0);
    Eigen::VectorXd x_dbl = Eigen::VectorXd::Zero(n);
    out.residual_log.reserve(static_cast<std::size_t>(cfg.iterations));
    for (int k = 1; k <= cfg.iterations; ++k) {
        for (Eigen::Index j = 0; j < n; ++j) {
            x[static_cast<std::size_t>(j)] =
                fmt.shrink(v[static_cast<std::size_t>(j)], lambda_raw, sat);
            x_dbl(j) = fmt.to_double(x[static_cast<std::size_t>(j)]);
        }
        out.residual_log.push_back((pn.y - pn.A * x_dbl).norm());
        const Eigen::Index i = cyclic_row_index(k, m);
        const std::int64_t* row = &a_raw[static_cast<std::size_t>(i * n)];
        std::int64_t r = y_raw[static_cast<std::size_t>(i)];
        for (Eigen::Index j = 0; j < n; ++j)
            r = fmt.sub(r, fmt.mul(row[j], x[static_cast<std::size_t>(j)], sat), sat);
        for (Eigen::Index j = 0; j < n; ++j)
            v[static_cast<std::size_t>(j)] =
                fmt.add(v[static_cast<std::size_t>(j)], fmt.mul(row[j], r, sat), sat);
    }
    out.x_hat = x_dbl;
    return out;
}

namespace detail {

/// Hands out per-stream generator seeds derived from the master seed via a
/// counter hash; seeds are nonzero and distinct within one iteration so no
/// two concurrently used streams coincide.
class SeedSequencer {
public:
    SeedSequencer(std::uint64_t master, unsigned width)
        : master_(master), mask_((1u << width) - 1u) {}

    void begin_iteration() { used_.clear(); }

    std::uint32_t next() {
        for (;;) {
            const std::uint64_t h =
                sck::detail::splitmix64(master_ ^ sck::detail::splitmix64(counter_++));
            const auto s = static_cast<std::uint32_t>(h) & mask_;
            if (s == 0) continue;
            if (used_.insert(s).second) return s;
        }
    }

private:
    std::uint64_t master_;
    std::uint32_t mask_;
    std::uint64_t counter_ = 0;
    std::unordered_set<std::uint32_t> used_;
};

} // namespace detail

/// Cycle-accurate stochastic backend. Per iteration: the dual iterates are
/// re-encoded as canonical two-line streams with fresh seeds, shrunk and
/// cancelled, fed through the scalar product with the active row's streams,
/// subtracted from the measurement stream (line swap + non-scaled add),
/// multiplied with the delayed row streams, and accumulated back into the
/// dual streams, which are decoded exactly for the next iteration's storage.
/// Rows must be unit-norm (row_normalize) and measurements inside [-1, 1].
inline EstimatorOutput sparse_kaczmarz_stochastic(const LinearProblem& p,
                                                  const SolverConfig& cfg) {
    validate_problem(p);
    if (cfg.iterations < 1) throw std::domain_error("sparse_kaczmarz_stochastic: N must be >= 1");
    if (!(cfg.lambda >= 0.0 && cfg.lambda < 1.0))
        throw std::domain_error("sparse_kaczmarz_stochastic: lambda must lie in [0, 1)");
    if (cfg.stream_length == 0)
        throw std::domain_error("sparse_kaczmarz_stochastic: stream length must be positive");
    const Eigen::Index m = p.A.rows(), n = p.A.cols();
    for (Eigen::Index i = 0; i < m; ++i)
        if (std::abs(p.A.row(i).norm() - 1.0) > 1e-9)
            throw precondition_error("sparse_kaczmarz_stochastic: rows must be unit norm "
                                     "(apply row_normalize first)");
    for (Eigen::Index i = 0; i < m; ++i)
        if (std::abs(p.y(i)) > 1.0)
            throw std::domain_error("sparse_kaczmarz_stochastic: measurement " +
                                    std::to_string(i) + " outside [-1, 1]");

    const std::size_t L = cfg.stream_length;
    const auto taps = LfsrGenerator::default_taps(cfg.lfsr_width);
    detail::SeedSequencer seeds(cfg.seed, cfg.lfsr_width);
    auto fresh_gen = [&] { return LfsrGenerator(cfg.lfsr_width, taps, seeds.next()); };

    EstimatorOutput out;
    SolverDiagnostics& diag = out.diagnostics;
    Eigen::VectorXd v = Eigen::VectorXd::Zero(n);
    Eigen::VectorXd x_hat = Eigen::VectorXd::Zero(n);
    out.residual_log.reserve(static_cast<std::size_t>(cfg.iterations));

    for (int k = 1; k <= cfg.iterations; ++k) {
        seeds.begin_iteration();
        const Eigen::Index i = cyclic_row_index(k, m);

        // threshold stream, generated once and fanned out to every shrink block
        BitStream lambda_stream(L);
        if (cfg.lambda > 0.0) {
            auto gen = fresh_gen();
            lambda_stream = generate_unipolar(cfg.lambda, L, gen);
        }

        std::vector<TlbStream> v_streams;
        v_streams.reserve(static_cast<std::size_t>(n));
        for (Eigen::Index j = 0; j < n; ++j) {
            auto gen = fresh_gen();
            v_streams.push_back(encode_tlb(v(j), L, gen));
        }

        // shrink + cancellation (bypassed entirely when lambda is zero)
        std::vector<TlbStream> x_streams;
        x_streams.reserve(static_cast<std::size_t>(n));
        for (Eigen::Index j = 0; j < n; ++j) {
            x_streams.push_back(cfg.lambda > 0.0
                                    ? circuits::shrink_stream(v_streams[static_cast<std::size_t>(j)],
                                                              lambda_stream, cfg.max_credit)
                                    : v_streams[static_cast<std::size_t>(j)]);
            x_hat(j) = decode_tlb(x_streams[static_cast<std::size_t>(j)]);
        }
        out.residual_log.push_back((p.y - p.A * x_hat).norm());

        std::vector<TlbStream> a_streams;
        a_streams.reserve(static_cast<std::size_t>(n));
        for (Eigen::Index j = 0; j < n; ++j) {
            auto gen = fresh_gen();
            a_streams.push_back(encode_tlb(p.A(i, j), L, gen));
        }

        circuits::CarryAdder product_state(cfg.carry_depth);
        const TlbStream product = circuits::scalar_product(x_streams, a_streams, product_state);
        diag.carry_drops += product_state.dropped_total();

        auto y_gen = fresh_gen();
        const TlbStream y_stream = encode_tlb(p.y(i), L, y_gen);
        circuits::CarryAdder residual_state(cfg.carry_depth);
        const std::vector<TlbStream> sub_inputs{y_stream, product.negated()};
        const TlbStream residual = circuits::nonscaled_add(sub_inputs, residual_state);
        diag.carry_drops += residual_state.dropped_total();

        for (Eigen::Index j = 0; j < n; ++j) {
            const TlbStream delayed = circuits::delay_stream(
                a_streams[static_cast<std::size_t>(j)],
                static_cast<std::size_t>(cfg.decorrelation_delay));
            circuits::CarryAdder mult_state(cfg.carry_depth);
            const TlbStream update = circuits::tlb_multiply(residual, delayed, mult_state);
            diag.carry_drops += mult_state.dropped_total();

            circuits::CarryAdder add_state(cfg.carry_depth);
            const std::vector<TlbStream> add_inputs{v_streams[static_cast<std::size_t>(j)],
                                                    update};
            const TlbStream v_next = circuits::nonscaled_add(add_inputs, add_state);
            diag.carry_drops += add_state.dropped_total();

            double value = decode_tlb(v_next);
            if (value > 1.0) {
                value = 1.0;
                ++diag.value_clamps;
            } else if (value < -1.0) {
                value = -1.0;
                ++diag.value_clamps;
            }
            v(j) = value;
        }
    }
    out.x_hat = x_hat;
    return out;
}

/// Builds the prewindowed convolution (Toeplitz) problem of an adaptive
/// filter: row i holds the input window [u_i, u_{i-1}, ..., u_{i-n+1}]
/// (zeros before the signal start), measurements are the desired signal,
/// ground truth the filter taps. With a zero threshold and one pass over the
/// rows, the row-action iteration is exactly the normalized LMS recursion.
inline LinearProblem build_convolution_problem(const Eigen::VectorXd& taps,
                                               const Eigen::VectorXd& input,
                                               const Eigen::VectorXd& desired) {
    if (taps.size() < 1 || input.size() < 1 || desired.size() < 1)
        throw degenerate_error("build_convolution_problem: empty signals");
    if (input.size() != desired.size())
        throw structural_error("build_convolution_problem: input/desired lengths differ");
    const Eigen::Index n = taps.size();
    const Eigen::Index m = desired.size();
    LinearProblem p;
    p.A = Eigen::MatrixXd::Zero(m, n);
    for (Eigen::Index i = 0; i < m; ++i)
        for (Eigen::Index j = 0; j < n; ++j)
            if (i - j >= 0) p.A(i, j) = input(i - j);
    p.y = desired;
    p.x_true = taps;
    validate_problem(p);
    return p;
}

} // namespace sck::estimators
