#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>

namespace sck::estimators {

/// Two's-complement fractional format: W bits total, W-1 fraction bits,
/// values in [-1, 1). All arithmetic is integer-exact: products truncate
/// toward negative infinity, sums saturate at the representable range.
class FixedPointFormat {
public:
    explicit FixedPointFormat(unsigned width) : width_(width) {
        if (width < 2 || width > 32)
            throw std::domain_error("FixedPointFormat: width must be in [2, 32]");
    }

    unsigned width() const { return width_; }
    unsigned fraction_bits() const { return width_ - 1; }
    double step() const { return std::ldexp(1.0, -static_cast<int>(width_ - 1)); }

    std::int64_t raw_min() const { return -(std::int64_t{1} << (width_ - 1)); }
    std::int64_t raw_max() const { return (std::int64_t{1} << (width_ - 1)) - 1; }

    /// Quantize a real value: truncation toward negative infinity, then
    /// saturation. Saturations are counted into `saturations`.
    std::int64_t quantize(double x, std::uint64_t& saturations) const {
        const double scaled = std::floor(std::ldexp(x, static_cast<int>(width_ - 1)));
        if (scaled < static_cast<double>(raw_min())) {
            ++saturations;
            return raw_min();
        }
        if (scaled > static_cast<double>(raw_max())) {
            ++saturations;
            return raw_max();
        }
        return static_cast<std::int64_t>(scaled);
    }

    double to_double(std::int64_t raw) const {
        return std::ldexp(static_cast<double>(raw), -static_cast<int>(width_ - 1));
    }

    std::int64_t add(std::int64_t a, std::int64_t b, std::uint64_t& saturations) const {
        return saturate(a + b, saturations);
    }

    std::int64_t sub(std::int64_t a, std::int64_t b, std::uint64_t& saturations) const {
        return saturate(a - b, saturations);
    }

    std::int64_t mul(std::int64_t a, std::int64_t b, std::uint64_t& saturations) const {
        // arithmetic shift truncates toward negative infinity
        return saturate((a * b) >> (width_ - 1), saturations);
    }

    /// Soft threshold in the integer domain: max(|v| - lambda, 0) * sign(v).
    std::int64_t shrink(std::int64_t v, std::int64_t lambda_raw,
                        std::uint64_t& saturations) const {
        const std::int64_t magnitude = (v < 0 ? -v : v) - lambda_raw;
        if (magnitude <= 0) return 0;
        return saturate(v < 0 ? -magnitude : magnitude, saturations);
    }

private:
    std::int64_t saturate(std::int64_t raw, std::uint64_t& saturations) const {
        if (raw < raw_min()) {
            ++saturations;
            return raw_min();
        }
        if (raw > raw_max()) {
            ++saturations;
            return raw_max();
        }
        return raw;
    }

    unsigned width_;
};

} // namespace sck::estimators
