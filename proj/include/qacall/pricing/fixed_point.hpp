#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <string>

#include "qacall/errors.hpp"
#include "qacall/sim/statevector.hpp"

namespace qacall::pricing {

/// Integer fixed-point code: value = code * 2^-p.
using Code = std::int64_t;

/// Round-to-nearest with ties to even, independent of the FP environment.
[[nodiscard]] inline double round_half_even(double y) {
    const double f = std::floor(y);
    const double diff = y - f;
    if (diff > 0.5) {
        return f + 1.0;
    }
    if (diff < 0.5) {
        return f;
    }
    return std::fmod(f, 2.0) == 0.0 ? f : f + 1.0;
}

/// Code of x with p fractional bits.
[[nodiscard]] inline Code quantize(double x, std::size_t frac_bits) {
    if (!std::isfinite(x)) {
        throw ArgumentError("quantize: value is not finite");
    }
    const double y = round_half_even(std::ldexp(x, static_cast<int>(frac_bits)));
    if (std::abs(y) > 0x1p52) {
        throw ArgumentError("quantize: value out of range for " + std::to_string(frac_bits) + " fractional bits");
    }
    return static_cast<Code>(y);
}

/**
 * Two's-complement format of width m = int_bits + frac_bits + 1
 * (unsigned formats drop the sign bit).
 */
struct FixedPointFormat {
    std::size_t int_bits{0};
    std::size_t frac_bits{2};
    bool is_signed{true};

    [[nodiscard]] std::size_t width() const { return int_bits + frac_bits + (is_signed ? 1 : 0); }
    [[nodiscard]] Code min_code() const { return is_signed ? -(Code{1} << (width() - 1)) : 0; }
    [[nodiscard]] Code max_code() const {
        return is_signed ? (Code{1} << (width() - 1)) - 1 : (Code{1} << width()) - 1;
    }
    [[nodiscard]] bool contains(Code c) const { return c >= min_code() && c <= max_code(); }
    [[nodiscard]] double resolution() const { return std::ldexp(1.0, -static_cast<int>(frac_bits)); }
    [[nodiscard]] double value(Code c) const { return static_cast<double>(c) * resolution(); }

    /// Register bit pattern of a code.
    [[nodiscard]] sim::Index encode(Code c) const {
        return static_cast<sim::Index>(c) & ((sim::Index{1} << width()) - 1);
    }
    [[nodiscard]] Code decode(sim::Index bits) const {
        const Code raw = static_cast<Code>(bits);
        if (is_signed && ((bits >> (width() - 1)) & 1U) != 0U) {
            return raw - (Code{1} << width());
        }
        return raw;
    }
    /// Order-preserving unsigned view: code - min_code().
    [[nodiscard]] sim::Index offset(Code c) const { return static_cast<sim::Index>(c - min_code()); }

    void validate() const {
        if (frac_bits > 40 || width() < 1 || width() > 48) {
            throw ArgumentError("fixed-point format: width " + std::to_string(width()) + " with p = " +
                                std::to_string(frac_bits) + " is out of range");
        }
    }
};

/// Smallest signed format with p fractional bits holding every code in [lo, hi].
[[nodiscard]] inline FixedPointFormat fitting_format(Code lo, Code hi, std::size_t frac_bits) {
    FixedPointFormat f{0, frac_bits, true};
    while (!(f.contains(lo) && f.contains(hi))) {
        ++f.int_bits;
        if (f.width() > 48) {
            throw ArgumentError("fixed-point format: range too wide");
        }
    }
    return f;
}

} // namespace qacall::pricing
