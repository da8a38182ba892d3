#pragma once

/**
 * @file
 * Quantized path semantics shared by the pricing circuit and the
 * fixed-point closed-form oracle: increment codes, threshold codes, branch
 * classification and the payoff <-> amplitude mapping.
 */

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "qacall/errors.hpp"
#include "qacall/loading/exponential.hpp"
#include "qacall/loading/gaussian.hpp"
#include "qacall/pricing/contract.hpp"
#include "qacall/pricing/fixed_point.hpp"

namespace qacall::pricing {

using loading::GaussianGridSpec;
using sim::Index;

/// Code of mu*dt + sigma*z_g*sqrt(dt). Increments do not depend on the timestep.
[[nodiscard]] inline Code log_return_increment(Index g, const AutocallableContract &contract,
                                               const GaussianGridSpec &grid, const FixedPointFormat &fmt) {
    if (g >= grid.points()) {
        throw ArgumentError("grid index " + std::to_string(g) + " out of range");
    }
    const double l = contract.mu * contract.dt + contract.sigma * grid.value(g) * std::sqrt(contract.dt);
    const Code c = quantize(l, fmt.frac_bits);
    if (!fmt.contains(c)) {
        const auto need = fitting_format(c, c, fmt.frac_bits).int_bits;
        throw ArgumentError("log-return increment " + std::to_string(l) + " overflows the format; needs int_bits >= " +
                            std::to_string(need));
    }
    return c;
}

/// Which payoff family a path falls into.
enum class Branch { Binary, Put, Zero };

struct PathClass {
    Branch branch{Branch::Zero};
    std::size_t binary{0}; ///< index of the triggering binary when branch == Binary
};

/// Everything the circuit and the quantized oracle must agree on.
struct QuantizedModel {
    AutocallableContract contract;
    GaussianGridSpec grid;
    FixedPointFormat fmt;
    std::vector<Code> increments;   ///< per grid index
    Code barrier_code{0};           ///< code of ln b
    Code strike_code{0};            ///< code of ln K
    std::vector<Code> binary_codes; ///< code of ln k_i
    Code min_path_code{0};          ///< T * smallest increment, l_min
    Code max_path_code{0};
    bool put_reachable{false};      ///< some path ends strictly below ln K

    [[nodiscard]] double rate() const { return fmt.resolution(); }
    /// Partial-exponential interval for the reference register, offset view.
    [[nodiscard]] Index put_x0() const { return fmt.offset(min_path_code) + 1; }
    [[nodiscard]] Index put_x1() const { return fmt.offset(strike_code); }

    [[nodiscard]] bool barrier_hit(Code l) const { return l < barrier_code; }
    [[nodiscard]] bool binary_hit(std::size_t i, Code l) const { return l > binary_codes[i]; }
    [[nodiscard]] bool below_strike(Code l) const { return l < strike_code; }

    /// Squared integration amplitude of the put leg at terminal code l.
    [[nodiscard]] double put_fraction(Code l) const {
        if (!put_reachable) {
            return 0.0;
        }
        const double amp = loading::integration_amplitude_partial(rate(), put_x0(), put_x1(), fmt.offset(l));
        return amp * amp;
    }

    /// Branch of a path given its cumulative codes l_1..l_T.
    [[nodiscard]] PathClass classify(std::span<const Code> cumulative) const {
        for (std::size_t i = 0; i < contract.binaries.size(); ++i) {
            if (binary_hit(i, cumulative[contract.binaries[i].step - 1])) {
                return {Branch::Binary, i};
            }
        }
        const bool crossed = std::any_of(cumulative.begin(), cumulative.end(), [this](Code l) { return barrier_hit(l); });
        if (crossed && below_strike(cumulative.back())) {
            return {Branch::Put, 0};
        }
        return {Branch::Zero, 0};
    }
};

/// Validates the format against every reachable accumulator value and the strike code.
inline void check_format(const QuantizedModel &m) {
    const Code lo = std::min(m.min_path_code, *std::min_element(m.increments.begin(), m.increments.end()));
    const Code hi = std::max(m.max_path_code, *std::max_element(m.increments.begin(), m.increments.end()));
    const Code need_hi = m.put_reachable ? std::max(hi, m.strike_code) : hi;
    if (!m.fmt.contains(lo) || !m.fmt.contains(need_hi)) {
        const auto need = fitting_format(lo, need_hi, m.fmt.frac_bits).int_bits;
        throw ArgumentError("accumulator range [" + std::to_string(lo) + ", " + std::to_string(hi) +
                            "] does not fit in " + std::to_string(m.fmt.width()) +
                            " bits; needs int_bits >= " + std::to_string(need));
    }
}

/**
 * Quantizes the contract on the grid with p fractional bits. Without
 * `int_bits` the narrowest signed format covering every partial sum and the
 * thresholds is chosen.
 */
[[nodiscard]] inline QuantizedModel quantize_model(const AutocallableContract &contract, const GaussianGridSpec &grid,
                                                   std::size_t frac_bits,
                                                   std::optional<std::size_t> int_bits = std::nullopt) {
    contract.validate();
    grid.validate();
    QuantizedModel m;
    m.contract = contract;
    m.grid = grid;
    // Wide scratch format for quantizing; narrowed below.
    const FixedPointFormat wide{47 - std::min<std::size_t>(frac_bits, 40), frac_bits, true};
    wide.validate();
    for (Index g = 0; g < grid.points(); ++g) {
        m.increments.push_back(log_return_increment(g, contract, grid, wide));
    }
    m.barrier_code = quantize(std::log(contract.barrier), frac_bits);
    m.strike_code = quantize(std::log(contract.strike), frac_bits);
    for (const auto &b : contract.binaries) {
        m.binary_codes.push_back(quantize(std::log(b.strike), frac_bits));
    }
    const auto steps = static_cast<Code>(contract.steps);
    const Code inc_min = *std::min_element(m.increments.begin(), m.increments.end());
    const Code inc_max = *std::max_element(m.increments.begin(), m.increments.end());
    m.min_path_code = steps * inc_min;
    m.max_path_code = steps * inc_max;
    m.put_reachable = m.strike_code > m.min_path_code;

    if (int_bits) {
        m.fmt = FixedPointFormat{*int_bits, frac_bits, true};
        m.fmt.validate();
    } else {
        // Thresholds are compared as integers and need not fit; the strike
        // does when it bounds the reference register.
        const Code lo = std::min(inc_min, m.min_path_code);
        Code hi = std::max(inc_max, m.max_path_code);
        if (m.put_reachable) {
            hi = std::max(hi, m.strike_code);
        }
        m.fmt = fitting_format(lo, hi, frac_bits);
    }
    check_format(m);
    return m;
}

[[nodiscard]] inline QuantizedModel quantize_model(const AutocallableContract &contract, const GaussianGridSpec &grid,
                                                   const FixedPointFormat &fmt) {
    return quantize_model(contract, grid, fmt.frac_bits, fmt.int_bits);
}

/**
 * Payoff <-> amplitude map: amplitude^2 = (P - P_min) / R.
 * The put leg is discounted to today like the binaries, so P_min and the
 * put span carry the factor e^{-r T dt}.
 */
struct AmplitudeMapping {
    double p_min{0.0};
    double normalization{1.0};     ///< R
    double f_max{0.0};             ///< largest discounted binary payout
    double r_tmin{1.0};            ///< exp(l_min)
    double put_span{0.0};          ///< e^{-rT dt} (K - r_Tmin) V, 0 when the put is unreachable
    double zero_amplitude2{0.0};   ///< f~_z
    std::vector<double> binary_amplitude2; ///< f~_i

    [[nodiscard]] double to_amplitude2(double payoff) const { return (payoff - p_min) / normalization; }
};

[[nodiscard]] inline AmplitudeMapping derive_mapping(const QuantizedModel &m) {
    const auto &c = m.contract;
    AmplitudeMapping map;
    map.f_max = c.max_discounted_binary();
    map.r_tmin = std::exp(m.fmt.value(m.min_path_code));
    if (m.put_reachable) {
        map.put_span = c.discount(c.steps) * (c.strike - map.r_tmin) * c.notional;
    }
    map.p_min = -map.put_span;
    map.normalization = map.f_max + map.put_span;
    if (!(map.normalization > 0.0)) {
        throw NumericalError("amplitude mapping: normalization R = " + std::to_string(map.normalization) +
                             " is not positive (no binaries and an unreachable put)");
    }
    map.zero_amplitude2 = map.put_span / map.normalization;
    for (const auto &b : c.binaries) {
        const double f = map.to_amplitude2(b.payout * c.discount(b.step));
        if (f < 0.0 || f > 1.0 + 1e-15) {
            throw NumericalError("amplitude mapping: binary amplitude outside [0, 1]");
        }
        map.binary_amplitude2.push_back(std::min(f, 1.0));
    }
    return map;
}

[[nodiscard]] inline AmplitudeMapping derive_mapping(const AutocallableContract &contract, const GaussianGridSpec &grid,
                                                     const FixedPointFormat &fmt) {
    return derive_mapping(quantize_model(contract, grid, fmt));
}

/// Payoff estimate from an estimate of the good-state probability.
[[nodiscard]] inline double post_process(double a_hat, const AmplitudeMapping &map) {
    return a_hat * map.normalization + map.p_min;
}

/// Good-state probability contributed by one path class.
[[nodiscard]] inline double good_probability(const QuantizedModel &m, const AmplitudeMapping &map, const PathClass &pc,
                                             Code terminal) {
    switch (pc.branch) {
    case Branch::Binary:
        return map.binary_amplitude2[pc.binary];
    case Branch::Put:
        return map.zero_amplitude2 * m.put_fraction(terminal);
    case Branch::Zero:
        return map.zero_amplitude2;
    }
    return 0.0;
}

} // namespace qacall::pricing
