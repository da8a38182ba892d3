#pragma once

/**
 * @file
 * Exponential state preparation (full and partial) and the comparator that
 * integrates a loaded distribution into the amplitude of a target qubit.
 */

#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "qacall/errors.hpp"
#include "qacall/sim/ops.hpp"
#include "qacall/sim/statevector.hpp"

namespace qacall::loading {

using sim::Circuit;
using sim::Index;
using sim::QubitRegister;
using sim::Statevector;

/// Rotation angles theta_i = 2 atan(exp(a 2^i / 2)), one per qubit.
[[nodiscard]] inline std::vector<double> exp_angles(double a, std::size_t n) {
    if (n < 1) {
        throw ArgumentError("exp_angles: n must be at least 1");
    }
    std::vector<double> theta(n);
    for (std::size_t i = 0; i < n; ++i) {
        theta[i] = 2.0 * std::atan(std::exp(a * std::ldexp(1.0, static_cast<int>(i)) / 2.0));
    }
    return theta;
}

/// Parallel RY layer preparing sum_r sqrt(e^{a r}/Z)|r> on `qubits` (LSB-first).
[[nodiscard]] inline Circuit exponential_full_ops(const std::vector<std::size_t> &qubits, double a) {
    Circuit ops;
    const auto theta = exp_angles(a, qubits.size());
    for (std::size_t i = 0; i < qubits.size(); ++i) {
        ops.push_back(sim::ry(qubits[i], theta[i]));
    }
    return ops;
}

inline void prepare_exponential_full(Statevector &state, const QubitRegister &reg, double a) {
    const auto qubits = reg.qubits();
    sim::detail::check_within(state, qubits);
    if (!sim::register_is_ground(state, qubits)) {
        throw PreconditionError("prepare_exponential_full: register is not in its ground state");
    }
    sim::apply(state, exponential_full_ops(qubits, a));
}

/// Exponential weights e^{a r} restricted to the inclusive interval [x0, x1].
struct ExponentialPrepSpec {
    std::size_t width{1};
    double a{0.0};
    Index x0{0};
    Index x1{0};

    [[nodiscard]] Index span() const { return x1 - x0 + 1; }

    void validate() const {
        if (width < 1 || width > 30) {
            throw ArgumentError("exponential prep: width must be in [1, 30]");
        }
        if (!std::isfinite(a)) {
            throw ArgumentError("exponential prep: rate must be finite");
        }
        if (x0 > x1) {
            throw ArgumentError("exponential prep: empty interval [" + std::to_string(x0) + ", " +
                                std::to_string(x1) + "]");
        }
        if (x1 >= (Index{1} << width)) {
            throw ArgumentError("exponential prep: x1 = " + std::to_string(x1) + " does not fit in " +
                                std::to_string(width) + " qubits");
        }
    }
};

/// Normalized target distribution over all 2^width values.
[[nodiscard]] inline std::vector<double> partial_exponential_probabilities(const ExponentialPrepSpec &spec) {
    spec.validate();
    std::vector<double> p(Index{1} << spec.width, 0.0);
    double total = 0.0;
    for (Index r = spec.x0; r <= spec.x1; ++r) {
        // Shifted by the interval's heaviest end to keep exp() in range.
        const Index ref = spec.a >= 0.0 ? spec.x1 : spec.x0;
        p[r] = std::exp(spec.a * (static_cast<double>(r) - static_cast<double>(ref)));
        total += p[r];
    }
    for (auto &v : p) {
        v /= total;
    }
    return p;
}

enum class PartialStrategy {
    Auto,          ///< power-of-two when possible, else full prep + amplification, else block + amplification
    PowerOfTwo,    ///< span must be 2^q: prep on q LSBs then add x0
    FullAmplify,   ///< full prep on all qubits, one exact amplification round
    BlockAmplify,  ///< power-of-two block covering the interval, one exact amplification round
};

[[nodiscard]] inline std::string to_string(PartialStrategy s) {
    switch (s) {
    case PartialStrategy::Auto:
        return "auto";
    case PartialStrategy::PowerOfTwo:
        return "power-of-two";
    case PartialStrategy::FullAmplify:
        return "full-amplify";
    case PartialStrategy::BlockAmplify:
        return "block-amplify";
    }
    return "?";
}

struct PartialPrepPlan {
    PartialStrategy strategy{PartialStrategy::Auto};
    /// In-interval probability before amplification (1 for power-of-two).
    double success_probability{1.0};
    Circuit ops;
};

namespace detail {

inline bool is_power_of_two(Index v) { return v != 0 && (v & (v - 1)) == 0; }

inline std::size_t ceil_log2(Index v) {
    std::size_t q = 0;
    while ((Index{1} << q) < v) {
        ++q;
    }
    return q;
}

/// sum_{r=lo}^{hi} e^{a r} / sum_{r=0}^{n-1} e^{a r}, without overflow for large |a|.
inline double exp_mass_fraction(double a, Index lo, Index hi, Index n) {
    const double l = static_cast<double>(lo);
    const double h1 = static_cast<double>(hi + 1);
    const double nn = static_cast<double>(n);
    if (a == 0.0) {
        return (h1 - l) / nn;
    }
    if (a > 0.0) {
        return (std::exp(a * (h1 - nn)) - std::exp(a * (l - nn))) / -std::expm1(-a * nn);
    }
    return std::exp(a * l) * std::expm1(a * (h1 - l)) / std::expm1(a * nn);
}

/**
 * One exact amplification round. `prep` maps |0> to a state whose mass on
 * the interval is p >= 1/4; an auxiliary rotation lowers it to exactly 1/4
 * so that a single Grover iteration lands on the interval with certainty.
 * The auxiliary ends in |1> and is flipped back to |0>.
 */
inline Circuit amplify_once(const Circuit &prep, const std::vector<std::size_t> &reg, std::size_t aux,
                            Index x0, Index x1, double p) {
    const double beta = 2.0 * std::asin(std::min(1.0, std::sqrt(0.25 / p)));
    Circuit a_op = prep;
    a_op.push_back(sim::ry(aux, beta));
    std::vector<std::size_t> all = reg;
    all.push_back(aux);
    const Index aux_bit = Index{1} << reg.size();
    const Index reg_mask = aux_bit - 1;

    Circuit ops = a_op;
    ops.push_back(sim::phase(
        all, [=](Index v) { return (v & aux_bit) != 0U && (v & reg_mask) >= x0 && (v & reg_mask) <= x1; },
        std::numbers::pi, "oracle[x0<=r<=x1]"));
    sim::append(ops, sim::invert(a_op));
    ops.push_back(sim::phase(all, [](Index v) { return v == 0; }, std::numbers::pi, "reflect0"));
    sim::append(ops, a_op);
    ops.push_back(sim::x(aux));
    return ops;
}

} // namespace detail

/**
 * Builds the partial exponential preparation circuit on `reg`.
 * Amplifying strategies need `aux`, which starts and ends in |0>.
 */
[[nodiscard]] inline PartialPrepPlan plan_exponential_partial(const std::vector<std::size_t> &reg,
                                                              std::optional<std::size_t> aux,
                                                              const ExponentialPrepSpec &spec,
                                                              PartialStrategy strategy = PartialStrategy::Auto) {
    spec.validate();
    if (reg.size() != spec.width) {
        throw StructuralError("exponential prep: register width does not match spec width");
    }
    const Index n_values = Index{1} << spec.width;
    const Index mod_mask = n_values - 1;
    const Index span = spec.span();
    const bool pow2 = detail::is_power_of_two(span);

    if (strategy == PartialStrategy::PowerOfTwo && !pow2) {
        throw ArgumentError("power-of-two strategy requested for interval of size " + std::to_string(span));
    }
    if (strategy == PartialStrategy::Auto) {
        strategy = pow2 ? PartialStrategy::PowerOfTwo : PartialStrategy::FullAmplify;
    }

    PartialPrepPlan plan;
    if (strategy == PartialStrategy::PowerOfTwo) {
        const std::size_t q = detail::ceil_log2(span);
        if (q > 0) {
            plan.ops = exponential_full_ops(std::vector<std::size_t>(reg.begin(), reg.begin() + q), spec.a);
        }
        if (spec.x0 != 0) {
            const Index x0 = spec.x0;
            plan.ops.push_back(sim::classical(
                reg, [=](Index v) { return (v + x0) & mod_mask; }, [=](Index v) { return (v - x0) & mod_mask; },
                "add_const"));
        }
        plan.strategy = PartialStrategy::PowerOfTwo;
        return plan;
    }

    if (!aux) {
        throw StructuralError("exponential prep: amplification needs an auxiliary qubit");
    }
    if (strategy == PartialStrategy::FullAmplify) {
        const double p = detail::exp_mass_fraction(spec.a, spec.x0, spec.x1, n_values);
        if (p >= 0.25) {
            plan.strategy = PartialStrategy::FullAmplify;
            plan.success_probability = p;
            plan.ops = detail::amplify_once(exponential_full_ops(reg, spec.a), reg, *aux, spec.x0, spec.x1, p);
            return plan;
        }
        // Not reachable in one round from the full preparation.
    }

    // Power-of-two block with a decaying profile, mapped onto the interval so
    // that the heaviest block values land inside it; mass fraction > 1/2.
    const std::size_t q = detail::ceil_log2(span);
    const double rate = -std::abs(spec.a);
    Circuit prep;
    if (q > 0) {
        prep = exponential_full_ops(std::vector<std::size_t>(reg.begin(), reg.begin() + q), rate);
    }
    if (spec.a <= 0.0) {
        const Index x0 = spec.x0;
        prep.push_back(sim::classical(
            reg, [=](Index v) { return (v + x0) & mod_mask; }, [=](Index v) { return (v - x0) & mod_mask; },
            "add_const"));
    } else {
        const Index x1 = spec.x1;
        // v -> x1 - v is its own inverse mod 2^n
        prep.push_back(sim::classical(
            reg, [=](Index v) { return (x1 - v) & mod_mask; }, [=](Index v) { return (x1 - v) & mod_mask; },
            "reflect_const"));
    }
    const double p = detail::exp_mass_fraction(rate, 0, span - 1, Index{1} << q);
    plan.strategy = PartialStrategy::BlockAmplify;
    plan.success_probability = p;
    plan.ops = detail::amplify_once(prep, reg, *aux, spec.x0, spec.x1, p);
    return plan;
}

/// Prepares the partial exponential state on `reg`; returns the strategy used.
inline PartialStrategy prepare_exponential_partial(Statevector &state, const QubitRegister &reg,
                                                   std::optional<std::size_t> aux, const ExponentialPrepSpec &spec,
                                                   PartialStrategy strategy = PartialStrategy::Auto) {
    const auto qubits = reg.qubits();
    sim::detail::check_within(state, qubits);
    if (aux) {
        state.check_qubit(*aux);
        if (*aux >= reg.offset && *aux < reg.end()) {
            throw StructuralError("exponential prep: auxiliary qubit lies inside the register");
        }
    }
    if (!sim::register_is_ground(state, qubits)) {
        throw PreconditionError("prepare_exponential_partial: register is not in its ground state");
    }
    auto plan = plan_exponential_partial(qubits, aux, spec, strategy);
    sim::apply(state, plan.ops);
    return plan.strategy;
}

// ---------------------------------------------------------------------------
// Integration comparator.

/**
 * Comparator flipping `target` on basis states with r <= x (unsigned,
 * inclusive), optionally gated on extra control qubits.
 */
[[nodiscard]] inline sim::PrimitiveOp integrate_compare_op(const std::vector<std::size_t> &r,
                                                           const std::vector<std::size_t> &x, std::size_t target,
                                                           const std::vector<sim::QubitValue> &controls = {}) {
    if (r.size() != x.size()) {
        throw StructuralError("integrate_compare: r and x registers must have the same width");
    }
    const std::size_t w = r.size();
    std::vector<std::size_t> qubits = r;
    qubits.insert(qubits.end(), x.begin(), x.end());
    Index ctrl_want = 0;
    for (std::size_t c = 0; c < controls.size(); ++c) {
        qubits.push_back(controls[c].qubit);
        if (controls[c].value) {
            ctrl_want |= Index{1} << c;
        }
    }
    qubits.push_back(target);
    const Index field = (Index{1} << w) - 1;
    const std::size_t ctrl_shift = 2 * w;
    const Index ctrl_mask = ((Index{1} << controls.size()) - 1) << ctrl_shift;
    const Index target_bit = Index{1} << (2 * w + controls.size());
    auto flip = [=](Index v) {
        const Index rv = v & field;
        const Index xv = (v >> w) & field;
        const bool enabled = ((v & ctrl_mask) >> ctrl_shift) == ctrl_want;
        return (enabled && rv <= xv) ? (v ^ target_bit) : v;
    };
    return sim::classical(std::move(qubits), flip, flip, "compare[r<=x]");
}

inline void integrate_compare(Statevector &state, const QubitRegister &r_reg, const QubitRegister &x_reg,
                              std::size_t target) {
    if (r_reg.width != x_reg.width) {
        throw StructuralError("integrate_compare: r and x registers must have the same width");
    }
    if (sim::probability(state, sim::Condition{{target, true}}) > 1e-12) {
        throw PreconditionError("integrate_compare: target qubit is not in |0>");
    }
    sim::apply(state, integrate_compare_op(r_reg.qubits(), x_reg.qubits(), target));
}

/// Closed-form target amplitude after integrating a full exponential over r <= x.
[[nodiscard]] inline double integration_amplitude_full(double a, std::size_t n, Index x) {
    const double count = std::ldexp(1.0, static_cast<int>(n));
    const double upto = static_cast<double>(x + 1);
    if (a == 0.0) {
        return std::sqrt(upto / count);
    }
    return std::sqrt(std::expm1(a * upto) / std::expm1(a * count));
}

/// Piecewise closed form after integrating a partial exponential on [x0, x1].
[[nodiscard]] inline double integration_amplitude_partial(double a, Index x0, Index x1, Index x) {
    if (x < x0) {
        return 0.0;
    }
    if (x > x1) {
        return 1.0;
    }
    const double num = static_cast<double>(x + 1 - x0);
    const double den = static_cast<double>(x1 + 1 - x0);
    if (a == 0.0) {
        return std::sqrt(num / den);
    }
    return std::sqrt(std::expm1(a * num) / std::expm1(a * den));
}

} // namespace qacall::loading
