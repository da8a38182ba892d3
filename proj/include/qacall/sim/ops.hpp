#pragma once

/**
 * @file
 * Invertible primitive operations and their application to a Statevector.
 *
 * Reversible arithmetic (adders, comparators) is simulated as a basis
 * permutation on the qubits it touches; its gate-level cost lives in the
 * resource model, not here.
 */

#include <cmath>
#include <functional>
#include <memory>
#include <numbers>
#include <random>
#include <ranges>
#include <concepts>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "qacall/sim/statevector.hpp"

namespace qacall::sim {

/// Single-qubit Y rotation: RY(t)|0> = cos(t/2)|0> + sin(t/2)|1>.
struct RY {
    std::size_t target{0};
    double angle{0.0};
};

struct X {
    std::size_t target{0};
};

/// Multi-controlled X; each control carries the value it requires.
struct MCX {
    std::vector<QubitValue> controls;
    std::size_t target{0};
};

/// Multi-controlled Y rotation.
struct CRY {
    std::vector<QubitValue> controls;
    std::size_t target{0};
    double angle{0.0};
};

/// Reversible classical map applied to the packed value of `qubits`.
struct Classical {
    std::vector<std::size_t> qubits;
    std::function<Index(Index)> forward;
    std::function<Index(Index)> inverse;
    std::string label;
    std::shared_ptr<const BitGather> bits;
};

/**
 * Uniformly-controlled RY tree loading real non-negative amplitudes into
 * `qubits`. Level l rotates qubit (w-1-l) with one angle per value of the
 * l higher qubits.
 */
struct Inject {
    std::vector<std::size_t> qubits;
    std::vector<std::vector<double>> level_angles;
    bool inverse{false};
    std::shared_ptr<const std::vector<BitGather>> prefixes;
};

/// Diagonal phase e^{i*angle} on basis states whose packed value satisfies `predicate`.
struct Phase {
    std::vector<std::size_t> qubits;
    std::function<bool(Index)> predicate;
    double angle{std::numbers::pi};
    std::string label;
    std::shared_ptr<const BitGather> bits;
};

using PrimitiveOp = std::variant<RY, X, MCX, CRY, Classical, Inject, Phase>;
using Circuit = std::vector<PrimitiveOp>;

namespace detail {

inline void check_disjoint(std::span<const QubitValue> controls, std::size_t target) {
    Index seen = Index{1} << target;
    for (const auto &c : controls) {
        const Index bit = Index{1} << c.qubit;
        if ((seen & bit) != 0U) {
            throw StructuralError("control qubit " + std::to_string(c.qubit) +
                                  " overlaps the target or another control");
        }
        seen |= bit;
    }
}

inline Condition controls_condition(std::span<const QubitValue> controls) {
    return Condition(std::vector<QubitValue>(controls.begin(), controls.end()));
}

inline void rotate_pairs(Statevector &state, std::size_t target, double angle, const Condition &ctrl) {
    const double c = std::cos(angle / 2.0);
    const double s = std::sin(angle / 2.0);
    const Index bit = Index{1} << target;
    auto amps = state.amplitudes();
    for (Index i = 0; i < amps.size(); ++i) {
        if ((i & bit) != 0U || !ctrl.holds(i)) {
            continue;
        }
        const Complex a0 = amps[i];
        const Complex a1 = amps[i | bit];
        amps[i] = c * a0 - s * a1;
        amps[i | bit] = s * a0 + c * a1;
    }
}

inline void flip_pairs(Statevector &state, std::size_t target, const Condition &ctrl) {
    const Index bit = Index{1} << target;
    auto amps = state.amplitudes();
    for (Index i = 0; i < amps.size(); ++i) {
        if ((i & bit) == 0U && ctrl.holds(i)) {
            std::swap(amps[i], amps[i | bit]);
        }
    }
}

inline void check_within(const Statevector &state, std::span<const std::size_t> qubits) {
    for (auto q : qubits) {
        state.check_qubit(q);
    }
}

inline void check_within(const Statevector &state, std::span<const QubitValue> controls, std::size_t target) {
    state.check_qubit(target);
    for (const auto &c : controls) {
        state.check_qubit(c.qubit);
    }
}

} // namespace detail

// ---------------------------------------------------------------------------
// Factories. These validate structure once so that apply() stays cheap.

[[nodiscard]] inline PrimitiveOp ry(std::size_t target, double angle) { return RY{target, angle}; }
[[nodiscard]] inline PrimitiveOp x(std::size_t target) { return X{target}; }

[[nodiscard]] inline PrimitiveOp mcx(std::vector<QubitValue> controls, std::size_t target) {
    detail::check_disjoint(controls, target);
    return MCX{std::move(controls), target};
}

[[nodiscard]] inline PrimitiveOp cry(std::vector<QubitValue> controls, std::size_t target, double angle) {
    detail::check_disjoint(controls, target);
    return CRY{std::move(controls), target, angle};
}

/**
 * Reversible map on the packed value of `qubits` (LSB-first in list order).
 * Bijectivity is checked exhaustively up to 20 bits and by 4096 random
 * spot checks above.
 */
[[nodiscard]] inline PrimitiveOp classical(std::vector<std::size_t> qubits, std::function<Index(Index)> forward,
                                           std::function<Index(Index)> inverse, std::string label = "classical") {
    auto bits = std::make_shared<const BitGather>(qubits);
    const std::size_t width = qubits.size();
    if (width > 40) {
        throw StructuralError("classical op '" + label + "' is wider than 40 qubits");
    }
    const Index size = Index{1} << width;
    auto fail = [&](Index v) {
        throw StructuralError("classical op '" + label + "' is not a bijection (fails at " + std::to_string(v) +
                              ")");
    };
    auto check_value = [&](Index v) {
        const Index y = forward(v);
        if (y >= size || inverse(y) != v) {
            fail(v);
        }
        return y;
    };
    if (width <= 20) {
        std::vector<bool> hit(size, false);
        for (Index v = 0; v < size; ++v) {
            const Index y = check_value(v);
            if (hit[y]) {
                fail(v);
            }
            hit[y] = true;
        }
    } else {
        std::mt19937_64 rng(0x5eedULL + width);
        std::uniform_int_distribution<Index> pick(0, size - 1);
        for (int n = 0; n < 4096; ++n) {
            const Index v = pick(rng);
            check_value(v);
            const Index y = inverse(v);
            if (y >= size || forward(y) != v) {
                fail(v);
            }
        }
    }
    return Classical{std::move(qubits), std::move(forward), std::move(inverse), std::move(label), std::move(bits)};
}

/// Classical map given only in the forward direction; the inverse is tabulated (width <= 24).
[[nodiscard]] inline PrimitiveOp classical(std::vector<std::size_t> qubits, const std::function<Index(Index)> &forward,
                                           std::string label = "classical") {
    const std::size_t width = qubits.size();
    if (width > 24) {
        throw StructuralError("classical op '" + label + "' needs an explicit inverse above 24 qubits");
    }
    const Index size = Index{1} << width;
    auto table = std::make_shared<std::vector<Index>>(size, size);
    for (Index v = 0; v < size; ++v) {
        const Index y = forward(v);
        if (y >= size || (*table)[y] != size) {
            throw StructuralError("classical op '" + label + "' is not a bijection (fails at " +
                                  std::to_string(v) + ")");
        }
        (*table)[y] = v;
    }
    std::shared_ptr<const std::vector<Index>> inv = table;
    return classical(std::move(qubits), forward, [inv](Index y) { return (*inv)[y]; }, std::move(label));
}

/// Diagonal phase oracle over the packed value of `qubits`.
[[nodiscard]] inline PrimitiveOp phase(std::vector<std::size_t> qubits, std::function<bool(Index)> predicate,
                                       double angle = std::numbers::pi, std::string label = "phase") {
    auto bits = std::make_shared<const BitGather>(qubits);
    return Phase{std::move(qubits), std::move(predicate), angle, std::move(label), std::move(bits)};
}

/// Phase flip on the basis states satisfying `cond`.
[[nodiscard]] inline PrimitiveOp phase_flip(const Condition &cond) {
    std::vector<std::size_t> qubits;
    Index want = 0;
    for (std::size_t b = 0; b < cond.terms().size(); ++b) {
        qubits.push_back(cond.terms()[b].qubit);
        if (cond.terms()[b].value) {
            want |= Index{1} << b;
        }
    }
    return phase(std::move(qubits), [want](Index v) { return v == want; }, std::numbers::pi, "phase_flip");
}

/**
 * Rotation tree loading `amps` (real, non-negative, unit norm within 1e-12)
 * into `qubits` from |0...0>. Circuit form of inject_amplitudes.
 */
[[nodiscard]] inline PrimitiveOp inject(std::vector<std::size_t> qubits, std::span<const double> amps) {
    const std::size_t width = qubits.size();
    if (width == 0 || amps.size() != (Index{1} << width)) {
        throw StructuralError("amplitude vector length must be 2^width");
    }
    double norm = 0.0;
    for (double a : amps) {
        if (!(a >= 0.0) || !std::isfinite(a)) {
            throw ArgumentError("inject amplitudes must be finite and non-negative");
        }
        norm += a * a;
    }
    if (std::abs(norm - 1.0) > 1e-12) {
        throw ArgumentError("inject amplitudes are not normalized (norm^2 = " + std::to_string(norm) + ")");
    }
    // Probability mass of every prefix, finest level first.
    std::vector<std::vector<double>> mass(width + 1);
    mass[width].resize(amps.size());
    for (Index v = 0; v < amps.size(); ++v) {
        mass[width][v] = amps[v] * amps[v];
    }
    for (std::size_t l = width; l-- > 0;) {
        mass[l].resize(Index{1} << l);
        for (Index p = 0; p < mass[l].size(); ++p) {
            mass[l][p] = mass[l + 1][2 * p] + mass[l + 1][2 * p + 1];
        }
    }
    std::vector<std::vector<double>> angles(width);
    auto prefixes = std::make_shared<std::vector<BitGather>>();
    for (std::size_t l = 0; l < width; ++l) {
        angles[l].resize(Index{1} << l);
        for (Index p = 0; p < angles[l].size(); ++p) {
            const double p0 = mass[l + 1][2 * p];
            const double p1 = mass[l + 1][2 * p + 1];
            angles[l][p] = (p0 + p1 > 0.0) ? 2.0 * std::atan2(std::sqrt(p1), std::sqrt(p0)) : 0.0;
        }
        std::vector<std::size_t> higher(qubits.end() - static_cast<std::ptrdiff_t>(l), qubits.end());
        prefixes->emplace_back(higher);
    }
    BitGather check(qubits);
    return Inject{std::move(qubits), std::move(angles), false, std::move(prefixes)};
}

// ---------------------------------------------------------------------------
// Application.

namespace detail {

inline void apply_classical(Statevector &state, const Classical &op, bool use_inverse) {
    check_within(state, op.qubits);
    const auto &fn = use_inverse ? op.inverse : op.forward;
    const Index mask = op.bits->mask();
    auto &out = state.scratch();
    const auto amps = state.amplitudes();
    for (Index i = 0; i < amps.size(); ++i) {
        const Index v = op.bits->gather(i);
        out[(i & ~mask) | op.bits->scatter(fn(v))] = amps[i];
    }
    state.swap_scratch();
}

inline void apply_inject(Statevector &state, const Inject &op, bool invert) {
    check_within(state, op.qubits);
    const std::size_t width = op.qubits.size();
    auto amps = state.amplitudes();
    auto level = [&](std::size_t l, double sign) {
        const std::size_t target = op.qubits[width - 1 - l];
        const Index bit = Index{1} << target;
        const auto &prefix = (*op.prefixes)[l];
        const auto &angles = op.level_angles[l];
        for (Index i = 0; i < amps.size(); ++i) {
            if ((i & bit) != 0U) {
                continue;
            }
            const double theta = sign * angles[prefix.gather(i)];
            const double c = std::cos(theta / 2.0);
            const double s = std::sin(theta / 2.0);
            const Complex a0 = amps[i];
            const Complex a1 = amps[i | bit];
            amps[i] = c * a0 - s * a1;
            amps[i | bit] = s * a0 + c * a1;
        }
    };
    if (!invert) {
        for (std::size_t l = 0; l < width; ++l) {
            level(l, 1.0);
        }
    } else {
        for (std::size_t l = width; l-- > 0;) {
            level(l, -1.0);
        }
    }
}

inline void apply_phase(Statevector &state, const Phase &op) {
    check_within(state, op.qubits);
    const bool is_flip = std::abs(op.angle - std::numbers::pi) < 1e-15 || std::abs(op.angle + std::numbers::pi) < 1e-15;
    const Complex factor = is_flip ? Complex{-1.0, 0.0} : std::polar(1.0, op.angle);
    auto amps = state.amplitudes();
    for (Index i = 0; i < amps.size(); ++i) {
        if (op.predicate(op.bits->gather(i))) {
            amps[i] *= factor;
        }
    }
}

} // namespace detail

/// Applies one primitive op in place.
inline void apply_op(Statevector &state, const PrimitiveOp &op) {
    std::visit(
        [&state](const auto &g) {
            using T = std::decay_t<decltype(g)>;
            if constexpr (std::is_same_v<T, RY>) {
                state.check_qubit(g.target);
                detail::rotate_pairs(state, g.target, g.angle, Condition{});
            } else if constexpr (std::is_same_v<T, X>) {
                state.check_qubit(g.target);
                detail::flip_pairs(state, g.target, Condition{});
            } else if constexpr (std::is_same_v<T, MCX>) {
                detail::check_within(state, g.controls, g.target);
                detail::check_disjoint(g.controls, g.target);
                detail::flip_pairs(state, g.target, detail::controls_condition(g.controls));
            } else if constexpr (std::is_same_v<T, CRY>) {
                detail::check_within(state, g.controls, g.target);
                detail::check_disjoint(g.controls, g.target);
                detail::rotate_pairs(state, g.target, g.angle, detail::controls_condition(g.controls));
            } else if constexpr (std::is_same_v<T, Classical>) {
                detail::apply_classical(state, g, false);
            } else if constexpr (std::is_same_v<T, Inject>) {
                detail::apply_inject(state, g, g.inverse);
            } else if constexpr (std::is_same_v<T, Phase>) {
                detail::apply_phase(state, g);
            }
        },
        op);
}

// Templates so that unqualified calls beat std::apply, which ADL finds
// through std::variant.
template <class Op>
    requires std::constructible_from<PrimitiveOp, Op>
void apply(Statevector &state, Op &&op) {
    if constexpr (std::is_same_v<std::remove_cvref_t<Op>, PrimitiveOp>) {
        apply_op(state, op);
    } else {
        apply_op(state, PrimitiveOp(std::forward<Op>(op)));
    }
}

template <std::ranges::input_range R>
    requires std::same_as<std::ranges::range_value_t<R>, PrimitiveOp>
void apply(Statevector &state, R &&circuit) {
    for (const auto &op : circuit) {
        apply_op(state, op);
    }
}

[[nodiscard]] inline PrimitiveOp inverse(const PrimitiveOp &op) {
    return std::visit(
        [](const auto &g) -> PrimitiveOp {
            using T = std::decay_t<decltype(g)>;
            if constexpr (std::is_same_v<T, RY>) {
                return RY{g.target, -g.angle};
            } else if constexpr (std::is_same_v<T, CRY>) {
                return CRY{g.controls, g.target, -g.angle};
            } else if constexpr (std::is_same_v<T, Classical>) {
                return Classical{g.qubits, g.inverse, g.forward, g.label + "^-1", g.bits};
            } else if constexpr (std::is_same_v<T, Inject>) {
                auto inv = g;
                inv.inverse = !g.inverse;
                return inv;
            } else if constexpr (std::is_same_v<T, Phase>) {
                auto inv = g;
                inv.angle = -g.angle;
                return inv;
            } else {
                return g;
            }
        },
        op);
}

/// Reverses the circuit and inverts every op.
[[nodiscard]] inline Circuit invert(std::span<const PrimitiveOp> circuit) {
    Circuit out;
    out.reserve(circuit.size());
    for (auto it = circuit.rbegin(); it != circuit.rend(); ++it) {
        out.push_back(inverse(*it));
    }
    return out;
}

inline void append(Circuit &dst, std::span<const PrimitiveOp> src) { dst.insert(dst.end(), src.begin(), src.end()); }

// ---------------------------------------------------------------------------
// State-level helpers with precondition checks.

/// True when every populated basis state has `reg` equal to zero.
[[nodiscard]] inline bool register_is_ground(const Statevector &state, std::span<const std::size_t> qubits,
                                             double tol = 1e-12) {
    BitGather bits(qubits);
    return probability_if(state, [&](Index i) { return (i & bits.mask()) != 0U; }) <= tol;
}

/**
 * Loads `amps` into `reg` tensored with the rest of the state.
 * Throws PreconditionError unless `reg` is in |0...0> on every populated branch.
 */
inline void inject_amplitudes(Statevector &state, const QubitRegister &reg, std::span<const double> amps) {
    if (reg.end() > state.num_qubits()) {
        throw StructuralError("register exceeds the state width");
    }
    const auto qubits = reg.qubits();
    if (!register_is_ground(state, qubits)) {
        throw PreconditionError("inject_amplitudes: register is not in its ground state");
    }
    apply(state, inject(qubits, amps));
}

/// Reversible classical map on a contiguous register; f must be a bijection on [0, 2^width).
inline void apply_classical(Statevector &state, const QubitRegister &reg, const std::function<Index(Index)> &f) {
    if (reg.end() > state.num_qubits()) {
        throw StructuralError("register exceeds the state width");
    }
    apply(state, classical(reg.qubits(), f));
}

} // namespace qacall::sim
