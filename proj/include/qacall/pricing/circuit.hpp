#pragma once

/**
 * @file
 * Pricing circuit for a single-asset autocallable.
 *
 * Register layout (LSB-first, in this order): one k-qubit Gaussian register
 * per timestep, the m-qubit log-return accumulator, the m-qubit reference
 * register of the put leg (absent when the put cannot trigger), the barrier
 * flags c_1..c_T, the binary flags b_1..b_j, the payoff target and the scale
 * indicator. The good state is target = 1 and scale = 1.
 *
 * The reference register compares against the accumulator through its
 * order-preserving offset view (code - min_code), so the exponential rate
 * 2^-p makes e^{a x} proportional to the return e^l.
 */

#include <array>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "qacall/errors.hpp"
#include "qacall/loading/exponential.hpp"
#include "qacall/loading/gaussian.hpp"
#include "qacall/pricing/model.hpp"
#include "qacall/sim/ops.hpp"
#include "qacall/sim/statevector.hpp"

namespace qacall::pricing {

using sim::Circuit;
using sim::Condition;
using sim::QubitRegister;
using sim::QubitValue;

struct RegisterLayout {
    std::vector<QubitRegister> gaussian;
    QubitRegister accumulator;
    QubitRegister reference; ///< width 0 when the put leg is omitted
    QubitRegister barrier;
    QubitRegister binary;
    std::size_t target{0};
    std::size_t scale{0};
    std::size_t total{0};

    [[nodiscard]] bool has_put() const { return reference.width > 0; }

    [[nodiscard]] std::string breakdown() const {
        const std::size_t k = gaussian.empty() ? 0 : gaussian.front().width;
        return "gaussian " + std::to_string(gaussian.size()) + "x" + std::to_string(k) + ", accumulator " +
               std::to_string(accumulator.width) + ", reference " + std::to_string(reference.width) +
               ", barrier " + std::to_string(barrier.width) + ", binary " + std::to_string(binary.width) +
               ", target 1, scale 1 = " + std::to_string(total);
    }
};

[[nodiscard]] inline RegisterLayout plan_layout(const QuantizedModel &m) {
    RegisterLayout l;
    std::size_t next = 0;
    auto take = [&next](std::size_t width) {
        QubitRegister r{next, width};
        next += width;
        return r;
    };
    for (std::size_t t = 0; t < m.contract.steps; ++t) {
        l.gaussian.push_back(take(m.grid.k));
    }
    l.accumulator = take(m.fmt.width());
    l.reference = take(m.put_reachable ? m.fmt.width() : 0);
    l.barrier = take(m.contract.steps);
    l.binary = take(m.contract.binaries.size());
    l.target = take(1).offset;
    l.scale = take(1).offset;
    l.total = next;
    return l;
}

namespace detail {

inline std::vector<std::size_t> concat(std::vector<std::size_t> a, const std::vector<std::size_t> &b) {
    a.insert(a.end(), b.begin(), b.end());
    return a;
}

inline std::vector<QubitValue> all_zero(const QubitRegister &reg) {
    std::vector<QubitValue> out;
    for (auto q : reg.qubits()) {
        out.push_back({q, false});
    }
    return out;
}

} // namespace detail

/// Loads the discretized normal onto the Gaussian register of step t (0-based).
[[nodiscard]] inline sim::PrimitiveOp load_gaussian_op(const RegisterLayout &l, const QuantizedModel &m, std::size_t t) {
    const auto amps = loading::gaussian_amplitudes(m.grid);
    return sim::inject(l.gaussian.at(t).qubits(), amps);
}

/// accumulator += increment(g_t) modulo 2^m.
[[nodiscard]] inline sim::PrimitiveOp accumulate_op(const RegisterLayout &l, const QuantizedModel &m, std::size_t t) {
    const std::size_t k = m.grid.k;
    const Index gmask = (Index{1} << k) - 1;
    std::vector<Index> inc;
    for (Code c : m.increments) {
        inc.push_back(m.fmt.encode(c));
    }
    const Index amask = (Index{1} << m.fmt.width()) - 1;
    auto shift = [=](Index v, bool add) {
        const Index g = v & gmask;
        const Index a = v >> k;
        const Index moved = (add ? a + inc[g] : a - inc[g]) & amask;
        return g | (moved << k);
    };
    return sim::classical(
        detail::concat(l.gaussian.at(t).qubits(), l.accumulator.qubits()), [=](Index v) { return shift(v, true); },
        [=](Index v) { return shift(v, false); }, "accumulate[" + std::to_string(t + 1) + "]");
}

/// c_t ^= (l_t < code(ln b)).
[[nodiscard]] inline sim::PrimitiveOp flag_barrier_op(const RegisterLayout &l, const QuantizedModel &m, std::size_t t) {
    const std::size_t w = m.fmt.width();
    const auto fmt = m.fmt;
    const Code threshold = m.barrier_code;
    auto f = [=](Index v) {
        const Code acc = fmt.decode(v & ((Index{1} << w) - 1));
        return acc < threshold ? v ^ (Index{1} << w) : v;
    };
    return sim::classical(detail::concat(l.accumulator.qubits(), {l.barrier.qubit(t)}), f, f,
                          "barrier[" + std::to_string(t + 1) + "]");
}

/// b_i ^= (l_{s_i} > code(ln k_i)) and no earlier b_h set.
[[nodiscard]] inline sim::PrimitiveOp flag_binary_op(const RegisterLayout &l, const QuantizedModel &m, std::size_t i) {
    const std::size_t w = m.fmt.width();
    const auto fmt = m.fmt;
    const Code threshold = m.binary_codes.at(i);
    const Index earlier = ((Index{1} << i) - 1) << w;
    const Index own = Index{1} << (w + i);
    auto f = [=](Index v) {
        const Code acc = fmt.decode(v & ((Index{1} << w) - 1));
        return (acc > threshold && (v & earlier) == 0) ? v ^ own : v;
    };
    auto flags = l.binary.qubits();
    flags.resize(i + 1);
    return sim::classical(detail::concat(l.accumulator.qubits(), flags), f, f, "binary[" + std::to_string(i + 1) + "]");
}

/// Under b_i: target amplitude sqrt(f~_i) and scale set to 1.
[[nodiscard]] inline Circuit load_constant_payoff_ops(const RegisterLayout &l, const AmplitudeMapping &map,
                                                      std::size_t i) {
    const double f = map.binary_amplitude2.at(i);
    if (f < 0.0 || f > 1.0) {
        throw NumericalError("constant payoff amplitude outside [0, 1]");
    }
    const std::size_t flag = l.binary.qubit(i);
    return {sim::cry({{flag, true}}, l.target, 2.0 * std::asin(std::sqrt(f))), sim::mcx({{flag, true}}, l.scale)};
}

/// Scale indicator rotation shared by the put and zero branches: amplitude sqrt(f~_z) when B = 0.
[[nodiscard]] inline sim::PrimitiveOp load_scale_op(const RegisterLayout &l, const AmplitudeMapping &map) {
    return sim::cry(detail::all_zero(l.binary), l.scale, 2.0 * std::asin(std::sqrt(map.zero_amplitude2)));
}

namespace detail {

// Packed layout of the put/zero predicates: [B | C | accumulator | reference | target].
struct BranchView {
    std::size_t j, steps, w;
    FixedPointFormat fmt;
    Code strike;

    [[nodiscard]] bool put_active(Index v) const {
        const Index b = v & ((Index{1} << j) - 1);
        const Index c = (v >> j) & ((Index{1} << steps) - 1);
        const Code acc = fmt.decode((v >> (j + steps)) & ((Index{1} << w) - 1));
        return b == 0 && c != 0 && acc < strike;
    }
    [[nodiscard]] bool binary_clear(Index v) const { return (v & ((Index{1} << j) - 1)) == 0; }
    [[nodiscard]] Index offset_acc(Index v) const {
        return fmt.offset(fmt.decode((v >> (j + steps)) & ((Index{1} << w) - 1)));
    }
};

} // namespace detail

/**
 * Put leg: when no binary fired, the barrier was crossed and l_T < ln K,
 * flips the target iff reference <= offset(l_T). With the reference register
 * in the partial exponential state this writes the integrated amplitude.
 */
[[nodiscard]] inline sim::PrimitiveOp load_put_payoff_op(const RegisterLayout &l, const QuantizedModel &m) {
    if (!l.has_put()) {
        throw StructuralError("load_put_payoff: layout has no reference register");
    }
    const detail::BranchView view{l.binary.width, l.barrier.width, m.fmt.width(), m.fmt, m.strike_code};
    const std::size_t base = view.j + view.steps + view.w;
    const Index ref_mask = (Index{1} << view.w) - 1;
    const Index target_bit = Index{1} << (base + view.w);
    auto f = [=](Index v) {
        const Index ref = (v >> base) & ref_mask;
        return (view.put_active(v) && ref <= view.offset_acc(v)) ? v ^ target_bit : v;
    };
    auto qubits = detail::concat(detail::concat(detail::concat(l.binary.qubits(), l.barrier.qubits()),
                                                l.accumulator.qubits()),
                                 l.reference.qubits());
    qubits.push_back(l.target);
    return sim::classical(std::move(qubits), f, f, "put");
}

/// Zero leg: target set when no binary fired and the put is inactive.
[[nodiscard]] inline sim::PrimitiveOp load_zero_payoff_op(const RegisterLayout &l, const QuantizedModel &m) {
    const detail::BranchView view{l.binary.width, l.barrier.width, m.fmt.width(), m.fmt, m.strike_code};
    const Index target_bit = Index{1} << (view.j + view.steps + view.w);
    auto f = [=](Index v) { return (view.binary_clear(v) && !view.put_active(v)) ? v ^ target_bit : v; };
    auto qubits = detail::concat(detail::concat(l.binary.qubits(), l.barrier.qubits()), l.accumulator.qubits());
    qubits.push_back(l.target);
    return sim::classical(std::move(qubits), f, f, "zero");
}

struct BuildOptions {
    std::size_t qubit_budget{sim::kDefaultQubitBudget};
    loading::PartialStrategy prep_strategy{loading::PartialStrategy::Auto};
};

struct PricingCircuit {
    QuantizedModel model;
    AmplitudeMapping mapping;
    RegisterLayout layout;
    Circuit circuit;
    Condition good;
    loading::PartialStrategy prep_strategy{loading::PartialStrategy::Auto};
};

[[nodiscard]] inline PricingCircuit build_pricing_circuit(const QuantizedModel &m, const BuildOptions &opts = {}) {
    PricingCircuit pc;
    pc.model = m;
    pc.mapping = derive_mapping(m);
    pc.layout = plan_layout(m);
    const auto &l = pc.layout;
    const std::size_t budget = std::min(opts.qubit_budget, sim::kHardQubitCap);
    if (l.total > budget) {
        throw CapacityError("pricing circuit needs " + std::to_string(l.total) + " qubits (" + l.breakdown() +
                            ") but the budget is " + std::to_string(budget) + "; reduce k or p");
    }
    auto &c = pc.circuit;
    for (std::size_t t = 0; t < m.contract.steps; ++t) {
        c.push_back(load_gaussian_op(l, m, t));
    }
    if (l.has_put()) {
        const loading::ExponentialPrepSpec spec{m.fmt.width(), m.rate(), m.put_x0(), m.put_x1()};
        auto plan = loading::plan_exponential_partial(l.reference.qubits(), l.target, spec, opts.prep_strategy);
        pc.prep_strategy = plan.strategy;
        sim::append(c, plan.ops);
    }
    for (std::size_t t = 0; t < m.contract.steps; ++t) {
        c.push_back(accumulate_op(l, m, t));
        c.push_back(flag_barrier_op(l, m, t));
        for (std::size_t i = 0; i < m.contract.binaries.size(); ++i) {
            if (m.contract.binaries[i].step == t + 1) {
                c.push_back(flag_binary_op(l, m, i));
                sim::append(c, load_constant_payoff_ops(l, pc.mapping, i));
            }
        }
    }
    if (l.has_put()) {
        c.push_back(load_scale_op(l, pc.mapping));
        c.push_back(load_put_payoff_op(l, m));
        c.push_back(load_zero_payoff_op(l, m));
    }
    pc.good = Condition{{l.target, true}, {l.scale, true}};
    return pc;
}

[[nodiscard]] inline PricingCircuit build_pricing_circuit(const AutocallableContract &contract,
                                                          const GaussianGridSpec &grid, const FixedPointFormat &fmt,
                                                          const BuildOptions &opts = {}) {
    return build_pricing_circuit(quantize_model(contract, grid, fmt), opts);
}

/// Probability mass of the binary, put-active and zero branch families.
[[nodiscard]] inline std::array<double, 3> branch_probabilities(const sim::Statevector &state,
                                                                const PricingCircuit &pc) {
    const auto &l = pc.layout;
    const auto &m = pc.model;
    const Index bmask = ((Index{1} << l.binary.width) - 1) << l.binary.offset;
    const Index cmask = ((Index{1} << l.barrier.width) - 1) << l.barrier.offset;
    const Index amask = (Index{1} << l.accumulator.width) - 1;
    std::array<double, 3> out{};
    const auto amps = state.amplitudes();
    for (Index i = 0; i < amps.size(); ++i) {
        const double p = std::norm(amps[i]);
        if (p == 0.0) {
            continue;
        }
        if ((i & bmask) != 0) {
            out[0] += p;
            continue;
        }
        const Code acc = m.fmt.decode((i >> l.accumulator.offset) & amask);
        out[((i & cmask) != 0 && m.below_strike(acc)) ? 1 : 2] += p;
    }
    return out;
}

} // namespace qacall::pricing
