#pragma once

#include <cstddef>
#include <numbers>
#include <numeric>
#include <vector>

#include "qacall/sim/ops.hpp"
#include "qacall/sim/statevector.hpp"

namespace qacall::estimation {

using sim::Circuit;
using sim::Condition;

/// Phase flip on |0...0> over the first `num_qubits` qubits.
[[nodiscard]] inline sim::PrimitiveOp zero_reflection(std::size_t num_qubits) {
    std::vector<std::size_t> all(num_qubits);
    std::iota(all.begin(), all.end(), std::size_t{0});
    return sim::phase(std::move(all), [](sim::Index v) { return v == 0; }, std::numbers::pi, "S0");
}

/**
 * Q = A S_0 A^-1 S_good in application order [S_good, A^-1, S_0, A].
 * One application maps sin((2j+1)theta) to sin((2j+3)theta) for the good
 * amplitude, where sin^2(theta) = P(good).
 */
[[nodiscard]] inline Circuit build_grover(const Circuit &a, const Condition &good, std::size_t num_qubits) {
    Circuit q;
    q.push_back(sim::phase_flip(good));
    sim::append(q, sim::invert(a));
    q.push_back(zero_reflection(num_qubits));
    sim::append(q, a);
    return q;
}

/// P(good) after A|0...0>, computed exactly.
[[nodiscard]] inline double exact_amplitude(const Circuit &a, const Condition &good, std::size_t num_qubits) {
    auto state = sim::allocate(num_qubits);
    sim::apply(state, a);
    return sim::probability(state, good);
}

} // namespace qacall::estimation
