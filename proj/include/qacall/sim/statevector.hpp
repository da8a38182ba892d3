#pragma once

/**
 * @file
 * Dense statevector over a fixed number of qubits.
 *
 * Qubit q corresponds to bit q of the basis index (LSB-first). A register of
 * width w starting at offset o reads its value from bits [o, o+w) with bit o
 * as the least significant bit. This convention is used by every module.
 */

#include <algorithm>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "qacall/errors.hpp"

namespace qacall::sim {

using Complex = std::complex<double>;
using Index = std::uint64_t;

/// Hard upper bound on simulated width; 2^30 complex doubles are 16 GiB.
inline constexpr std::size_t kHardQubitCap = 30;
/// Width most hosts can hold together with one scratch buffer.
inline constexpr std::size_t kDefaultQubitBudget = 28;

/// Contiguous, LSB-first group of qubits.
struct QubitRegister {
    std::size_t offset{0};
    std::size_t width{0};

    [[nodiscard]] std::size_t end() const { return offset + width; }
    [[nodiscard]] std::size_t qubit(std::size_t bit) const { return offset + bit; }

    [[nodiscard]] std::vector<std::size_t> qubits() const {
        std::vector<std::size_t> out(width);
        std::iota(out.begin(), out.end(), offset);
        return out;
    }
};

/// Required value of a single qubit.
struct QubitValue {
    std::size_t qubit{0};
    bool value{true};
};

/// Conjunction of single-qubit requirements. The empty condition is always true.
class Condition {
  public:
    Condition() = default;
    Condition(std::initializer_list<QubitValue> terms) : Condition(std::vector<QubitValue>(terms)) {}
    explicit Condition(std::vector<QubitValue> terms) : terms_(std::move(terms)) {
        for (const auto &t : terms_) {
            const Index bit = Index{1} << t.qubit;
            if ((mask_ & bit) != 0U) {
                throw StructuralError("condition names qubit " + std::to_string(t.qubit) + " twice");
            }
            mask_ |= bit;
            if (t.value) {
                pattern_ |= bit;
            }
        }
    }

    [[nodiscard]] bool holds(Index basis) const { return (basis & mask_) == pattern_; }
    [[nodiscard]] std::span<const QubitValue> terms() const { return terms_; }
    [[nodiscard]] Index mask() const { return mask_; }
    [[nodiscard]] Index pattern() const { return pattern_; }
    [[nodiscard]] bool empty() const { return terms_.empty(); }

  private:
    std::vector<QubitValue> terms_;
    Index mask_{0};
    Index pattern_{0};
};

/**
 * Gathers an arbitrary list of qubits out of a basis index into a packed
 * value (and scatters it back) using per-byte lookup tables.
 */
class BitGather {
  public:
    BitGather() = default;
    explicit BitGather(std::span<const std::size_t> qubits) : width_(qubits.size()) {
        for (std::size_t b = 0; b < qubits.size(); ++b) {
            const std::size_t q = qubits[b];
            if (q >= 64) {
                throw StructuralError("qubit index " + std::to_string(q) + " out of range");
            }
            const Index bit = Index{1} << q;
            if ((mask_ & bit) != 0U) {
                throw StructuralError("qubit " + std::to_string(q) + " listed twice in one register");
            }
            mask_ |= bit;
        }
        std::size_t top = 0;
        for (auto q : qubits) {
            top = std::max(top, q + 1);
        }
        gather_.assign(((top + 7) / 8) * 256, 0);
        for (std::size_t byte = 0; byte * 8 < top; ++byte) {
            for (Index v = 0; v < 256; ++v) {
                Index packed = 0;
                for (std::size_t b = 0; b < qubits.size(); ++b) {
                    const std::size_t q = qubits[b];
                    if (q / 8 == byte && ((v >> (q % 8)) & 1U) != 0U) {
                        packed |= Index{1} << b;
                    }
                }
                gather_[byte * 256 + v] = packed;
            }
        }
        scatter_.assign(((width_ + 7) / 8) * 256, 0);
        for (std::size_t byte = 0; byte * 8 < width_; ++byte) {
            for (Index v = 0; v < 256; ++v) {
                Index spread = 0;
                for (std::size_t b = byte * 8; b < std::min(width_, byte * 8 + 8); ++b) {
                    if (((v >> (b - byte * 8)) & 1U) != 0U) {
                        spread |= Index{1} << qubits[b];
                    }
                }
                scatter_[byte * 256 + v] = spread;
            }
        }
    }

    [[nodiscard]] Index gather(Index basis) const {
        Index out = 0;
        const std::size_t bytes = gather_.size() / 256;
        for (std::size_t byte = 0; byte < bytes; ++byte) {
            out |= gather_[byte * 256 + ((basis >> (8 * byte)) & 0xFFU)];
        }
        return out;
    }

    [[nodiscard]] Index scatter(Index packed) const {
        Index out = 0;
        const std::size_t bytes = scatter_.size() / 256;
        for (std::size_t byte = 0; byte < bytes; ++byte) {
            out |= scatter_[byte * 256 + ((packed >> (8 * byte)) & 0xFFU)];
        }
        return out;
    }

    [[nodiscard]] Index mask() const { return mask_; }
    [[nodiscard]] std::size_t width() const { return width_; }

  private:
    std::size_t width_{0};
    Index mask_{0};
    std::vector<Index> gather_;
    std::vector<Index> scatter_;
};

/// Dense complex amplitude array; exclusively owned during mutation.
class Statevector {
  public:
    Statevector(std::size_t num_qubits, std::size_t budget)
        : num_qubits_(num_qubits) {
        if (budget > kHardQubitCap) {
            throw CapacityError("qubit budget " + std::to_string(budget) + " exceeds the hard cap of " +
                                std::to_string(kHardQubitCap));
        }
        if (num_qubits < 1) {
            throw ArgumentError("a statevector needs at least one qubit");
        }
        if (num_qubits > budget) {
            throw CapacityError("requested " + std::to_string(num_qubits) + " qubits but the budget is " +
                                std::to_string(budget));
        }
        amplitudes_.assign(Index{1} << num_qubits, Complex{0.0, 0.0});
        amplitudes_[0] = 1.0;
    }

    Statevector(const Statevector &other) : num_qubits_(other.num_qubits_), amplitudes_(other.amplitudes_) {}
    Statevector &operator=(const Statevector &other) {
        if (this != &other) {
            num_qubits_ = other.num_qubits_;
            amplitudes_ = other.amplitudes_;
            scratch_.clear();
        }
        return *this;
    }
    Statevector(Statevector &&) noexcept = default;
    Statevector &operator=(Statevector &&) noexcept = default;
    ~Statevector() = default;

    [[nodiscard]] std::size_t num_qubits() const { return num_qubits_; }
    [[nodiscard]] Index dimension() const { return amplitudes_.size(); }
    [[nodiscard]] std::span<const Complex> amplitudes() const { return amplitudes_; }
    [[nodiscard]] std::span<Complex> amplitudes() { return amplitudes_; }
    [[nodiscard]] const Complex &operator[](Index i) const { return amplitudes_[i]; }

    [[nodiscard]] double norm_squared() const {
        double acc = 0.0;
        for (const auto &a : amplitudes_) {
            acc += std::norm(a);
        }
        return acc;
    }

    /// Resets to |0...0>.
    void reset() {
        std::fill(amplitudes_.begin(), amplitudes_.end(), Complex{0.0, 0.0});
        amplitudes_[0] = 1.0;
    }

    /// Scratch buffer of the same size, used by permutation ops.
    std::vector<Complex> &scratch() {
        if (scratch_.size() != amplitudes_.size()) {
            scratch_.assign(amplitudes_.size(), Complex{0.0, 0.0});
        }
        return scratch_;
    }
    void swap_scratch() { amplitudes_.swap(scratch_); }

    void check_qubit(std::size_t q) const {
        if (q >= num_qubits_) {
            throw StructuralError("qubit " + std::to_string(q) + " outside a " + std::to_string(num_qubits_) +
                                  "-qubit state");
        }
    }

  private:
    std::size_t num_qubits_;
    std::vector<Complex> amplitudes_;
    std::vector<Complex> scratch_;
};

/// |0...0> on `num_qubits` qubits; throws CapacityError above `budget`.
[[nodiscard]] inline Statevector allocate(std::size_t num_qubits, std::size_t budget = kHardQubitCap) {
    return Statevector(num_qubits, budget);
}

/// Exact probability that a measurement satisfies `cond`.
[[nodiscard]] inline double probability(const Statevector &state, const Condition &cond) {
    for (const auto &t : cond.terms()) {
        state.check_qubit(t.qubit);
    }
    double acc = 0.0;
    const auto amps = state.amplitudes();
    for (Index i = 0; i < amps.size(); ++i) {
        if (cond.holds(i)) {
            acc += std::norm(amps[i]);
        }
    }
    return acc;
}

/// Probability mass over basis states accepted by an arbitrary predicate.
template <class Predicate>
[[nodiscard]] double probability_if(const Statevector &state, Predicate &&accept) {
    double acc = 0.0;
    const auto amps = state.amplitudes();
    for (Index i = 0; i < amps.size(); ++i) {
        if (accept(i)) {
            acc += std::norm(amps[i]);
        }
    }
    return acc;
}

/// Marginal distribution of a register's basis values.
[[nodiscard]] inline std::vector<double> register_distribution(const Statevector &state,
                                                               const QubitRegister &reg) {
    if (reg.end() > state.num_qubits()) {
        throw StructuralError("register exceeds the state width");
    }
    std::vector<double> dist(Index{1} << reg.width, 0.0);
    const Index mask = (Index{1} << reg.width) - 1;
    const auto amps = state.amplitudes();
    for (Index i = 0; i < amps.size(); ++i) {
        dist[(i >> reg.offset) & mask] += std::norm(amps[i]);
    }
    return dist;
}

/**
 * Binomial draw of `shots` measurements against `cond`.
 * Uses std::mt19937_64 seeded with `seed`; identical seeds give identical counts.
 */
[[nodiscard]] inline std::uint64_t sample(const Statevector &state, const Condition &cond, std::uint64_t shots,
                                          std::uint64_t seed) {
    if (shots == 0) {
        throw ArgumentError("shots must be at least 1");
    }
    const double p = std::clamp(probability(state, cond), 0.0, 1.0);
    std::mt19937_64 rng(seed);
    std::binomial_distribution<std::uint64_t> draw(shots, p);
    return draw(rng);
}

} // namespace qacall::sim
