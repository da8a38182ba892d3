#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "qacall/estimation/grover.hpp"
#include "qacall/oracles/oracles.hpp"
#include "qacall/pricing/circuit.hpp"

using namespace qacall;
using namespace qacall::pricing;

namespace {

double circuit_value(const PricingCircuit &pc) {
    return post_process(estimation::exact_amplitude(pc.circuit, pc.good, pc.layout.total), pc.mapping);
}

// Writes a two's-complement code into the accumulator of a fresh state.
sim::Statevector with_accumulator(const PricingCircuit &pc, Code code) {
    auto s = sim::allocate(pc.layout.total);
    const auto bits = pc.model.fmt.encode(code);
    for (std::size_t b = 0; b < pc.layout.accumulator.width; ++b) {
        if (((bits >> b) & 1U) != 0U) {
            sim::apply(s, sim::x(pc.layout.accumulator.qubit(b)));
        }
    }
    return s;
}

PricingCircuit reference_circuit(std::size_t k, std::size_t p) {
    return build_pricing_circuit(quantize_model(reference_contract(), {k, 3.0}, p));
}

} // namespace

TEST(FixedPoint, QuantizeTiesToEven) {
    EXPECT_EQ(quantize(0.5, 0), 0);
    EXPECT_EQ(quantize(1.5, 0), 2);
    EXPECT_EQ(quantize(-0.5, 0), 0);
    EXPECT_EQ(quantize(-1.5, 0), -2);
    EXPECT_EQ(quantize(2.5, 0), 2);
    EXPECT_EQ(quantize(0.625, 2), 2);
    EXPECT_EQ(quantize(0.3, 3), 2);
}

TEST(FixedPoint, EncodeDecodeRoundTrip) {
    const FixedPointFormat f{2, 2, true};
    EXPECT_EQ(f.width(), 5U);
    EXPECT_EQ(f.min_code(), -16);
    EXPECT_EQ(f.max_code(), 15);
    for (Code c = f.min_code(); c <= f.max_code(); ++c) {
        EXPECT_EQ(f.decode(f.encode(c)), c);
        EXPECT_EQ(f.offset(c), static_cast<Index>(c + 16));
    }
    EXPECT_EQ(fitting_format(-6, 9, 2).int_bits, 2U);
}

TEST(Contract, Validation) {
    auto c = reference_contract();
    EXPECT_NO_THROW(c.validate());
    c.barrier = 1.2;
    EXPECT_THROW(c.validate(), ArgumentError);
    c = reference_contract();
    c.binaries[1].step = 3;
    EXPECT_THROW(c.validate(), ArgumentError);
    c = reference_contract();
    c.binaries[1].step = 1;
    EXPECT_THROW(c.validate(), ArgumentError);
    c = reference_contract();
    c.sigma = -0.1;
    EXPECT_THROW(c.validate(), ArgumentError);
}

TEST(LogReturnIncrement, Examples) {
    auto c = reference_contract();
    const GaussianGridSpec k1{1, 3.0};
    const FixedPointFormat wide{4, 6, true};
    EXPECT_EQ(log_return_increment(1, c, k1, wide), quantize(0.1274 + 0.2382 * 3.0, 6));
    EXPECT_EQ(log_return_increment(1, c, k1, wide), quantize(0.842, 6));

    c.sigma = 0.0;
    const GaussianGridSpec k3{3, 3.0};
    for (Index g = 0; g < 8; ++g) {
        EXPECT_EQ(log_return_increment(g, c, k3, wide), quantize(0.1274, 6));
    }

    c = reference_contract();
    const FixedPointFormat fine{4, 10, true};
    const Code mu = quantize(0.1274, 10);
    for (Index g = 0; g < 8; ++g) {
        const Code a = log_return_increment(g, c, k3, fine);
        const Code b = log_return_increment(7 - g, c, k3, fine);
        EXPECT_LE(std::abs((a - mu) + (b - mu)), 2);
    }
    c.sigma = 0.5;
    EXPECT_THROW((void)log_return_increment(1, c, k1, FixedPointFormat{0, 6, true}), ArgumentError);
    EXPECT_THROW((void)log_return_increment(2, c, k1, wide), ArgumentError);
}

TEST(QuantizedModel, AutomaticWidth) {
    const auto m = quantize_model(reference_contract(), {1, 3.0}, 2);
    EXPECT_EQ(m.increments, (std::vector<Code>{-2, 3}));
    EXPECT_EQ(m.min_path_code, -6);
    EXPECT_EQ(m.max_path_code, 9);
    EXPECT_EQ(m.fmt.width(), 5U);
    EXPECT_TRUE(m.put_reachable);
    EXPECT_THROW((void)quantize_model(reference_contract(), {1, 3.0}, 2, 1), ArgumentError);
}

TEST(Mapping, ReferenceContract) {
    const auto map = derive_mapping(reference_contract(), {1, 3.0}, FixedPointFormat{2, 2, true});
    EXPECT_NEAR(map.f_max, 5.0 * std::exp(-0.08), 1e-15);
    EXPECT_NEAR(map.f_max, 4.6156, 1e-4);
    EXPECT_GT(map.zero_amplitude2, 0.0);
    EXPECT_LT(map.zero_amplitude2, 1.0);
    EXPECT_NEAR(post_process(map.zero_amplitude2, map), 0.0, 1e-12);
    EXPECT_NEAR(post_process(1.0, map), map.f_max, 1e-12);
    EXPECT_DOUBLE_EQ(post_process(0.0, map), map.p_min);
    EXPECT_NEAR(post_process(map.binary_amplitude2[1], map), 5.0 * std::exp(-0.08), 1e-12);
    EXPECT_NEAR(map.binary_amplitude2[1], 1.0, 1e-15);
}

TEST(Mapping, NoBinariesAndUnreachablePutRejected) {
    AutocallableContract c;
    c.steps = 1;
    c.sigma = 0.0;
    c.mu = 0.5;
    const auto m = quantize_model(c, {1, 3.0}, 3);
    EXPECT_FALSE(m.put_reachable);
    EXPECT_THROW((void)derive_mapping(m), NumericalError);
}

TEST(FlagBarrier, StrictComparison) {
    const auto pc = reference_circuit(1, 2);
    const auto &l = pc.layout;
    const Code cb = pc.model.barrier_code;
    for (auto [code, expect] : {std::pair<Code, bool>{cb, false}, {cb - 1, true}, {8, false}}) {
        auto s = with_accumulator(pc, code);
        sim::apply(s, flag_barrier_op(l, pc.model, 0));
        EXPECT_NEAR(sim::probability(s, {{l.barrier.qubit(0), true}}), expect ? 1.0 : 0.0, 1e-15) << code;
    }
}

TEST(FlagBinary, TieAndExclusivity) {
    const auto pc = reference_circuit(1, 2);
    const auto &l = pc.layout;
    const Code ck = pc.model.binary_codes[0];
    auto tie = with_accumulator(pc, ck);
    sim::apply(tie, flag_binary_op(l, pc.model, 0));
    EXPECT_EQ(sim::probability(tie, {{l.binary.qubit(0), true}}), 0.0);

    auto both = with_accumulator(pc, ck + 3);
    sim::apply(both, flag_binary_op(l, pc.model, 0));
    sim::apply(both, flag_binary_op(l, pc.model, 1));
    EXPECT_NEAR(sim::probability(both, {{l.binary.qubit(0), true}, {l.binary.qubit(1), false}}), 1.0, 1e-15);

    auto none = with_accumulator(pc, ck - 3);
    sim::apply(none, flag_binary_op(l, pc.model, 0));
    sim::apply(none, flag_binary_op(l, pc.model, 1));
    EXPECT_NEAR(sim::probability(none, {{l.binary.qubit(0), false}, {l.binary.qubit(1), false}}), 1.0, 1e-15);
}

TEST(ConstantPayoff, RotationAlgebra) {
    auto pc = reference_circuit(1, 2);
    const auto &l = pc.layout;
    pc.mapping.binary_amplitude2 = {0.25, 1.0};
    auto s = sim::allocate(l.total);
    sim::apply(s, sim::x(l.binary.qubit(0)));
    sim::apply(s, load_constant_payoff_ops(l, pc.mapping, 0));
    EXPECT_NEAR(sim::probability(s, pc.good), 0.25, 1e-12);
    const auto ops = load_constant_payoff_ops(l, pc.mapping, 1);
    EXPECT_NEAR(std::get<sim::CRY>(ops[0]).angle, std::numbers::pi, 1e-15);
    pc.mapping.binary_amplitude2 = {1.5, 1.0};
    EXPECT_THROW((void)load_constant_payoff_ops(l, pc.mapping, 0), NumericalError);
}

TEST(PricingCircuit, SmallestReferenceConfigFitsIn20Qubits) {
    const auto pc = reference_circuit(1, 2);
    EXPECT_LE(pc.layout.total, 20U);
    EXPECT_EQ(pc.layout.total, 20U);
}

TEST(PricingCircuit, MatchesQuantizedOracle) {
    for (std::size_t k : {1, 2}) {
        for (std::size_t p : {2, 3}) {
            const auto pc = reference_circuit(k, p);
            if (pc.layout.total > 22) {
                continue;
            }
            EXPECT_NEAR(circuit_value(pc), oracles::closed_form_quantized(pc.model), 1e-9) << "k=" << k << " p=" << p;
        }
    }
}

TEST(PricingCircuit, BranchPartitionAndRoundTrip) {
    const auto pc = reference_circuit(1, 2);
    auto s = sim::allocate(pc.layout.total);
    sim::apply(s, pc.circuit);
    const auto br = branch_probabilities(s, pc);
    EXPECT_NEAR(br[0] + br[1] + br[2], 1.0, 1e-10);
    EXPECT_GT(br[0], 0.0);
    EXPECT_GT(br[1], 0.0);
    sim::apply(s, sim::invert(pc.circuit));
    EXPECT_NEAR(std::abs(s[0]), 1.0, 1e-10);
    double worst = std::abs(s[0] - sim::Complex(1.0, 0.0));
    for (Index i = 1; i < s.dimension(); ++i) {
        worst = std::max(worst, std::abs(s[i]));
    }
    EXPECT_LE(worst, 1e-10);
}

TEST(PricingCircuit, PrepStrategiesAgree) {
    const auto model = quantize_model(reference_contract(), {1, 3.0}, 2);
    const auto full = build_pricing_circuit(model, {sim::kDefaultQubitBudget, loading::PartialStrategy::FullAmplify});
    const auto block = build_pricing_circuit(model, {sim::kDefaultQubitBudget, loading::PartialStrategy::BlockAmplify});
    EXPECT_NEAR(circuit_value(full), circuit_value(block), 1e-12);
}

TEST(PricingCircuit, DegenerateVolatility) {
    auto c = reference_contract();
    c.sigma = 0.0;
    const auto pc = build_pricing_circuit(quantize_model(c, {1, 3.0}, 2));
    EXPECT_FALSE(pc.layout.has_put());
    EXPECT_NEAR(circuit_value(pc), 2.0 * std::exp(-0.04), 1e-9);
    EXPECT_NEAR(2.0 * std::exp(-0.04), 1.9216, 1e-4);
}

TEST(PricingCircuit, SingleStepToyExhaustive) {
    AutocallableContract c;
    c.steps = 1;
    c.barrier = 0.9;
    for (std::size_t k : {1, 2, 3}) {
        for (std::size_t p : {2, 4, 5}) {
            const auto m = quantize_model(c, {k, 3.0}, p);
            const auto pc = build_pricing_circuit(m);
            EXPECT_NEAR(circuit_value(pc), oracles::closed_form_quantized(m), 1e-10) << k << " " << p;
        }
    }
}

TEST(PricingCircuit, WorstPathHasZeroGoodAmplitude) {
    AutocallableContract c;
    c.steps = 1;
    c.barrier = 0.9;
    const auto m = quantize_model(c, {1, 3.0}, 3);
    const auto map = derive_mapping(m);
    EXPECT_EQ(m.put_fraction(m.min_path_code), 0.0);
    EXPECT_NEAR(post_process(map.zero_amplitude2 * m.put_fraction(m.min_path_code), map), map.p_min, 1e-12);
}

TEST(PricingCircuit, CapacityErrorNamesRegisters) {
    const auto m = quantize_model(reference_contract(), {2, 3.0}, 4);
    try {
        (void)build_pricing_circuit(m, {24, loading::PartialStrategy::Auto});
        FAIL() << "expected capacity error";
    } catch (const CapacityError &e) {
        const std::string msg = e.what();
        EXPECT_NE(msg.find("accumulator"), std::string::npos);
        EXPECT_NE(msg.find("gaussian 3x2"), std::string::npos);
    }
}
