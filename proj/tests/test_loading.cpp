#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "qacall/loading/exponential.hpp"
#include "qacall/loading/gaussian.hpp"

using namespace qacall;
using namespace qacall::loading;
using qacall::sim::allocate;
using qacall::sim::Condition;

namespace {

// Conditional probability of target = 1 given the x register holds `x`.
double conditional_target(const sim::Statevector &s, const QubitRegister &x_reg, Index x, std::size_t target) {
    const Index mask = ((Index{1} << x_reg.width) - 1) << x_reg.offset;
    const Index want = x << x_reg.offset;
    const double px = sim::probability_if(s, [&](Index i) { return (i & mask) == want; });
    const double joint =
        sim::probability_if(s, [&](Index i) { return (i & mask) == want && ((i >> target) & 1U) != 0U; });
    return joint / px;
}

// r register [0, n), x register [n, 2n) in uniform superposition, target 2n, aux 2n+1.
sim::Statevector integrated_state(std::size_t n, double a, std::optional<ExponentialPrepSpec> partial) {
    auto s = allocate(2 * n + 2);
    const QubitRegister r{0, n};
    const QubitRegister x{n, n};
    for (auto q : x.qubits()) {
        sim::apply(s, sim::ry(q, std::numbers::pi / 2));
    }
    if (partial) {
        prepare_exponential_partial(s, r, 2 * n + 1, *partial);
    } else {
        prepare_exponential_full(s, r, a);
    }
    integrate_compare(s, r, x, 2 * n);
    return s;
}

} // namespace

TEST(GaussianAmplitudes, TwoPointGridIsUniform) {
    for (double s_min : {0.5, 3.0, 7.0}) {
        const auto amps = gaussian_amplitudes({1, s_min});
        ASSERT_EQ(amps.size(), 2U);
        EXPECT_NEAR(amps[0], 1.0 / std::sqrt(2.0), 1e-15);
        EXPECT_NEAR(amps[1], 1.0 / std::sqrt(2.0), 1e-15);
    }
}

TEST(GaussianAmplitudes, FourPointGridFromPdf) {
    const GaussianGridSpec spec{2, 3.0};
    EXPECT_DOUBLE_EQ(spec.ds(), 2.0);
    const auto amps = gaussian_amplitudes(spec);
    const double outer = std::exp(-4.5);
    const double inner = std::exp(-0.5);
    const double z = 2 * (outer + inner);
    EXPECT_NEAR(amps[0], std::sqrt(outer / z), 1e-15);
    EXPECT_NEAR(amps[1], std::sqrt(inner / z), 1e-15);
    EXPECT_NEAR(amps[2], amps[1], 1e-15);
    EXPECT_NEAR(amps[3], amps[0], 1e-15);
    EXPECT_GT(amps[1], amps[0]);
}

TEST(GaussianAmplitudes, UnitNorm) {
    for (std::size_t k = 1; k <= 10; ++k) {
        double total = 0.0;
        for (double a : gaussian_amplitudes({k, 3.0})) {
            EXPECT_GE(a, 0.0);
            total += a * a;
        }
        EXPECT_NEAR(total, 1.0, 1e-12);
    }
    EXPECT_THROW((void)gaussian_amplitudes({0, 3.0}), ArgumentError);
    EXPECT_THROW((void)gaussian_amplitudes({2, 0.0}), ArgumentError);
}

TEST(ExpAngles, Values) {
    for (double t : exp_angles(0.0, 5)) {
        EXPECT_NEAR(t, std::numbers::pi / 2, 1e-15);
    }
    EXPECT_NEAR(exp_angles(std::log(4.0), 1)[0], 2.0 * std::atan(2.0), 1e-15);
    EXPECT_NEAR(exp_angles(std::log(4.0), 1)[0], 2.2142974355881813, 1e-12);
    for (double t : exp_angles(-800.0, 4)) {
        EXPECT_NEAR(t, 0.0, 1e-15);
    }
}

TEST(ExponentialFull, Distributions) {
    auto u = allocate(2);
    prepare_exponential_full(u, {0, 2}, 0.0);
    for (Index r = 0; r < 4; ++r) {
        EXPECT_NEAR(u[r].real(), 0.5, 1e-15);
    }

    auto s = allocate(2);
    prepare_exponential_full(s, {0, 2}, std::log(2.0));
    const double expected[] = {1.0 / 15, 2.0 / 15, 4.0 / 15, 8.0 / 15};
    for (Index r = 0; r < 4; ++r) {
        EXPECT_NEAR(std::norm(s[r]), expected[r], 1e-15);
    }

    for (std::size_t n = 1; n <= 6; ++n) {
        for (double a : {0.1, -0.1, 1.0, -1.0}) {
            auto st = allocate(n);
            prepare_exponential_full(st, {0, n}, a);
            double z = 0.0;
            for (Index r = 0; r < (Index{1} << n); ++r) {
                z += std::exp(a * static_cast<double>(r));
            }
            for (Index r = 0; r < (Index{1} << n); ++r) {
                EXPECT_NEAR(std::norm(st[r]), std::exp(a * static_cast<double>(r)) / z, 1e-12);
            }
        }
    }

    auto busy = allocate(2);
    sim::apply(busy, sim::x(1));
    EXPECT_THROW(prepare_exponential_full(busy, {0, 2}, 0.5), PreconditionError);
}

TEST(ExponentialPartial, DegenerateIntervalMatchesFull) {
    auto full = allocate(4);
    prepare_exponential_full(full, {0, 3}, 0.37);
    auto part = allocate(4);
    prepare_exponential_partial(part, {0, 3}, 3, {3, 0.37, 0, 7});
    for (Index i = 0; i < 16; ++i) {
        EXPECT_NEAR(std::abs(full[i] - part[i]), 0.0, 1e-12);
    }
}

TEST(ExponentialPartial, PowerOfTwoInterval) {
    auto s = allocate(3);
    const auto used = prepare_exponential_partial(s, {0, 2}, 2, {2, std::log(2.0), 1, 2});
    EXPECT_EQ(used, PartialStrategy::PowerOfTwo);
    const auto dist = sim::register_distribution(s, {0, 2});
    EXPECT_NEAR(dist[0], 0.0, 1e-15);
    EXPECT_NEAR(dist[1], 1.0 / 3.0, 1e-12);
    EXPECT_NEAR(dist[2], 2.0 / 3.0, 1e-12);
    EXPECT_NEAR(dist[3], 0.0, 1e-15);
}

TEST(ExponentialPartial, NonPowerOfTwoSpanWithAuxiliary) {
    const ExponentialPrepSpec spec{3, 0.7, 1, 5};
    for (auto strategy : {PartialStrategy::Auto, PartialStrategy::FullAmplify, PartialStrategy::BlockAmplify}) {
        auto s = allocate(4);
        prepare_exponential_partial(s, {0, 3}, 3, spec, strategy);
        double z = 0.0;
        for (int r = 1; r <= 5; ++r) {
            z += std::exp(0.7 * r);
        }
        const auto dist = sim::register_distribution(s, {0, 3});
        for (Index r = 0; r < 8; ++r) {
            const double want = (r >= 1 && r <= 5) ? std::exp(0.7 * static_cast<double>(r)) / z : 0.0;
            EXPECT_NEAR(dist[r], want, 1e-10) << to_string(strategy) << " r=" << r;
        }
        EXPECT_LE(sim::probability(s, Condition{{3, true}}), 1e-12);
    }
}

TEST(ExponentialPartial, ErrorsAndStrategySelection) {
    auto s = allocate(4);
    EXPECT_THROW(prepare_exponential_partial(s, {0, 3}, 3, {3, 0.5, 5, 4}), ArgumentError);
    EXPECT_THROW(prepare_exponential_partial(s, {0, 3}, 3, {3, 0.5, 1, 5}, PartialStrategy::PowerOfTwo),
                 ArgumentError);
    EXPECT_THROW(prepare_exponential_partial(s, {0, 3}, std::nullopt, {3, 0.5, 1, 5}), StructuralError);
    EXPECT_THROW(prepare_exponential_partial(s, {0, 3}, 2, {3, 0.5, 1, 5}), StructuralError);

    // Heavy tail outside the interval: one round from the full prep is impossible.
    const auto plan = plan_exponential_partial({0, 1, 2, 3, 4, 5}, 6, {6, 1.0, 1, 5}, PartialStrategy::FullAmplify);
    EXPECT_EQ(plan.strategy, PartialStrategy::BlockAmplify);
    EXPECT_GT(plan.success_probability, 0.5);
}

TEST(ExponentialPartial, StrategiesAgreeUpToGlobalPhase) {
    for (double a : {-1.0, -0.2, 0.0, 0.4, 1.3}) {
        for (auto [x0, x1] : {std::pair<Index, Index>{2, 5}, {0, 2}, {3, 12}, {9, 15}}) {
            const ExponentialPrepSpec spec{4, a, x0, x1};
            auto full = allocate(5);
            auto block = allocate(5);
            const auto p = detail::exp_mass_fraction(a, x0, x1, 16);
            prepare_exponential_partial(block, {0, 4}, 4, spec, PartialStrategy::BlockAmplify);
            if (p >= 0.25) {
                prepare_exponential_partial(full, {0, 4}, 4, spec, PartialStrategy::FullAmplify);
                sim::Complex overlap{0.0, 0.0};
                for (Index i = 0; i < 32; ++i) {
                    overlap += std::conj(full[i]) * block[i];
                }
                EXPECT_GE(std::norm(overlap), 1.0 - 1e-10);
            }
            EXPECT_LE(sim::probability(block, Condition{{4, true}}), 1e-12);
        }
    }
}

TEST(ExponentialPartial, ZeroRateIsUniform) {
    auto s = allocate(4);
    prepare_exponential_partial(s, {0, 3}, 3, {3, 0.0, 2, 6});
    const auto dist = sim::register_distribution(s, {0, 3});
    for (Index r = 2; r <= 6; ++r) {
        EXPECT_NEAR(dist[r], 0.2, 1e-12);
    }
}

TEST(MassFraction, MatchesDirectSum) {
    for (double a : {-3.0, -0.4, 0.0, 0.4, 3.0}) {
        double num = 0.0;
        double den = 0.0;
        for (int r = 0; r < 16; ++r) {
            den += std::exp(a * r);
            if (r >= 3 && r <= 9) {
                num += std::exp(a * r);
            }
        }
        EXPECT_NEAR(detail::exp_mass_fraction(a, 3, 9, 16), num / den, 1e-13);
    }
}

TEST(IntegrateCompare, FullExponentialExamples) {
    const std::size_t n = 2;
    const double a = std::log(2.0);
    auto s = integrated_state(n, a, std::nullopt);
    EXPECT_NEAR(std::sqrt(conditional_target(s, {n, n}, 3, 2 * n)), 1.0, 1e-12);
    EXPECT_NEAR(std::sqrt(conditional_target(s, {n, n}, 1, 2 * n)), std::sqrt(3.0 / 15.0), 1e-12);
    EXPECT_NEAR(std::sqrt(3.0 / 15.0), 0.44721, 1e-5);
}

TEST(IntegrateCompare, PartialOuterBranches) {
    const std::size_t n = 2;
    auto s = integrated_state(n, 0.0, ExponentialPrepSpec{n, std::log(2.0), 1, 2});
    EXPECT_NEAR(conditional_target(s, {n, n}, 0, 2 * n), 0.0, 1e-12);
    EXPECT_NEAR(conditional_target(s, {n, n}, 3, 2 * n), 1.0, 1e-12);
}

TEST(IntegrateCompare, WidthMismatch) {
    auto s = allocate(5);
    EXPECT_THROW(integrate_compare(s, {0, 2}, {2, 3}, 4), StructuralError);
    EXPECT_THROW((void)integrate_compare_op({0, 1}, {2}, 3), StructuralError);
}

TEST(IntegrateCompare, ClosedFormsExhaustive) {
    for (std::size_t n = 1; n <= 4; ++n) {
        for (double a : {-1.0, -0.3, 0.2, 1.0}) {
            auto s = integrated_state(n, a, std::nullopt);
            for (Index xv = 0; xv < (Index{1} << n); ++xv) {
                const double amp = std::sqrt(conditional_target(s, {n, n}, xv, 2 * n));
                EXPECT_NEAR(amp, integration_amplitude_full(a, n, xv), 1e-10);
            }
        }
    }
}

TEST(IntegrateCompare, PartialNondecreasingAndClosedForm) {
    const std::size_t n = 4;
    for (double a : {-1.0, 0.2, 1.0}) {
        for (auto [x0, x1] : {std::pair<Index, Index>{0, 15}, {3, 9}, {5, 5}, {4, 11}}) {
            auto s = integrated_state(n, 0.0, ExponentialPrepSpec{n, a, x0, x1});
            double prev = -1.0;
            for (Index xv = 0; xv < 16; ++xv) {
                const double amp = std::sqrt(conditional_target(s, {n, n}, xv, 2 * n));
                EXPECT_NEAR(amp, integration_amplitude_partial(a, x0, x1, xv), 1e-10);
                EXPECT_GE(amp, prev - 1e-12);
                prev = amp;
            }
        }
    }
}

TEST(IntegrateCompare, ClosedFormOracleAgreesWithDirectSum) {
    // Direct summation oracle for the closed forms themselves.
    for (double a : {-1.0, -0.3, 0.2, 1.0}) {
        const Index x0 = 2;
        const Index x1 = 9;
        double den = 0.0;
        for (Index r = x0; r <= x1; ++r) {
            den += std::exp(a * static_cast<double>(r));
        }
        double num = 0.0;
        for (Index xv = x0; xv <= x1; ++xv) {
            num += std::exp(a * static_cast<double>(xv));
            EXPECT_NEAR(integration_amplitude_partial(a, x0, x1, xv), std::sqrt(num / den), 1e-13);
        }
        double total = 0.0;
        for (Index r = 0; r < 16; ++r) {
            total += std::exp(a * static_cast<double>(r));
        }
        double acc = 0.0;
        for (Index xv = 0; xv < 16; ++xv) {
            acc += std::exp(a * static_cast<double>(xv));
            EXPECT_NEAR(integration_amplitude_full(a, 4, xv), std::sqrt(acc / total), 1e-13);
        }
    }
}
