#pragma once

/**
 * @file
 * Iterative quantum amplitude estimation (Grinko, Gacon, Zoufal, Woerner)
 * with Chernoff-Hoeffding confidence intervals.
 *
 * The good angle theta is tracked in units of full turns, a = sin^2(2 pi theta)
 * with theta in [0, 1/4]. Each round picks the largest k whose scaled interval
 * stays inside one half circle, measures the good condition on Q^k A|0>, and
 * maps the pooled Chernoff interval back to theta.
 */

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "qacall/errors.hpp"
#include "qacall/estimation/grover.hpp"
#include "qacall/sim/statevector.hpp"

namespace qacall::estimation {

struct IqaeConfig {
    double epsilon{0.01};             ///< target half-width of the amplitude interval
    double alpha{0.05};               ///< failure probability
    std::uint64_t shots_per_round{100};
    std::size_t max_rounds{1000};     ///< iteration cap; hitting it marks the result non-converged
    std::uint64_t seed{0};

    void validate() const {
        if (!(epsilon > 0.0 && epsilon < 0.5)) {
            throw ArgumentError("iqae: epsilon must be in (0, 0.5)");
        }
        if (!(alpha > 0.0 && alpha < 1.0)) {
            throw ArgumentError("iqae: alpha must be in (0, 1)");
        }
        if (shots_per_round < 1) {
            throw ArgumentError("iqae: shots_per_round must be at least 1");
        }
        if (max_rounds < 1) {
            throw ArgumentError("iqae: max_rounds must be at least 1");
        }
    }
};

struct EstimateResult {
    double a_hat{0.0};
    double ci_low{0.0};
    double ci_high{1.0};
    std::uint64_t oracle_calls{0}; ///< sum over rounds of shots * k
    std::uint64_t shots{0};
    std::size_t rounds{0};
    std::size_t max_power{0};      ///< largest k used
    bool converged{false};
};

namespace detail {

struct Step {
    std::size_t k;
    bool upper;
};

/// Largest k with (4k+2)[theta_l, theta_u] inside one half circle, at least doubling the scaling.
inline Step find_next_k(std::size_t k, bool upper, double theta_l, double theta_u, double min_ratio = 2.0) {
    const double old_scaling = 4.0 * static_cast<double>(k) + 2.0;
    const auto max_scaling = static_cast<long long>(1.0 / (2.0 * (theta_u - theta_l)));
    long long scaling = max_scaling - (max_scaling - 2) % 4;
    while (static_cast<double>(scaling) >= min_ratio * old_scaling) {
        const double s = static_cast<double>(scaling);
        const double lo = s * theta_l - std::floor(s * theta_l);
        const double hi = s * theta_u - std::floor(s * theta_u);
        if (lo <= hi && hi <= 0.5 && lo <= 0.5) {
            return {static_cast<std::size_t>((scaling - 2) / 4), true};
        }
        if (hi >= 0.5 && hi >= lo && lo >= 0.5) {
            return {static_cast<std::size_t>((scaling - 2) / 4), false};
        }
        scaling -= 4;
    }
    return {k, upper};
}

} // namespace detail

/**
 * Estimates P(good) for A|0...0> on `num_qubits` qubits.
 * Q^k A|0> is advanced incrementally since k never decreases.
 */
[[nodiscard]] inline EstimateResult iqae_estimate(const Circuit &a, const Condition &good, std::size_t num_qubits,
                                                  const IqaeConfig &cfg) {
    cfg.validate();
    const double pi = std::numbers::pi;
    const double eps = cfg.epsilon;
    // Number of rounds the union bound covers.
    const auto bound_rounds =
        static_cast<double>(static_cast<long long>(std::log(2.0 * pi / 8.0 / eps) / std::log(2.0)) + 1);
    const double log_term = std::log(2.0 * bound_rounds / cfg.alpha);
    const double shots = static_cast<double>(cfg.shots_per_round);
    const double l_max = std::asin(std::pow(2.0 / shots * log_term, 0.25));
    const auto big_k_cap = std::ceil(l_max / eps);

    const Circuit q = build_grover(a, good, num_qubits);
    auto state = sim::allocate(num_qubits);
    sim::apply(state, a);
    std::size_t applied = 0;

    std::mt19937_64 rng(cfg.seed);
    EstimateResult res;
    double theta_l = 0.0;
    double theta_u = 0.25;
    bool upper = true;
    std::vector<std::size_t> powers{0};
    std::vector<std::uint64_t> round_shots;
    std::vector<std::uint64_t> round_ones;

    while (theta_u - theta_l > eps / pi) {
        if (res.rounds == cfg.max_rounds) {
            break;
        }
        ++res.rounds;
        const auto step = detail::find_next_k(powers.back(), upper, theta_l, theta_u);
        const std::size_t k = step.k;
        upper = step.upper;
        powers.push_back(k);
        const double big_k = 2.0 * static_cast<double>(k) + 1.0;

        std::uint64_t n = cfg.shots_per_round;
        if (big_k > big_k_cap) {
            // Past the point where one round settles the estimate: avoid overshooting.
            n = static_cast<std::uint64_t>(std::ceil(shots * l_max / eps / big_k / 10.0));
            n = std::max<std::uint64_t>(n, 1);
        }
        for (; applied < k; ++applied) {
            sim::apply(state, q);
        }
        const double p = std::clamp(sim::probability(state, good), 0.0, 1.0);
        std::binomial_distribution<std::uint64_t> draw(n, p);
        const std::uint64_t ones = draw(rng);
        round_shots.push_back(n);
        round_ones.push_back(ones);
        res.oracle_calls += n * k;
        res.shots += n;
        res.max_power = std::max(res.max_power, k);

        // Pool the trailing rounds that used the same power.
        std::uint64_t pooled_n = 0;
        std::uint64_t pooled_ones = 0;
        for (std::size_t r = round_shots.size(); r-- > 0;) {
            if (powers[r + 1] != k) {
                break;
            }
            pooled_n += round_shots[r];
            pooled_ones += round_ones[r];
        }
        const double a_i = static_cast<double>(pooled_ones) / static_cast<double>(pooled_n);
        const double eps_i = std::sqrt(log_term / (2.0 * static_cast<double>(pooled_n)));
        const double a_lo = std::max(a_i - eps_i, 0.0);
        const double a_hi = std::min(a_i + eps_i, 1.0);

        double t_min;
        double t_max;
        if (upper) {
            t_min = std::acos(1.0 - 2.0 * a_lo) / (2.0 * pi);
            t_max = std::acos(1.0 - 2.0 * a_hi) / (2.0 * pi);
        } else {
            t_min = 1.0 - std::acos(1.0 - 2.0 * a_hi) / (2.0 * pi);
            t_max = 1.0 - std::acos(1.0 - 2.0 * a_lo) / (2.0 * pi);
        }
        const double scaling = 4.0 * static_cast<double>(k) + 2.0;
        // Both ends share one half period. Taking the period from the lower end
        // keeps an upper end that sits exactly on a period boundary in place.
        const double period = std::floor(scaling * theta_l);
        theta_u = (period + t_max) / scaling;
        theta_l = (period + t_min) / scaling;
    }
    res.converged = theta_u - theta_l <= eps / pi;
    const double s_l = std::sin(2.0 * pi * theta_l);
    const double s_u = std::sin(2.0 * pi * theta_u);
    res.ci_low = std::min(s_l * s_l, s_u * s_u);
    res.ci_high = std::max(s_l * s_l, s_u * s_u);
    res.a_hat = 0.5 * (res.ci_low + res.ci_high);
    return res;
}

} // namespace qacall::estimation
