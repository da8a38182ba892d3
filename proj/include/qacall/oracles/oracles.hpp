#pragma once

/**
 * @file
 * Classical reference prices: plain Monte Carlo, Monte Carlo on the
 * discretized Gaussian, the exact expectation over all grid paths, and the
 * same expectation under the pricing circuit's fixed-point semantics.
 */

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include "qacall/errors.hpp"
#include "qacall/loading/gaussian.hpp"
#include "qacall/oracles/rng.hpp"
#include "qacall/pricing/contract.hpp"
#include "qacall/pricing/model.hpp"

namespace qacall::oracles {

using loading::GaussianGridSpec;
using pricing::AutocallableContract;

/// Enumeration limit of the closed forms.
inline constexpr std::uint64_t kMaxEnumeratedPaths = std::uint64_t{1} << 24;

struct PathOutcome {
    std::vector<double> log_returns; ///< cumulative l_1..l_T
    bool barrier_crossed{false};
    std::optional<std::size_t> binary; ///< first binary in the money
    double terminal_return{1.0};
    double payoff{0.0};
};

/// Evaluates one path given its T per-step log-return increments.
[[nodiscard]] inline PathOutcome evaluate_path(std::span<const double> increments, const AutocallableContract &c) {
    PathOutcome out;
    double l = 0.0;
    for (double dl : increments) {
        l += dl;
        out.log_returns.push_back(l);
        out.barrier_crossed = out.barrier_crossed || std::exp(l) < c.barrier;
    }
    out.terminal_return = std::exp(l);
    for (std::size_t i = 0; i < c.binaries.size(); ++i) {
        const auto &b = c.binaries[i];
        if (std::exp(out.log_returns[b.step - 1]) > b.strike) {
            out.binary = i;
            out.payoff = b.payout * c.discount(b.step);
            return out;
        }
    }
    if (out.barrier_crossed && out.terminal_return < c.strike) {
        out.payoff = c.notional * (out.terminal_return - c.strike) * c.discount(c.steps);
    }
    return out;
}

/// Same payoff as evaluate_path without allocating; used by the hot loops.
[[nodiscard]] inline double payoff_of_path(std::span<const double> increments, const AutocallableContract &c) {
    // Binary steps are strictly increasing, so the first hit in time is the first in index order.
    double l = 0.0;
    bool crossed = false;
    std::size_t next = 0;
    for (std::size_t t = 0; t < increments.size(); ++t) {
        l += increments[t];
        const double r = std::exp(l);
        crossed = crossed || r < c.barrier;
        if (next < c.binaries.size() && c.binaries[next].step == t + 1) {
            const auto &b = c.binaries[next++];
            if (r > b.strike) {
                return b.payout * c.discount(b.step);
            }
        }
    }
    const double r_t = std::exp(l);
    return (crossed && r_t < c.strike) ? c.notional * (r_t - c.strike) * c.discount(c.steps) : 0.0;
}

struct McResult {
    double mean{0.0};
    double std_error{0.0};
    std::uint64_t paths{0};
    std::uint64_t seed{0};
};

namespace detail {

/// Running mean and centred second moment; combines exactly for equal samples.
struct Moments {
    std::uint64_t n{0};
    double mean{0.0};
    double m2{0.0};

    void add(double x) {
        ++n;
        const double delta = x - mean;
        mean += delta / static_cast<double>(n);
        m2 += delta * (x - mean);
    }
    void merge(const Moments &o) {
        if (o.n == 0) {
            return;
        }
        if (n == 0) {
            *this = o;
            return;
        }
        const double total = static_cast<double>(n + o.n);
        const double delta = o.mean - mean;
        mean += delta * static_cast<double>(o.n) / total;
        m2 += o.m2 + delta * delta * static_cast<double>(n) * static_cast<double>(o.n) / total;
        n += o.n;
    }
};

inline constexpr std::uint64_t kBatch = 1 << 15;

/**
 * Runs `paths` seeded paths in fixed batches and merges them in batch order,
 * so the result does not depend on the thread count.
 */
template <class Increment>
McResult simulate(const AutocallableContract &c, std::uint64_t paths, std::uint64_t seed, unsigned threads,
                  Increment increment) {
    if (paths < 1) {
        throw ArgumentError("Monte Carlo needs at least one path");
    }
    c.validate();
    const std::uint64_t batches = (paths + kBatch - 1) / kBatch;
    std::vector<Moments> parts(batches);
    auto run_batch = [&](std::uint64_t b) {
        std::vector<double> inc(c.steps);
        const std::uint64_t end = std::min(paths, (b + 1) * kBatch);
        for (std::uint64_t p = b * kBatch; p < end; ++p) {
            for (std::size_t t = 0; t < c.steps; ++t) {
                inc[t] = increment(stream_uniform(seed, p, t));
            }
            parts[b].add(payoff_of_path(inc, c));
        }
    };
    threads = std::max(1U, std::min<unsigned>(threads, static_cast<unsigned>(batches)));
    if (threads == 1) {
        for (std::uint64_t b = 0; b < batches; ++b) {
            run_batch(b);
        }
    } else {
        std::vector<std::thread> pool;
        for (unsigned w = 0; w < threads; ++w) {
            pool.emplace_back([&, w] {
                for (std::uint64_t b = w; b < batches; b += threads) {
                    run_batch(b);
                }
            });
        }
        for (auto &th : pool) {
            th.join();
        }
    }
    Moments total;
    for (const auto &m : parts) {
        total.merge(m);
    }
    McResult r;
    r.mean = total.mean;
    r.paths = paths;
    r.seed = seed;
    if (paths > 1) {
        const double var = std::max(total.m2, 0.0) / static_cast<double>(paths - 1);
        r.std_error = std::sqrt(var / static_cast<double>(paths));
    }
    return r;
}

} // namespace detail

/// Plain Monte Carlo with standard normal increments drawn by inverse CDF.
[[nodiscard]] inline McResult mc_price(const AutocallableContract &c, std::uint64_t paths, std::uint64_t seed,
                                       unsigned threads = 1) {
    static const boost::math::normal_distribution<double> standard;
    const double drift = c.mu * c.dt;
    const double vol = c.sigma * std::sqrt(c.dt);
    return detail::simulate(c, paths, seed, threads, [&](double u) {
        return drift + vol * boost::math::quantile(standard, u);
    });
}

/// Inverse-CDF sampler over the renormalized grid; returns the grid value in units of sigma.
class GridSampler {
  public:
    explicit GridSampler(const GaussianGridSpec &grid) : grid_(grid) {
        const auto probs = loading::gaussian_probabilities(grid);
        cdf_.resize(probs.size());
        double acc = 0.0;
        for (std::size_t g = 0; g < probs.size(); ++g) {
            acc += probs[g];
            cdf_[g] = acc;
        }
        cdf_.back() = 1.0;
    }

    [[nodiscard]] std::size_t index(double u) const {
        const auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
        return std::min<std::size_t>(static_cast<std::size_t>(it - cdf_.begin()), cdf_.size() - 1);
    }
    [[nodiscard]] double operator()(double u) const { return grid_.value(index(u)); }

  private:
    GaussianGridSpec grid_;
    std::vector<double> cdf_;
};

/// Monte Carlo whose increments come from the renormalized grid distribution.
[[nodiscard]] inline McResult mc_price_discretized(const AutocallableContract &c, const GaussianGridSpec &grid,
                                                   std::uint64_t paths, std::uint64_t seed, unsigned threads = 1) {
    const GridSampler sampler(grid);
    std::vector<double> values(grid.points());
    for (std::size_t g = 0; g < values.size(); ++g) {
        values[g] = c.mu * c.dt + c.sigma * grid.value(g) * std::sqrt(c.dt);
    }
    return detail::simulate(c, paths, seed, threads, [&](double u) { return values[sampler.index(u)]; });
}

namespace detail {

inline void check_enumerable(const GaussianGridSpec &grid, std::size_t steps) {
    grid.validate();
    const double count = std::pow(static_cast<double>(grid.points()), static_cast<double>(steps));
    if (count > static_cast<double>(kMaxEnumeratedPaths)) {
        throw CapacityError("closed form would enumerate " + std::to_string(count) +
                            " grid paths (limit 2^24); use the Monte Carlo oracles instead");
    }
}

/// Visits every grid path in lexicographic order; `leaf` receives (probability, grid indices).
template <class Leaf>
void enumerate_paths(const std::vector<double> &probs, std::size_t steps, Leaf &&leaf) {
    std::vector<std::size_t> idx(steps, 0);
    std::vector<double> weight(steps + 1, 1.0);
    std::size_t dirty = 0; // first level whose prefix weight is stale
    while (true) {
        for (std::size_t d = dirty; d < steps; ++d) {
            weight[d + 1] = weight[d] * probs[idx[d]];
        }
        leaf(weight[steps], std::span<const std::size_t>(idx));
        std::size_t d = steps;
        while (true) {
            if (d == 0) {
                return;
            }
            --d;
            if (++idx[d] < probs.size()) {
                break;
            }
            idx[d] = 0;
        }
        dirty = d;
    }
}

} // namespace detail

/// Exact expectation over every grid path, real-valued arithmetic.
[[nodiscard]] inline double closed_form_discretized(const AutocallableContract &c, const GaussianGridSpec &grid) {
    c.validate();
    detail::check_enumerable(grid, c.steps);
    const auto probs = loading::gaussian_probabilities(grid);
    std::vector<double> values(probs.size());
    for (std::size_t g = 0; g < probs.size(); ++g) {
        values[g] = c.mu * c.dt + c.sigma * grid.value(g) * std::sqrt(c.dt);
    }
    double total = 0.0;
    std::vector<double> inc(c.steps);
    detail::enumerate_paths(probs, c.steps, [&](double w, std::span<const std::size_t> idx) {
        for (std::size_t t = 0; t < idx.size(); ++t) {
            inc[t] = values[idx[t]];
        }
        total += w * payoff_of_path(inc, c);
    });
    return total;
}

/// Expected good-state probability under the circuit's fixed-point semantics.
[[nodiscard]] inline double quantized_good_probability(const pricing::QuantizedModel &m,
                                                       const pricing::AmplitudeMapping &map) {
    detail::check_enumerable(m.grid, m.contract.steps);
    const auto probs = loading::gaussian_probabilities(m.grid);
    std::vector<pricing::Code> cumulative(m.contract.steps);
    double total = 0.0;
    detail::enumerate_paths(probs, m.contract.steps, [&](double w, std::span<const std::size_t> idx) {
        pricing::Code l = 0;
        for (std::size_t t = 0; t < idx.size(); ++t) {
            l += m.increments[idx[t]];
            cumulative[t] = l;
        }
        total += w * pricing::good_probability(m, map, m.classify(cumulative), l);
    });
    return total;
}

/// Fixed-point closed form; equals the post-processed exact circuit probability.
[[nodiscard]] inline double closed_form_quantized(const pricing::QuantizedModel &m) {
    const auto map = pricing::derive_mapping(m);
    return pricing::post_process(quantized_good_probability(m, map), map);
}

[[nodiscard]] inline double closed_form_quantized(const AutocallableContract &c, const GaussianGridSpec &grid,
                                                  const pricing::FixedPointFormat &fmt) {
    return closed_form_quantized(pricing::quantize_model(c, grid, fmt));
}

} // namespace qacall::oracles
