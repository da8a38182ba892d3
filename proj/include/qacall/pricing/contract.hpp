#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "qacall/errors.hpp"

namespace qacall::pricing {

/// Binary leg observed after `step` timesteps (1-based).
struct BinaryOption {
    std::size_t step{1};
    double strike{1.0};
    double payout{0.0};
};

/**
 * Single-asset autocallable: the first binary whose return exceeds its
 * strike pays and terminates the contract; otherwise a short knock-in put
 * V*(r_T - K) applies if the return ever fell below the barrier b and ends
 * below K.
 */
struct AutocallableContract {
    double notional{18.0};
    double dt{1.0};
    std::size_t steps{3};
    double mu{0.1274};
    double sigma{0.2382};
    double rate{0.04};
    double barrier{0.7};
    double strike{1.0};
    std::vector<BinaryOption> binaries;

    /// exp(-r * step * dt), continuous compounding.
    [[nodiscard]] double discount(std::size_t step) const {
        return std::exp(-rate * static_cast<double>(step) * dt);
    }

    /// Largest discounted binary payout, 0 without binaries.
    [[nodiscard]] double max_discounted_binary() const {
        double best = 0.0;
        for (const auto &b : binaries) {
            best = std::max(best, b.payout * discount(b.step));
        }
        return best;
    }

    void validate() const {
        std::string problems;
        auto bad = [&problems](const std::string &what) { problems += (problems.empty() ? "" : "; ") + what; };
        if (steps < 1) {
            bad("T must be at least 1");
        }
        if (!(notional > 0.0)) {
            bad("V must be positive");
        }
        if (!(dt > 0.0)) {
            bad("dt must be positive");
        }
        if (!(sigma >= 0.0) || !std::isfinite(sigma)) {
            bad("sigma must be non-negative");
        }
        if (!std::isfinite(mu) || !std::isfinite(rate)) {
            bad("mu and r must be finite");
        }
        if (!(barrier > 0.0 && barrier < strike)) {
            bad("need 0 < b < K");
        }
        std::size_t prev = 0;
        for (std::size_t i = 0; i < binaries.size(); ++i) {
            const auto &b = binaries[i];
            const std::string tag = "binary " + std::to_string(i + 1);
            if (b.step < 1 || b.step + 1 > steps) {
                bad(tag + " step must be in [1, T-1]");
            }
            if (b.step <= prev) {
                bad(tag + " steps must be strictly increasing");
            }
            if (!(b.payout > 0.0)) {
                bad(tag + " payout must be positive");
            }
            if (!(b.strike > 0.0)) {
                bad(tag + " strike must be positive");
            }
            prev = b.step;
        }
        if (!problems.empty()) {
            throw ArgumentError("invalid contract: " + problems);
        }
    }
};

/// The three-step, two-binary reference contract used throughout the tests.
[[nodiscard]] inline AutocallableContract reference_contract() {
    AutocallableContract c;
    c.binaries = {{1, 1.1, 2.0}, {2, 1.1, 5.0}};
    return c;
}

} // namespace qacall::pricing
