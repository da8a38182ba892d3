#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "qacall/errors.hpp"

namespace qacall::loading {

/**
 * Discretized standard normal on 2^k points spanning [-s_min, +s_min]
 * (endpoints inclusive). Probabilities are pdf samples renormalized over
 * the grid, not bin integrals.
 */
struct GaussianGridSpec {
    std::size_t k{1};
    double s_min{3.0};

    [[nodiscard]] std::uint64_t points() const { return std::uint64_t{1} << k; }
    [[nodiscard]] double ds() const { return 2.0 * s_min / static_cast<double>(points() - 1); }
    /// Grid value of index g in units of sigma.
    [[nodiscard]] double value(std::uint64_t g) const { return -s_min + static_cast<double>(g) * ds(); }

    void validate() const {
        if (k < 1 || k > 24) {
            throw ArgumentError("gaussian grid: k must be in [1, 24], got " + std::to_string(k));
        }
        if (!(s_min > 0.0) || !std::isfinite(s_min)) {
            throw ArgumentError("gaussian grid: s_min must be positive");
        }
    }
};

/// Renormalized pdf samples p(g), summing to 1.
[[nodiscard]] inline std::vector<double> gaussian_probabilities(const GaussianGridSpec &spec) {
    spec.validate();
    std::vector<double> p(spec.points());
    double total = 0.0;
    for (std::uint64_t g = 0; g < p.size(); ++g) {
        const double z = spec.value(g);
        p[g] = std::exp(-0.5 * z * z);
        total += p[g];
    }
    for (auto &v : p) {
        v /= total;
    }
    return p;
}

/// sqrt(p(g)); the amplitude vector loaded per timestep.
[[nodiscard]] inline std::vector<double> gaussian_amplitudes(const GaussianGridSpec &spec) {
    auto p = gaussian_probabilities(spec);
    for (auto &v : p) {
        v = std::sqrt(v);
    }
    return p;
}

} // namespace qacall::loading
