#pragma once

/**
 * @file
 * T-depth model of the pricing algorithm.
 *
 * Block depths follow the standard building-block table (rotations by
 * gridsynth-style synthesis, log-depth comparators and adders). Logarithms
 * of non-integer arguments stay real-valued unless Rounding::Ceil is asked
 * for, which rounds every block up.
 */

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <string>

#include "qacall/errors.hpp"

namespace qacall::resources {

enum class Rounding { Real, Ceil };

/// T-depths of the basic building blocks at one width and one rotation accuracy.
struct BlockDepths {
    double ry{0.0};
    double cry{0.0};
    double rz{0.0};
    double toffoli{3.0};
    double mcx{0.0};
    double comparator{0.0};
    double c_comparator{0.0};
    double adder{0.0};
    double multiplier{0.0};
};

namespace depth {

inline double round_if(double v, Rounding mode) { return mode == Rounding::Ceil ? std::ceil(v - 1e-12) : v; }

inline void check_eps(double eps) {
    if (!(eps > 0.0 && eps < 1.0)) {
        throw ArgumentError("rotation accuracy must be in (0, 1)");
    }
}

inline double ry(double eps, Rounding mode = Rounding::Real) {
    check_eps(eps);
    return round_if(3.0 * std::log2(1.0 / eps), mode);
}
inline double cry(double eps, Rounding mode = Rounding::Real) {
    check_eps(eps);
    return round_if(6.0 * std::log2(2.0 / eps), mode);
}
inline double rz(double eps, Rounding mode = Rounding::Real) {
    check_eps(eps);
    return round_if(std::log2(1.0 / eps), mode);
}
inline double toffoli() { return 3.0; }

/// 14 log3(n/2) + 5; n is clamped to 2 where the logarithm would turn negative.
inline double mcx(double n, Rounding mode = Rounding::Real) {
    const double c = std::max(n, 2.0);
    return round_if(14.0 * std::log(c / 2.0) / std::log(3.0) + 5.0, mode);
}
inline double comparator(double n, Rounding mode = Rounding::Real) {
    return round_if((2.0 * std::log2(n) + 9.0) * 3.0, mode);
}
inline double c_comparator(double n, Rounding mode = Rounding::Real) {
    return round_if(comparator(n) + mcx(3) - 3.0, mode);
}
inline double adder(double n, Rounding mode = Rounding::Real) { return round_if((2.0 * std::log2(n) + 5.0) * 3.0, mode); }
inline double multiplier(double n, Rounding mode = Rounding::Real) { return round_if(n * (adder(n) + 6.0), mode); }

} // namespace depth

[[nodiscard]] inline BlockDepths block_depths(std::size_t n, double eps, Rounding mode = Rounding::Real) {
    if (n < 1) {
        throw ArgumentError("block width must be at least 1");
    }
    const auto w = static_cast<double>(n);
    BlockDepths b;
    b.ry = depth::ry(eps, mode);
    b.cry = depth::cry(eps, mode);
    b.rz = depth::rz(eps, mode);
    b.toffoli = depth::toffoli();
    b.mcx = depth::mcx(w, mode);
    b.comparator = depth::comparator(w, mode);
    b.c_comparator = depth::c_comparator(w, mode);
    b.adder = depth::adder(w, mode);
    b.multiplier = depth::multiplier(w, mode);
    return b;
}

/**
 * Inputs of the model. The error budget is split per source; each share is
 * an accuracy of its own (never larger than the total epsilon).
 * sigma_max is a volatility (square root of the largest covariance
 * eigenvalue per unit time).
 */
struct ResourceParams {
    std::size_t steps{20};
    std::size_t assets{3};
    std::size_t binaries{2};
    double epsilon{2e-3};          ///< amplitude estimation accuracy, N_IQAE = ceil(1/epsilon)
    double epsilon_payoff{2e-3};   ///< payoff error driving the truncation (currency)
    double eps_approx{2e-3};       ///< Gaussian loader rotations
    double eps_arith{2e-3};        ///< payoff rotations
    double eps_al{2e-3};           ///< exponential state preparation rotations
    std::size_t layers{4};         ///< L
    std::size_t k{6};
    std::size_t m{16};
    double sigma_max{0.2382};
    double mu{0.1274};
    double dt{1.0};
    double notional{18.0};
    double strike{1.0};
    double f_max{4.6155766589335955}; ///< 5 e^{-0.08}
    double qsp_baseline{2.1e3};
    Rounding rounding{Rounding::Real};

    void validate() const {
        std::string bad;
        auto need = [&bad](bool ok, const char *what) {
            if (!ok) {
                bad += (bad.empty() ? "" : ", ") + std::string(what);
            }
        };
        need(steps >= 1, "T");
        need(assets >= 1, "d");
        need(epsilon > 0.0 && epsilon < 1.0, "epsilon");
        need(epsilon_payoff > 0.0, "epsilon_payoff");
        for (double e : {eps_approx, eps_arith, eps_al}) {
            need(e > 0.0 && e < 1.0 && e <= std::max(epsilon, epsilon_payoff), "error budget share");
        }
        need(k >= 1, "k");
        need(m >= 1, "m");
        need(sigma_max > 0.0, "sigma_max");
        need(dt > 0.0, "dt");
        need(notional > 0.0, "V");
        need(strike > 0.0, "K");
        need(f_max >= 0.0, "f_max");
        need(qsp_baseline > 0.0, "qsp_baseline");
        if (!bad.empty()) {
            throw ArgumentError("invalid resource parameters: " + bad);
        }
    }
};

struct Truncation {
    double w{0.0};
    double r_tmin{0.0};
    double normalization{0.0}; ///< R(w)
    std::size_t iterations{0};
};

/// R(w) = f_max + (K - r_Tmin(w)) V with r_Tmin(w) = exp(mu dt T - w sigma_max sqrt(dt) T).
[[nodiscard]] inline double truncation_normalization(const ResourceParams &p, double w, double *r_tmin = nullptr) {
    const auto t = static_cast<double>(p.steps);
    const double r = std::exp(p.mu * p.dt * t - w * p.sigma_max * std::sqrt(p.dt) * t);
    if (r_tmin != nullptr) {
        *r_tmin = r;
    }
    return p.f_max + (p.strike - r) * p.notional;
}

/// 2 d T e^{-w^2/2} - epsilon_payoff / R(w); the truncation condition is residual <= 0.
[[nodiscard]] inline double truncation_residual(const ResourceParams &p, double w) {
    const double tails = 2.0 * static_cast<double>(p.assets * p.steps);
    return tails * std::exp(-0.5 * w * w) - p.epsilon_payoff / truncation_normalization(p, w);
}

/// Smallest w with 2 d T e^{-w^2/2} <= epsilon_payoff / R(w), by fixed-point iteration.
[[nodiscard]] inline Truncation solve_truncation(const ResourceParams &p) {
    p.validate();
    const double tails = 2.0 * static_cast<double>(p.assets * p.steps);
    auto step = [&](double w) {
        const double r = truncation_normalization(p, w);
        if (!(r > 0.0)) {
            throw NumericalError("truncation: R(w) is not positive at w = " + std::to_string(w));
        }
        const double arg = tails * r / p.epsilon_payoff;
        return arg > 1.0 ? std::sqrt(2.0 * std::log(arg)) : 0.0;
    };
    Truncation out;
    double w = step(std::sqrt(2.0 * std::log(std::max(tails * (p.f_max + p.strike * p.notional) / p.epsilon_payoff,
                                                       1.0 + 1e-12))));
    std::string trace;
    for (std::size_t i = 1; i <= 1000; ++i) {
        double next = step(w);
        if (i <= 5) {
            trace += " " + std::to_string(next);
        }
        if (std::abs(next - w) < 1e-9) {
            // Polish to machine precision; the map is a strong contraction here.
            for (int extra = 0; extra < 50 && std::abs(next - w) > 0.0; ++extra) {
                w = next;
                next = step(w);
            }
            out.w = next;
            out.iterations = i;
            out.normalization = truncation_normalization(p, next, &out.r_tmin);
            return out;
        }
        w = next;
    }
    throw NumericalError("truncation solver did not converge in 1000 iterations; first iterates:" + trace);
}

[[nodiscard]] inline double d_gaussian(const ResourceParams &p) {
    const auto count = static_cast<double>(p.k * p.steps * p.assets);
    return static_cast<double>(p.layers + 1) * depth::ry(p.eps_approx / count, p.rounding);
}

/**
 * Arithmetic part, one block per step of the algorithm: per timestep an
 * adder and a barrier comparator on m bits, per binary a comparator and the
 * exclusivity MCX over j flags, j + 2 controlled payoff rotations and one
 * MCX over the T barrier flags.
 */
[[nodiscard]] inline double d_arith(const ResourceParams &p) {
    const auto m = static_cast<double>(p.m);
    const auto t = static_cast<double>(p.steps);
    const auto j = static_cast<double>(p.binaries);
    const Rounding r = p.rounding;
    return t * (depth::adder(m, r) + depth::comparator(m, r)) + j * (depth::comparator(m, r) + depth::mcx(j, r)) +
           (j + 2.0) * depth::cry(p.eps_arith, r) + depth::mcx(t, r);
}

struct AmplitudeLoadingDepth {
    double d_al{0.0};
    double d_exp{0.0};
};

[[nodiscard]] inline AmplitudeLoadingDepth d_amplitude_loading(const ResourceParams &p) {
    const auto m = static_cast<double>(p.m);
    const Rounding r = p.rounding;
    AmplitudeLoadingDepth out;
    out.d_al = depth::c_comparator(m, r);
    out.d_exp = 3.0 * depth::ry(p.eps_al / (m + 1.0), r) + depth::mcx(m, r) + 2.0 * depth::c_comparator(m, r);
    return out;
}

struct TDepthReport {
    double w{0.0};
    double r_tmin{0.0};
    double normalization{0.0};
    std::uint64_t n_iqae{0};
    double d_g{0.0};
    double d_arith{0.0};
    double d_exp{0.0};
    double d_al{0.0};
    double d_tot{0.0};
    double qsp_ratio{0.0}; ///< qsp_baseline / D_AL

    /// (1 + 2N)(max(D_G + D_arith, D_exp) + D_AL).
    [[nodiscard]] double recompute_total() const {
        return (1.0 + 2.0 * static_cast<double>(n_iqae)) * (std::max(d_g + d_arith, d_exp) + d_al);
    }
};

[[nodiscard]] inline TDepthReport d_total(const ResourceParams &p) {
    p.validate();
    TDepthReport rep;
    const auto trunc = solve_truncation(p);
    rep.w = trunc.w;
    rep.r_tmin = trunc.r_tmin;
    rep.normalization = trunc.normalization;
    rep.n_iqae = static_cast<std::uint64_t>(std::ceil(1.0 / p.epsilon - 1e-12));
    rep.d_g = d_gaussian(p);
    rep.d_arith = d_arith(p);
    const auto al = d_amplitude_loading(p);
    rep.d_exp = al.d_exp;
    rep.d_al = al.d_al;
    rep.d_tot = rep.recompute_total();
    rep.qsp_ratio = p.qsp_baseline / rep.d_al;
    return rep;
}

} // namespace qacall::resources
