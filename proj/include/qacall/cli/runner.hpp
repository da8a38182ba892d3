#pragma once

/**
 * @file
 * Experiment runner: prices single points or (method, k, p) sweeps and
 * writes CSV. Rows come out in a fixed order (method, k, p) whatever the
 * completion order of the worker pool, and every number is printed with
 * 17 significant digits so identical inputs give byte-identical files.
 */

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdint>
#include <cstdio>
#include <exception>
#include <optional>
#include <ostream>
#include <string>
#include <thread>
#include <tuple>
#include <vector>

#include <boost/math/distributions/normal.hpp>

#include "qacall/cli/config.hpp"
#include "qacall/estimation/grover.hpp"
#include "qacall/estimation/iqae.hpp"
#include "qacall/oracles/oracles.hpp"
#include "qacall/pricing/circuit.hpp"
#include "qacall/resources/t_depth.hpp"

namespace qacall::cli {

struct PricePoint {
    Method method{Method::CfQuant};
    std::optional<std::size_t> k;
    std::optional<std::size_t> p;

    [[nodiscard]] auto key() const { return std::tuple(static_cast<int>(method), k.value_or(0), p.value_or(0)); }
};

struct PriceRow {
    PricePoint point;
    double value{0.0};
    std::optional<double> ci_low;
    std::optional<double> ci_high;
    std::optional<double> std_error;
    std::optional<std::uint64_t> paths_or_shots;
    std::optional<std::uint64_t> oracle_calls;
    std::optional<std::uint64_t> seed;
    std::optional<double> wall_ms;
    std::optional<double> s_min;
    std::optional<std::size_t> int_bits;
    std::optional<std::size_t> qubits;
    std::optional<double> epsilon;
    std::optional<double> alpha;
};

inline constexpr const char *kPriceHeader = "method,k,p,value,ci_low,ci_high,stderr,paths_or_shots,oracle_calls,seed,"
                                            "wall_ms,s_min,int_bits,qubits,epsilon,alpha";

inline constexpr const char *kResourceHeader =
    "T,d,j,epsilon,epsilon_payoff,eps_approx,eps_arith,eps_al,L,k,m,sigma_max,mu,dt,V,K,f_max,rounding,"
    "w,r_tmin,normalization,n_iqae,d_g,d_arith,d_exp,d_al,d_tot,qsp_baseline,qsp_ratio";

namespace detail {

inline std::string cell(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline std::string cell(std::uint64_t v) { return std::to_string(v); }

template <class T> std::string cell(const std::optional<T> &v) { return v ? cell(*v) : std::string{}; }

inline std::string join(const std::vector<std::string> &cells) {
    std::string out;
    for (std::size_t i = 0; i < cells.size(); ++i) {
        out += (i == 0 ? "" : ",") + cells[i];
    }
    return out;
}

inline std::string where(const PricePoint &pt) {
    std::string s = std::string(to_string(pt.method));
    if (pt.k) {
        s += " k=" + std::to_string(*pt.k);
    }
    if (pt.p) {
        s += " p=" + std::to_string(*pt.p);
    }
    return s;
}

} // namespace detail

[[nodiscard]] inline std::string csv_row(const PriceRow &r) {
    using detail::cell;
    return detail::join({std::string(to_string(r.point.method)), cell(r.point.k), cell(r.point.p), cell(r.value),
                         cell(r.ci_low), cell(r.ci_high), cell(r.std_error), cell(r.paths_or_shots),
                         cell(r.oracle_calls), cell(r.seed), cell(r.wall_ms), cell(r.s_min), cell(r.int_bits),
                         cell(r.qubits), cell(r.epsilon), cell(r.alpha)});
}

/// One resource report row: every model input followed by the depths.
[[nodiscard]] inline std::string emit_report(const resources::ResourceParams &p, const resources::TDepthReport &rep) {
    using detail::cell;
    const auto u = [](std::size_t v) { return cell(static_cast<std::uint64_t>(v)); };
    return detail::join({u(p.steps),
                         u(p.assets),
                         u(p.binaries),
                         cell(p.epsilon),
                         cell(p.epsilon_payoff),
                         cell(p.eps_approx),
                         cell(p.eps_arith),
                         cell(p.eps_al),
                         u(p.layers),
                         u(p.k),
                         u(p.m),
                         cell(p.sigma_max),
                         cell(p.mu),
                         cell(p.dt),
                         cell(p.notional),
                         cell(p.strike),
                         cell(p.f_max),
                         p.rounding == resources::Rounding::Ceil ? "ceil" : "real",
                         cell(rep.w),
                         cell(rep.r_tmin),
                         cell(rep.normalization),
                         cell(rep.n_iqae),
                         cell(rep.d_g),
                         cell(rep.d_arith),
                         cell(rep.d_exp),
                         cell(rep.d_al),
                         cell(rep.d_tot),
                         cell(p.qsp_baseline),
                         cell(rep.qsp_ratio)});
}

/// Prices one point. Capacity errors are rethrown with the point and a remediation hint.
[[nodiscard]] inline PriceRow price_point(const RunConfig &cfg, const PricePoint &pt, unsigned threads = 1,
                                          bool timing = false) {
    const auto start = std::chrono::steady_clock::now();
    const auto &est = cfg.estimation;
    const auto &c = cfg.contract;
    loading::GaussianGridSpec grid = cfg.grid;
    if (pt.k) {
        grid.k = *pt.k;
    }
    PriceRow row;
    row.point = pt;
    if (uses_grid(pt.method)) {
        row.s_min = grid.s_min;
    }

    auto model = [&] { return pricing::quantize_model(c, grid, *pt.p, cfg.int_bits); };
    auto circuit = [&](const pricing::QuantizedModel &m) {
        pricing::BuildOptions opts;
        opts.qubit_budget = est.qubit_budget;
        opts.prep_strategy = est.prep;
        return pricing::build_pricing_circuit(m, opts);
    };
    auto mc_row = [&](const oracles::McResult &r) {
        const double z = boost::math::quantile(boost::math::normal(), 1.0 - est.alpha / 2.0);
        row.value = r.mean;
        row.std_error = r.std_error;
        row.ci_low = r.mean - z * r.std_error;
        row.ci_high = r.mean + z * r.std_error;
        row.paths_or_shots = r.paths;
        row.seed = r.seed;
        row.alpha = est.alpha;
    };

    try {
        switch (pt.method) {
        case Method::QuantumExact: {
            const auto pc = circuit(model());
            row.value = pricing::post_process(estimation::exact_amplitude(pc.circuit, pc.good, pc.layout.total),
                                              pc.mapping);
            row.int_bits = pc.model.fmt.int_bits;
            row.qubits = pc.layout.total;
            break;
        }
        case Method::QuantumIqae: {
            const auto pc = circuit(model());
            estimation::IqaeConfig ic;
            ic.epsilon = est.epsilon;
            ic.alpha = est.alpha;
            ic.shots_per_round = est.shots;
            ic.max_rounds = est.max_rounds;
            ic.seed = est.seed;
            const auto r = estimation::iqae_estimate(pc.circuit, pc.good, pc.layout.total, ic);
            if (!r.converged) {
                throw NumericalError("iqae stopped at the round cap before reaching the target width");
            }
            row.value = pricing::post_process(r.a_hat, pc.mapping);
            row.ci_low = pricing::post_process(r.ci_low, pc.mapping);
            row.ci_high = pricing::post_process(r.ci_high, pc.mapping);
            row.paths_or_shots = r.shots;
            row.oracle_calls = r.oracle_calls;
            row.seed = est.seed;
            row.int_bits = pc.model.fmt.int_bits;
            row.qubits = pc.layout.total;
            row.epsilon = est.epsilon;
            row.alpha = est.alpha;
            break;
        }
        case Method::Mc:
            mc_row(oracles::mc_price(c, est.paths, est.seed, threads));
            break;
        case Method::McDisc:
            mc_row(oracles::mc_price_discretized(c, grid, est.paths, est.seed, threads));
            break;
        case Method::CfDisc:
            row.value = oracles::closed_form_discretized(c, grid);
            break;
        case Method::CfQuant: {
            const auto m = model();
            row.value = oracles::closed_form_quantized(m);
            row.int_bits = m.fmt.int_bits;
            break;
        }
        case Method::Resources:
            throw ArgumentError("resources is reported by the resources subcommand");
        }
    } catch (const CapacityError &e) {
        throw CapacityError(detail::where(pt) + ": " + e.what() + " (reduce k or p, or raise qubit_budget up to " +
                            std::to_string(sim::kHardQubitCap) + ")");
    } catch (const NumericalError &e) {
        throw NumericalError(detail::where(pt) + ": " + e.what());
    } catch (const ArgumentError &e) {
        throw ArgumentError(detail::where(pt) + ": " + e.what());
    }
    if (timing) {
        row.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    }
    return row;
}

/// The single point described by the [grid], [fixed_point] and [estimation] sections.
[[nodiscard]] inline PricePoint single_point(const RunConfig &cfg) {
    PricePoint pt{cfg.estimation.method, std::nullopt, std::nullopt};
    if (uses_grid(pt.method)) {
        pt.k = cfg.grid.k;
    }
    if (uses_precision(pt.method)) {
        pt.p = cfg.frac_bits;
    }
    return pt;
}

/// Sweep points in output order; grid-free methods appear once.
[[nodiscard]] inline std::vector<PricePoint> sweep_points(const RunConfig &cfg) {
    const auto &sw = cfg.sweep;
    const std::vector<std::size_t> ks = sw.k.empty() ? std::vector<std::size_t>{cfg.grid.k} : sw.k;
    const std::vector<std::size_t> ps = sw.p.empty() ? std::vector<std::size_t>{cfg.frac_bits} : sw.p;
    std::vector<PricePoint> pts;
    for (Method m : sw.methods) {
        for (std::size_t k : uses_grid(m) ? ks : std::vector<std::size_t>{0}) {
            for (std::size_t p : uses_precision(m) ? ps : std::vector<std::size_t>{0}) {
                PricePoint pt{m, std::nullopt, std::nullopt};
                if (uses_grid(m)) {
                    pt.k = k;
                }
                if (uses_precision(m)) {
                    pt.p = p;
                }
                pts.push_back(pt);
            }
        }
    }
    std::sort(pts.begin(), pts.end(), [](const auto &a, const auto &b) { return a.key() < b.key(); });
    pts.erase(std::unique(pts.begin(), pts.end(), [](const auto &a, const auto &b) { return a.key() == b.key(); }),
              pts.end());
    return pts;
}

[[nodiscard]] inline unsigned resolve_threads(unsigned threads) {
    return threads == 0 ? std::max(1U, std::thread::hardware_concurrency()) : threads;
}

/**
 * Prices every point on a pool of `threads` workers (0 = hardware
 * concurrency). Each point runs single-threaded; Monte Carlo results do not
 * depend on the thread count, so the rows are the same for any pool size.
 * The first failure in output order is rethrown after all workers finish.
 */
[[nodiscard]] inline std::vector<PriceRow> run_points(const RunConfig &cfg, const std::vector<PricePoint> &pts,
                                                      unsigned threads = 0, bool timing = false) {
    std::vector<PriceRow> rows(pts.size());
    std::vector<std::exception_ptr> errors(pts.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < pts.size(); i = next++) {
            try {
                rows[i] = price_point(cfg, pts[i], 1, timing);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    const unsigned n = std::min<unsigned>(resolve_threads(threads), static_cast<unsigned>(std::max<std::size_t>(pts.size(), 1)));
    std::vector<std::thread> pool;
    for (unsigned t = 1; t < n; ++t) {
        pool.emplace_back(worker);
    }
    worker();
    for (auto &t : pool) {
        t.join();
    }
    for (const auto &e : errors) {
        if (e) {
            std::rethrow_exception(e);
        }
    }
    return rows;
}

inline void write_price_csv(std::ostream &out, const std::vector<PriceRow> &rows) {
    out << kPriceHeader << '\n';
    for (const auto &r : rows) {
        out << csv_row(r) << '\n';
    }
}

/// Resource rows, one per configured accumulator width m.
inline void write_resources_csv(std::ostream &out, const RunConfig &cfg) {
    out << kResourceHeader << '\n';
    for (std::size_t m : cfg.resource_m) {
        auto p = cfg.resources;
        p.m = m;
        out << emit_report(p, resources::d_total(p)) << '\n';
    }
}

} // namespace qacall::cli
