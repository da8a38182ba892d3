#pragma once

/**
 * @file
 * Run configuration read from an INI document.
 *
 * Grammar: `[section]` headers, `key = value` lines, full-line comments
 * starting with `;` or `#`. Lists are comma separated; integer lists also
 * accept inclusive ranges `lo..hi`. Every section is optional. Contract
 * fields default to the reference contract; fields a chosen method needs
 * (grid k, precision p, paths, epsilon, ...) must be given explicitly.
 *
 *   [contract]    notional dt steps mu sigma rate barrier strike binaries
 *   [grid]        k s_min
 *   [fixed_point] p int_bits (integer or "auto")
 *   [estimation]  method epsilon alpha shots max_rounds paths seed
 *                 prep_strategy qubit_budget
 *   [sweep]       methods p k
 *   [resources]   T d j epsilon epsilon_payoff eps_approx eps_arith eps_al
 *                 L k m sigma_max mu dt V K f_max qsp_baseline rounding
 *   [output]      path timing
 *
 * `binaries` is a comma separated list of `step:strike:payout` triples.
 */

#include <algorithm>
#include <array>
#include <charconv>
#include <cstddef>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <boost/algorithm/string/split.hpp>
#include <boost/algorithm/string/trim.hpp>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "qacall/errors.hpp"
#include "qacall/estimation/iqae.hpp"
#include "qacall/loading/exponential.hpp"
#include "qacall/loading/gaussian.hpp"
#include "qacall/pricing/contract.hpp"
#include "qacall/resources/t_depth.hpp"
#include "qacall/sim/statevector.hpp"

namespace qacall::cli {

/// Config problems, one message per offending key.
class ConfigError : public ArgumentError {
  public:
    explicit ConfigError(std::vector<std::string> problems)
        : ArgumentError(join(problems)), problems_(std::move(problems)) {}

    [[nodiscard]] const std::vector<std::string> &problems() const { return problems_; }

  private:
    static std::string join(const std::vector<std::string> &items) {
        std::string out = "invalid configuration:";
        for (const auto &p : items) {
            out += "\n  " + p;
        }
        return out;
    }

    std::vector<std::string> problems_;
};

enum class Method { QuantumExact, QuantumIqae, Mc, McDisc, CfDisc, CfQuant, Resources };

inline constexpr std::array<std::pair<Method, std::string_view>, 7> kMethodNames{{
    {Method::QuantumExact, "quantum-exact"},
    {Method::QuantumIqae, "quantum-iqae"},
    {Method::Mc, "mc"},
    {Method::McDisc, "mc-disc"},
    {Method::CfDisc, "cf-disc"},
    {Method::CfQuant, "cf-quant"},
    {Method::Resources, "resources"},
}};

[[nodiscard]] inline std::string_view to_string(Method m) {
    for (const auto &[method, name] : kMethodNames) {
        if (method == m) {
            return name;
        }
    }
    return "unknown";
}

[[nodiscard]] inline bool uses_grid(Method m) {
    return m == Method::QuantumExact || m == Method::QuantumIqae || m == Method::McDisc || m == Method::CfDisc ||
           m == Method::CfQuant;
}

[[nodiscard]] inline bool uses_precision(Method m) {
    return m == Method::QuantumExact || m == Method::QuantumIqae || m == Method::CfQuant;
}

[[nodiscard]] inline bool uses_paths(Method m) { return m == Method::Mc || m == Method::McDisc; }

struct EstimationConfig {
    Method method{Method::CfQuant};
    bool method_given{false}; ///< false when [estimation] method is absent
    double epsilon{0.01};
    double alpha{0.05};
    std::uint64_t shots{100};
    std::size_t max_rounds{1000};
    std::uint64_t paths{1000000};
    std::uint64_t seed{1};
    loading::PartialStrategy prep{loading::PartialStrategy::Auto};
    std::size_t qubit_budget{sim::kDefaultQubitBudget};
};

struct SweepConfig {
    std::vector<Method> methods;
    std::vector<std::size_t> p;
    std::vector<std::size_t> k;

    [[nodiscard]] bool empty() const { return methods.empty(); }
};

struct OutputConfig {
    std::optional<std::string> path;
    bool timing{false};
};

struct RunConfig {
    pricing::AutocallableContract contract{pricing::reference_contract()};
    loading::GaussianGridSpec grid{};
    std::size_t frac_bits{2};
    std::optional<std::size_t> int_bits; ///< empty means sized automatically
    EstimationConfig estimation{};
    SweepConfig sweep{};
    resources::ResourceParams resources{};
    std::vector<std::size_t> resource_m; ///< widths to report, defaults to resources.m
    OutputConfig output{};
};

/// Levenshtein distance, used for "did you mean" hints.
[[nodiscard]] inline std::size_t edit_distance(std::string_view a, std::string_view b) {
    std::vector<std::size_t> row(b.size() + 1);
    for (std::size_t j = 0; j <= b.size(); ++j) {
        row[j] = j;
    }
    for (std::size_t i = 1; i <= a.size(); ++i) {
        std::size_t diag = row[0];
        row[0] = i;
        for (std::size_t j = 1; j <= b.size(); ++j) {
            const std::size_t up = row[j];
            row[j] = std::min({row[j] + 1, row[j - 1] + 1, diag + (a[i - 1] == b[j - 1] ? 0U : 1U)});
            diag = up;
        }
    }
    return row[b.size()];
}

/// Closest candidate within distance 2 (or a third of the word), if any.
[[nodiscard]] inline std::optional<std::string> closest(std::string_view word,
                                                        const std::vector<std::string_view> &candidates) {
    std::optional<std::string> best;
    std::size_t best_d = std::max<std::size_t>(2, word.size() / 3) + 1;
    for (auto c : candidates) {
        const std::size_t d = edit_distance(word, c);
        if (d < best_d) {
            best_d = d;
            best = std::string(c);
        }
    }
    return best;
}

namespace detail {

using boost::property_tree::ptree;

inline const std::map<std::string_view, std::vector<std::string_view>> &schema() {
    static const std::map<std::string_view, std::vector<std::string_view>> s{
        {"contract", {"notional", "dt", "steps", "mu", "sigma", "rate", "barrier", "strike", "binaries"}},
        {"grid", {"k", "s_min"}},
        {"fixed_point", {"p", "int_bits"}},
        {"estimation",
         {"method", "epsilon", "alpha", "shots", "max_rounds", "paths", "seed", "prep_strategy", "qubit_budget"}},
        {"sweep", {"methods", "p", "k"}},
        {"resources",
         {"T", "d", "j", "epsilon", "epsilon_payoff", "eps_approx", "eps_arith", "eps_al", "L", "k", "m", "sigma_max",
          "mu", "dt", "V", "K", "f_max", "qsp_baseline", "rounding"}},
        {"output", {"path", "timing"}},
    };
    return s;
}

inline std::string trim(std::string s) {
    boost::algorithm::trim(s);
    return s;
}

inline std::vector<std::string> split_list(const std::string &text, char sep = ',') {
    std::vector<std::string> parts;
    boost::algorithm::split(parts, text, [sep](char c) { return c == sep; });
    for (auto &p : parts) {
        p = trim(p);
    }
    return parts;
}

inline std::optional<double> to_double(const std::string &s) {
    double v = 0.0;
    const auto *end = s.data() + s.size();
    const auto [ptr, ec] = std::from_chars(s.data(), end, v);
    if (ec != std::errc{} || ptr != end || s.empty()) {
        return std::nullopt;
    }
    return v;
}

inline std::optional<std::uint64_t> to_uint(const std::string &s) {
    std::uint64_t v = 0;
    const auto *end = s.data() + s.size();
    const auto [ptr, ec] = std::from_chars(s.data(), end, v);
    if (ec != std::errc{} || ptr != end || s.empty()) {
        return std::nullopt;
    }
    return v;
}

inline std::optional<std::vector<std::size_t>> to_uint_list(const std::string &s) {
    std::vector<std::size_t> out;
    for (const auto &item : split_list(s)) {
        const auto dots = item.find("..");
        if (dots == std::string::npos) {
            const auto v = to_uint(item);
            if (!v) {
                return std::nullopt;
            }
            out.push_back(*v);
            continue;
        }
        const auto lo = to_uint(trim(item.substr(0, dots)));
        const auto hi = to_uint(trim(item.substr(dots + 2)));
        if (!lo || !hi || *lo > *hi || *hi - *lo > 4096) {
            return std::nullopt;
        }
        for (auto v = *lo; v <= *hi; ++v) {
            out.push_back(v);
        }
    }
    if (out.empty()) {
        return std::nullopt;
    }
    return out;
}

inline std::optional<Method> to_method(const std::string &s) {
    for (const auto &[method, name] : kMethodNames) {
        if (s == name) {
            return method;
        }
    }
    return std::nullopt;
}

inline std::vector<std::string_view> method_names() {
    std::vector<std::string_view> out;
    for (const auto &entry : kMethodNames) {
        out.push_back(entry.second);
    }
    return out;
}

/// Typed reads from one section; problems are collected, never thrown.
class Reader {
  public:
    Reader(const ptree &root, std::vector<std::string> &problems) : root_(root), problems_(problems) {}

    [[nodiscard]] std::optional<std::string> raw(const std::string &section, const std::string &key) const {
        const auto sec = root_.get_child_optional(ptree::path_type(section, '\0'));
        if (!sec) {
            return std::nullopt;
        }
        const auto v = sec->get_child_optional(ptree::path_type(key, '\0'));
        if (!v) {
            return std::nullopt;
        }
        return trim(v->data());
    }

    [[nodiscard]] bool has(const std::string &section, const std::string &key) const {
        return raw(section, key).has_value();
    }

    void number(const std::string &section, const std::string &key, double &out) const {
        if (const auto s = raw(section, key)) {
            if (const auto v = to_double(*s)) {
                out = *v;
            } else {
                bad(section, key, "expected a number, got '" + *s + "'");
            }
        }
    }

    template <class Int> void integer(const std::string &section, const std::string &key, Int &out) const {
        if (const auto s = raw(section, key)) {
            if (const auto v = to_uint(*s)) {
                out = static_cast<Int>(*v);
            } else {
                bad(section, key, "expected a non-negative integer, got '" + *s + "'");
            }
        }
    }

    void flag(const std::string &section, const std::string &key, bool &out) const {
        if (const auto s = raw(section, key)) {
            if (*s == "true" || *s == "1" || *s == "yes") {
                out = true;
            } else if (*s == "false" || *s == "0" || *s == "no") {
                out = false;
            } else {
                bad(section, key, "expected true or false, got '" + *s + "'");
            }
        }
    }

    void bad(const std::string &section, const std::string &key, const std::string &why) const {
        problems_.push_back("[" + section + "] " + key + ": " + why);
    }

  private:
    const ptree &root_;
    std::vector<std::string> &problems_;
};

inline void check_keys(const ptree &root, std::vector<std::string> &problems) {
    std::vector<std::string_view> sections;
    for (const auto &[name, keys] : schema()) {
        sections.push_back(name);
    }
    for (const auto &[section, body] : root) {
        const auto it = schema().find(section);
        if (it == schema().end()) {
            if (body.empty() && !body.data().empty()) {
                problems.push_back(section + ": key outside any section");
                continue;
            }
            std::string msg = "[" + section + "]: unknown section";
            if (const auto hint = closest(section, sections)) {
                msg += " (did you mean [" + *hint + "]?)";
            }
            problems.push_back(msg);
            continue;
        }
        for (const auto &[key, value] : body) {
            if (std::find(it->second.begin(), it->second.end(), key) != it->second.end()) {
                continue;
            }
            std::string msg = "[" + section + "] " + key + ": unknown key";
            if (const auto hint = closest(key, it->second)) {
                msg += " (did you mean '" + *hint + "'?)";
            }
            problems.push_back(msg);
        }
    }
}

inline void read_contract(const Reader &r, pricing::AutocallableContract &c, std::vector<std::string> &problems) {
    const std::string s = "contract";
    const auto before = problems.size();
    r.number(s, "notional", c.notional);
    r.number(s, "dt", c.dt);
    r.integer(s, "steps", c.steps);
    r.number(s, "mu", c.mu);
    r.number(s, "sigma", c.sigma);
    r.number(s, "rate", c.rate);
    r.number(s, "barrier", c.barrier);
    r.number(s, "strike", c.strike);
    if (const auto text = r.raw(s, "binaries")) {
        c.binaries.clear();
        if (!text->empty() && *text != "none") {
            for (const auto &item : split_list(*text)) {
                const auto f = split_list(item, ':');
                const auto step = f.size() == 3 ? to_uint(f[0]) : std::nullopt;
                const auto strike = f.size() == 3 ? to_double(f[1]) : std::nullopt;
                const auto payout = f.size() == 3 ? to_double(f[2]) : std::nullopt;
                if (!step || !strike || !payout) {
                    r.bad(s, "binaries", "expected step:strike:payout, got '" + item + "'");
                    continue;
                }
                c.binaries.push_back({static_cast<std::size_t>(*step), *strike, *payout});
            }
        }
    }
    // Field-level checks name the key; cross-field rules come from the contract itself.
    if (!(c.sigma >= 0.0)) {
        r.bad(s, "sigma", "volatility must be non-negative, got " + std::to_string(c.sigma));
    }
    if (!(c.notional > 0.0)) {
        r.bad(s, "notional", "must be positive");
    }
    if (!(c.dt > 0.0)) {
        r.bad(s, "dt", "must be positive");
    }
    if (c.steps < 1) {
        r.bad(s, "steps", "must be at least 1");
    }
    if (!(c.barrier > 0.0 && c.barrier < c.strike)) {
        r.bad(s, "barrier", "need 0 < barrier < strike");
    }
    if (before != problems.size()) {
        return;
    }
    try {
        c.validate();
    } catch (const ArgumentError &e) {
        r.bad(s, "binaries", e.what());
    }
}

inline void read_resources(const Reader &r, RunConfig &cfg) {
    const std::string s = "resources";
    auto &p = cfg.resources;
    r.integer(s, "T", p.steps);
    r.integer(s, "d", p.assets);
    r.integer(s, "j", p.binaries);
    r.number(s, "epsilon", p.epsilon);
    // Error shares follow epsilon unless given.
    p.epsilon_payoff = p.eps_approx = p.eps_arith = p.eps_al = p.epsilon;
    r.number(s, "epsilon_payoff", p.epsilon_payoff);
    r.number(s, "eps_approx", p.eps_approx);
    r.number(s, "eps_arith", p.eps_arith);
    r.number(s, "eps_al", p.eps_al);
    r.integer(s, "L", p.layers);
    r.integer(s, "k", p.k);
    if (const auto m = r.raw(s, "m")) {
        if (const auto list = to_uint_list(*m)) {
            cfg.resource_m = *list;
            p.m = list->front();
        } else {
            r.bad(s, "m", "expected an integer list or range, got '" + *m + "'");
        }
    }
    r.number(s, "sigma_max", p.sigma_max);
    r.number(s, "mu", p.mu);
    r.number(s, "dt", p.dt);
    r.number(s, "V", p.notional);
    r.number(s, "K", p.strike);
    r.number(s, "f_max", p.f_max);
    r.number(s, "qsp_baseline", p.qsp_baseline);
    if (const auto mode = r.raw(s, "rounding")) {
        if (*mode == "real") {
            p.rounding = resources::Rounding::Real;
        } else if (*mode == "ceil") {
            p.rounding = resources::Rounding::Ceil;
        } else {
            r.bad(s, "rounding", "expected real or ceil, got '" + *mode + "'");
        }
    }
    if (cfg.resource_m.empty()) {
        cfg.resource_m = {p.m};
    }
    try {
        p.validate();
    } catch (const ArgumentError &e) {
        r.bad(s, "parameters", e.what());
    }
}

} // namespace detail

/// Parses and validates a configuration; throws ConfigError listing every problem.
[[nodiscard]] inline RunConfig parse_config(const std::string &text) {
    using detail::ptree;
    ptree root;
    try {
        std::istringstream in(text);
        boost::property_tree::ini_parser::read_ini(in, root);
    } catch (const boost::property_tree::ini_parser_error &e) {
        throw ConfigError({"line " + std::to_string(e.line()) + ": " + e.message()});
    }

    std::vector<std::string> problems;
    detail::check_keys(root, problems);
    const detail::Reader r(root, problems);
    RunConfig cfg;

    detail::read_contract(r, cfg.contract, problems);

    const bool has_k = r.has("grid", "k");
    r.integer("grid", "k", cfg.grid.k);
    r.number("grid", "s_min", cfg.grid.s_min);
    const bool has_p = r.has("fixed_point", "p");
    r.integer("fixed_point", "p", cfg.frac_bits);
    if (const auto ib = r.raw("fixed_point", "int_bits"); ib && *ib != "auto") {
        if (const auto v = detail::to_uint(*ib)) {
            cfg.int_bits = static_cast<std::size_t>(*v);
        } else {
            r.bad("fixed_point", "int_bits", "expected an integer or auto, got '" + *ib + "'");
        }
    }

    auto &est = cfg.estimation;
    const std::string e = "estimation";
    if (const auto m = r.raw(e, "method")) {
        if (const auto method = detail::to_method(*m)) {
            est.method = *method;
            est.method_given = true;
        } else {
            std::string why = "unknown method '" + *m + "'";
            if (const auto hint = closest(*m, detail::method_names())) {
                why += " (did you mean '" + *hint + "'?)";
            }
            r.bad(e, "method", why);
        }
    }
    r.number(e, "epsilon", est.epsilon);
    r.number(e, "alpha", est.alpha);
    r.integer(e, "shots", est.shots);
    r.integer(e, "max_rounds", est.max_rounds);
    r.integer(e, "paths", est.paths);
    r.integer(e, "seed", est.seed);
    r.integer(e, "qubit_budget", est.qubit_budget);
    if (const auto s = r.raw(e, "prep_strategy")) {
        const std::map<std::string, loading::PartialStrategy> names{
            {"auto", loading::PartialStrategy::Auto},
            {"power-of-two", loading::PartialStrategy::PowerOfTwo},
            {"full-amplify", loading::PartialStrategy::FullAmplify},
            {"block-amplify", loading::PartialStrategy::BlockAmplify},
        };
        if (const auto it = names.find(*s); it != names.end()) {
            est.prep = it->second;
        } else {
            r.bad(e, "prep_strategy", "expected auto, power-of-two, full-amplify or block-amplify, got '" + *s + "'");
        }
    }

    if (const auto ms = r.raw("sweep", "methods")) {
        for (const auto &name : detail::split_list(*ms)) {
            if (const auto method = detail::to_method(name); method && *method != Method::Resources) {
                cfg.sweep.methods.push_back(*method);
            } else {
                r.bad("sweep", "methods", "unknown or unsweepable method '" + name + "'");
            }
        }
    }
    for (const auto *key : {"p", "k"}) {
        if (const auto text = r.raw("sweep", key)) {
            if (const auto list = detail::to_uint_list(*text)) {
                (std::string_view(key) == "p" ? cfg.sweep.p : cfg.sweep.k) = *list;
            } else {
                r.bad("sweep", key, "expected an integer list or range, got '" + *text + "'");
            }
        }
    }

    detail::read_resources(r, cfg);

    if (const auto path = r.raw("output", "path"); path && !path->empty()) {
        cfg.output.path = *path;
    }
    r.flag("output", "timing", cfg.output.timing);

    // Method-specific requirements.
    auto need = [&](bool present, const char *section, const char *key, Method m) {
        if (!present) {
            r.bad(section, key, "required by method " + std::string(to_string(m)));
        }
    };
    std::vector<Method> active = cfg.sweep.methods;
    if (est.method_given) {
        active.push_back(est.method);
    }
    for (Method m : active) {
        const bool swept = !cfg.sweep.empty();
        if (uses_grid(m)) {
            need(has_k || (swept && !cfg.sweep.k.empty()), "grid", "k", m);
        }
        if (uses_precision(m)) {
            need(has_p || (swept && !cfg.sweep.p.empty()), "fixed_point", "p", m);
        }
        if (uses_paths(m)) {
            need(r.has(e, "paths"), e.c_str(), "paths", m);
        }
        if (m == Method::QuantumIqae) {
            need(r.has(e, "epsilon"), e.c_str(), "epsilon", m);
            need(r.has(e, "alpha"), e.c_str(), "alpha", m);
        }
    }
    if (r.has("grid", "k") || r.has("grid", "s_min")) {
        try {
            cfg.grid.validate();
        } catch (const ArgumentError &ex) {
            r.bad("grid", "k", ex.what());
        }
    }
    for (auto k : cfg.sweep.k) {
        if (k < 1 || k > 24) {
            r.bad("sweep", "k", "grid size k must be in [1, 24], got " + std::to_string(k));
        }
    }
    if (std::find(active.begin(), active.end(), Method::QuantumIqae) != active.end()) {
        estimation::IqaeConfig ic;
        ic.epsilon = est.epsilon;
        ic.alpha = est.alpha;
        ic.shots_per_round = est.shots;
        ic.max_rounds = est.max_rounds;
        try {
            ic.validate();
        } catch (const ArgumentError &ex) {
            r.bad(e, "epsilon", ex.what());
        }
    }
    for (Method m : active) {
        if (uses_paths(m) && est.paths < 2) {
            r.bad(e, "paths", "need at least 2 paths");
            break;
        }
    }

    if (!problems.empty()) {
        throw ConfigError(std::move(problems));
    }
    return cfg;
}

[[nodiscard]] inline RunConfig load_config(const std::string &path) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError({"cannot open config file '" + path + "'"});
    }
    std::ostringstream text;
    text << in.rdbuf();
    return parse_config(text.str());
}

} // namespace qacall::cli
