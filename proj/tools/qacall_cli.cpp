// qacall: price autocallables with the quantum circuit or a classical oracle.
//
//   qacall price     --config run.ini [--out rows.csv] [--seed N] [--threads N] [--timing]
//   qacall sweep     --config sweep.ini ...
//   qacall resources --config resources.ini ...
//   qacall validate  --config run.ini
//
// Exit codes: 0 success, 1 invalid input, 2 capacity exceeded, 3 numerical failure.

#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "qacall/cli/config.hpp"
#include "qacall/cli/runner.hpp"

namespace {

enum Exit { kOk = 0, kValidation = 1, kCapacity = 2, kNumerical = 3 };

struct Options {
    std::string config;
    std::optional<std::string> out;
    std::optional<std::uint64_t> seed;
    unsigned threads{0};
    bool timing{false};
};

qacall::cli::RunConfig load(const Options &o) {
    auto cfg = qacall::cli::load_config(o.config);
    if (o.seed) {
        cfg.estimation.seed = *o.seed;
    }
    if (o.out) {
        cfg.output.path = *o.out;
    }
    cfg.output.timing = cfg.output.timing || o.timing;
    return cfg;
}

template <class Write> void emit(const qacall::cli::RunConfig &cfg, Write &&write) {
    if (!cfg.output.path) {
        write(std::cout);
        return;
    }
    std::ofstream file(*cfg.output.path);
    if (!file) {
        throw qacall::ArgumentError("cannot open output file '" + *cfg.output.path + "'");
    }
    write(file);
}

void price(const Options &o) {
    using namespace qacall::cli;
    const auto cfg = load(o);
    if (!cfg.estimation.method_given) {
        throw ConfigError({"[estimation] method: required by the price subcommand"});
    }
    if (cfg.estimation.method == Method::Resources) {
        emit(cfg, [&](std::ostream &out) { write_resources_csv(out, cfg); });
        return;
    }
    const auto row = price_point(cfg, single_point(cfg), resolve_threads(o.threads), cfg.output.timing);
    emit(cfg, [&](std::ostream &out) { write_price_csv(out, {row}); });
}

void sweep(const Options &o) {
    using namespace qacall::cli;
    const auto cfg = load(o);
    if (cfg.sweep.empty()) {
        throw ConfigError({"[sweep] methods: required by the sweep subcommand"});
    }
    const auto rows = run_points(cfg, sweep_points(cfg), o.threads, cfg.output.timing);
    emit(cfg, [&](std::ostream &out) { write_price_csv(out, rows); });
}

void resources(const Options &o) {
    const auto cfg = load(o);
    emit(cfg, [&](std::ostream &out) { qacall::cli::write_resources_csv(out, cfg); });
}

// Parses the config and checks that every quantum point fits the qubit budget.
void validate(const Options &o) {
    using namespace qacall::cli;
    const auto cfg = load(o);
    auto pts = sweep_points(cfg);
    if (cfg.estimation.method_given && cfg.estimation.method != Method::Resources) {
        pts.push_back(single_point(cfg));
    }
    std::size_t widest = 0;
    for (const auto &pt : pts) {
        if (pt.method != Method::QuantumExact && pt.method != Method::QuantumIqae) {
            continue;
        }
        auto grid = cfg.grid;
        grid.k = *pt.k;
        const auto model = qacall::pricing::quantize_model(cfg.contract, grid, *pt.p, cfg.int_bits);
        const auto layout = qacall::pricing::plan_layout(model);
        if (layout.total > cfg.estimation.qubit_budget) {
            throw qacall::CapacityError(std::string(to_string(pt.method)) + " k=" + std::to_string(*pt.k) +
                                        " p=" + std::to_string(*pt.p) + " needs " + layout.breakdown() +
                                        ", over the budget of " + std::to_string(cfg.estimation.qubit_budget) +
                                        " (reduce k or p)");
        }
        widest = std::max(widest, layout.total);
    }
    std::cout << "ok: " << pts.size() << " point(s)";
    if (widest > 0) {
        std::cout << ", widest circuit " << widest << " qubits";
    }
    std::cout << '\n';
}

} // namespace

int main(int argc, char **argv) {
    CLI::App app{"Autocallable pricing with quantum amplitude estimation and classical oracles"};
    app.require_subcommand(1);
    Options opts;

    auto add = [&](const std::string &name, const std::string &help, void (*run)(const Options &)) {
        auto *sub = app.add_subcommand(name, help);
        sub->add_option("-c,--config", opts.config, "INI configuration file")->required()->check(CLI::ExistingFile);
        sub->add_option("-o,--out", opts.out, "CSV output path (default stdout)");
        sub->add_option("--seed", opts.seed, "override [estimation] seed");
        sub->add_option("-j,--threads", opts.threads, "worker threads, 0 = all cores")->capture_default_str();
        sub->add_flag("--timing", opts.timing, "fill the wall_ms column");
        sub->callback([&opts, run] { run(opts); });
    };
    add("price", "price one point given by the config", price);
    add("sweep", "price every (method, k, p) point of [sweep]", sweep);
    add("resources", "T-depth report for each width in [resources] m", resources);
    add("validate", "check the config and the qubit budget without pricing", validate);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError &e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kValidation;
    } catch (const qacall::CapacityError &e) {
        std::cerr << "capacity: " << e.what() << '\n';
        return kCapacity;
    } catch (const qacall::NumericalError &e) {
        std::cerr << "numerical: " << e.what() << '\n';
        return kNumerical;
    } catch (const qacall::ArgumentError &e) {
        std::cerr << e.what() << '\n';
        return kValidation;
    } catch (const std::exception &e) {
        std::cerr << "error: " << e.what() << '\n';
        return kNumerical;
    }
    return kOk;
}
