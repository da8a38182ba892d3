#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

#include <sys/wait.h>

#include <boost/algorithm/string/split.hpp>
#include <gtest/gtest.h>

#include "qacall/cli/config.hpp"
#include "qacall/cli/runner.hpp"

using namespace qacall;
using namespace qacall::cli;

namespace {

const std::string kReferenceConfig = R"(
[contract]
notional = 18
dt = 1
steps = 3
mu = 0.1274
sigma = 0.2382
rate = 0.04
barrier = 0.7
strike = 1
binaries = 1:1.1:2, 2:1.1:5

[grid]
k = 1
s_min = 3

[fixed_point]
p = 2
int_bits = auto

[estimation]
method = quantum-exact
)";

std::vector<std::string> cells(const std::string &row) {
    std::vector<std::string> out;
    boost::algorithm::split(out, row, [](char c) { return c == ','; });
    return out;
}

std::string problems_of(const std::string &text) {
    try {
        (void)parse_config(text);
    } catch (const ConfigError &e) {
        return e.what();
    }
    return {};
}

std::string price_csv(const RunConfig &cfg, const std::vector<PricePoint> &pts, unsigned threads) {
    std::ostringstream out;
    write_price_csv(out, run_points(cfg, pts, threads));
    return out.str();
}

int run_cli(const std::string &args, const std::string &config) {
    const std::string path = ::testing::TempDir() + "qacall_cli_test.ini";
    std::ofstream(path) << config;
    const std::string cmd = std::string(QACALL_CLI_PATH) + " " + args + " --config " + path + " > /dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

} // namespace

TEST(ParseConfig, ReferenceContractVerbatim) {
    const auto cfg = parse_config(kReferenceConfig);
    const auto ref = pricing::reference_contract();
    EXPECT_EQ(cfg.contract.notional, ref.notional);
    EXPECT_EQ(cfg.contract.sigma, ref.sigma);
    EXPECT_EQ(cfg.contract.mu, ref.mu);
    ASSERT_EQ(cfg.contract.binaries.size(), 2U);
    EXPECT_EQ(cfg.contract.binaries[1].step, 2U);
    EXPECT_EQ(cfg.contract.binaries[1].payout, 5.0);
    EXPECT_EQ(cfg.estimation.method, Method::QuantumExact);
    EXPECT_EQ(cfg.frac_bits, 2U);
    EXPECT_FALSE(cfg.int_bits.has_value());
}

TEST(ParseConfig, NegativeVolatilityNamesTheField) {
    const auto msg = problems_of("[contract]\nsigma = -0.2\n");
    EXPECT_NE(msg.find("[contract] sigma"), std::string::npos) << msg;
}

TEST(ParseConfig, UnknownKeyGetsSuggestion) {
    const auto msg = problems_of("[contract]\nvoltility = 0.2\n");
    EXPECT_NE(msg.find("voltility: unknown key"), std::string::npos) << msg;
    EXPECT_NE(problems_of("[contract]\nvolatility = 0.2\n").find("unknown key"), std::string::npos);
    EXPECT_NE(problems_of("[estimation]\nmethod = cf-quant\nsed = 3\n").find("did you mean 'seed'"),
              std::string::npos);
    EXPECT_NE(problems_of("[grd]\nk = 1\n").find("did you mean [grid]"), std::string::npos);
}

TEST(ParseConfig, ErrorsAreAggregated) {
    try {
        (void)parse_config("[contract]\nsigma = abc\nnotional = -1\n[estimation]\nmethod = mc\nsheds = 3\n");
        FAIL() << "expected ConfigError";
    } catch (const ConfigError &e) {
        const std::string msg = e.what();
        EXPECT_NE(msg.find("sigma"), std::string::npos);
        EXPECT_NE(msg.find("notional"), std::string::npos);
        EXPECT_NE(msg.find("sheds"), std::string::npos);
        EXPECT_NE(msg.find("paths: required by method mc"), std::string::npos);
        EXPECT_GE(e.problems().size(), 4U);
    }
}

TEST(ParseConfig, MethodRequirements) {
    EXPECT_NE(problems_of("[estimation]\nmethod = cf-quant\n").find("[grid] k"), std::string::npos);
    EXPECT_NE(problems_of("[estimation]\nmethod = cf-quant\n").find("[fixed_point] p"), std::string::npos);
    EXPECT_NE(problems_of("[grid]\nk=1\n[fixed_point]\np=2\n[estimation]\nmethod = quantum-iqae\n").find("epsilon"),
              std::string::npos);
    EXPECT_NO_THROW((void)parse_config("[estimation]\nmethod = mc\npaths = 100\n"));
    EXPECT_NO_THROW((void)parse_config("[resources]\nm = 4..8\n"));
    EXPECT_NE(problems_of("[estimation]\nmethod = cf-qunat\n").find("did you mean 'cf-quant'"), std::string::npos);
}

TEST(ParseConfig, ListsAndRanges) {
    const auto cfg = parse_config("[sweep]\nmethods = cf-quant, cf-disc\np = 2..4, 6\nk = 1\n");
    EXPECT_EQ(cfg.sweep.p, (std::vector<std::size_t>{2, 3, 4, 6}));
    EXPECT_EQ(cfg.sweep.k, (std::vector<std::size_t>{1}));
    EXPECT_NE(problems_of("[sweep]\nmethods = cf-quant\np = 4..2\nk = 1\n").find("[sweep] p"), std::string::npos);
    EXPECT_NE(problems_of("[contract]\nbinaries = 1:1.1\n").find("step:strike:payout"), std::string::npos);
}

TEST(Run, ClosedFormRowMatchesCircuitRow) {
    auto cfg = parse_config(kReferenceConfig);
    const auto exact = price_point(cfg, {Method::QuantumExact, 1, 2});
    const auto cf = price_point(cfg, {Method::CfQuant, 1, 2});
    EXPECT_NEAR(exact.value, cf.value, 1e-9);
    EXPECT_EQ(exact.qubits.value_or(0), 20U);
    const auto c = cells(csv_row(cf));
    ASSERT_EQ(c.size(), cells(kPriceHeader).size());
    EXPECT_EQ(c[0], "cf-quant");
    EXPECT_EQ(c[1], "1");
    EXPECT_EQ(c[2], "2");
    EXPECT_EQ(c[4], "");
    EXPECT_EQ(c[10], "");
}

TEST(Run, SweepIsDeterministicAndSorted) {
    auto cfg = parse_config("[estimation]\npaths = 20000\nseed = 5\n[sweep]\nmethods = cf-quant, mc-disc, cf-disc, mc\n"
                            "p = 3, 2\nk = 2, 1\n");
    const auto pts = sweep_points(cfg);
    ASSERT_EQ(pts.size(), 1U + 2U + 2U + 4U);
    EXPECT_EQ(pts.front().method, Method::Mc);
    EXPECT_EQ(pts.back().method, Method::CfQuant);
    EXPECT_EQ(pts.back().k.value_or(0), 2U);
    EXPECT_EQ(pts.back().p.value_or(0), 3U);
    const auto one = price_csv(cfg, pts, 1);
    EXPECT_EQ(one, price_csv(cfg, pts, 4));
    EXPECT_EQ(one, price_csv(cfg, pts, 1));
}

TEST(Run, CapacityErrorCarriesHint) {
    auto cfg = parse_config(kReferenceConfig);
    cfg.estimation.qubit_budget = 16;
    try {
        (void)price_point(cfg, {Method::QuantumExact, 1, 2});
        FAIL() << "expected CapacityError";
    } catch (const CapacityError &e) {
        EXPECT_NE(std::string(e.what()).find("reduce k or p"), std::string::npos);
    }
}

TEST(EmitReport, StableAndSelfConsistent) {
    resources::ResourceParams p;
    const auto rep = resources::d_total(p);
    const auto row = emit_report(p, rep);
    EXPECT_EQ(row, emit_report(p, resources::d_total(p)));
    const auto head = cells(kResourceHeader);
    const auto c = cells(row);
    ASSERT_EQ(c.size(), head.size());
    auto col = [&](const std::string &name) {
        const auto it = std::find(head.begin(), head.end(), name);
        return std::stod(c[static_cast<std::size_t>(it - head.begin())]);
    };
    const double total =
        (1.0 + 2.0 * col("n_iqae")) * (std::max(col("d_g") + col("d_arith"), col("d_exp")) + col("d_al"));
    EXPECT_EQ(total, col("d_tot"));
    EXPECT_EQ(col("qsp_ratio"), col("qsp_baseline") / col("d_al"));
}

TEST(Cli, ExitCodes) {
    EXPECT_EQ(run_cli("price", kReferenceConfig), 0);
    EXPECT_EQ(run_cli("validate", kReferenceConfig), 0);
    EXPECT_EQ(run_cli("price", "[contract]\nvoltility = 1\n"), 1);
    EXPECT_EQ(run_cli("validate", "[grid]\nk = 3\n[fixed_point]\np = 6\n[estimation]\nmethod = quantum-exact\n"), 2);
    EXPECT_EQ(run_cli("price", "[grid]\nk = 1\n[fixed_point]\np = 2\n[estimation]\nmethod = quantum-iqae\n"
                               "epsilon = 0.001\nalpha = 0.05\nmax_rounds = 1\n"),
              3);
    EXPECT_EQ(run_cli("resources", "[resources]\nm = 4..6\n"), 0);
}
