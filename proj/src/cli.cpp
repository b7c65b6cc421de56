#include "fc/cli.hpp"

#include <cerrno>
#include <cstdlib>
#include <iostream>
#include <sstream>

#include "fc/report.hpp"

namespace fc {

std::string usage_text() {
    return
        "usage: fc_experiment [options]\n"
        "\n"
        "Runs the 2-2-1 trainer and the selected collapsed-network variant in\n"
        "lock-step and writes the per-iteration error trace.\n"
        "\n"
        "options (defaults in brackets):\n"
        "  --variant weights|comp|state   collapsed update scheme [weights]\n"
        "  --schedule single|xor|random   training schedule [single]\n"
        "  --encoding pm1|01              XOR input/label encoding [pm1]\n"
        "  --eta <real>                   learning rate, > 0 [0.05]\n"
        "  --iters <count>                iterations, >= 1 [200]\n"
        "  --seed <int>                   RNG seed, >= 0 [42]\n"
        "  --tolerance <real>             divergence threshold, > 0 [1e-12]\n"
        "  --r-denominator squared|linear closed-form denominator reading [squared]\n"
        "  --format csv|svg|both          output files to write [both]\n"
        "  --out <prefix>                 output path prefix [fc_run]\n"
        "  --log-scale true|false         log-scale SVG error axis [true]\n"
        "  --sweep <n_seeds>              run a multi-seed property sweep instead\n"
        "  --help                         print this text\n"
        "\n"
        "exit codes: 0 ok, 2 usage error, 3 degenerate initialization, 4 I/O error\n";
}

namespace {

bool parse_double(const std::string& text, double& out) {
    errno = 0;
    char* end = nullptr;
    const double v = std::strtod(text.c_str(), &end);
    if (errno != 0 || end == text.c_str() || *end != '\0') return false;
    out = v;
    return true;
}

bool parse_long(const std::string& text, long& out) {
    errno = 0;
    char* end = nullptr;
    const long v = std::strtol(text.c_str(), &end, 10);
    if (errno != 0 || end == text.c_str() || *end != '\0') return false;
    out = v;
    return true;
}

bool parse_seed(const std::string& text, std::uint64_t& out) {
    if (text.empty() || text[0] == '-') return false;
    errno = 0;
    char* end = nullptr;
    const unsigned long long v = std::strtoull(text.c_str(), &end, 10);
    if (errno != 0 || end == text.c_str() || *end != '\0') return false;
    out = v;
    return true;
}

} // namespace

CliConfig parse_args(const std::vector<std::string>& args) {
    CliConfig cfg;
    std::vector<std::string> problems;

    const auto bad = [&](const std::string& flag, const std::string& value,
                         const std::string& why) {
        problems.push_back(flag + " " + value + ": " + why);
    };

    for (std::size_t i = 0; i < args.size(); ++i) {
        const std::string& flag = args[i];
        if (flag == "--help" || flag == "-h") {
            cfg.help = true;
            continue;
        }
        if (flag.rfind("--", 0) != 0) {
            problems.push_back(flag + ": not a flag");
            continue;
        }
        if (i + 1 >= args.size()) {
            problems.push_back(flag + ": missing value");
            continue;
        }
        const std::string value = args[++i];

        if (flag == "--variant") {
            if (value == "weights")    cfg.run.variant = FcVariant::Weights;
            else if (value == "comp")  cfg.run.variant = FcVariant::Comp;
            else if (value == "state") cfg.run.variant = FcVariant::State;
            else bad(flag, value, "expected weights|comp|state");
        } else if (flag == "--schedule") {
            if (value == "single")      cfg.run.schedule = ScheduleKind::SingleRepeated;
            else if (value == "xor")    cfg.run.schedule = ScheduleKind::XorCyclic;
            else if (value == "random") cfg.run.schedule = ScheduleKind::RandomSamples;
            else bad(flag, value, "expected single|xor|random");
        } else if (flag == "--encoding") {
            if (value == "pm1")     cfg.run.encoding = Encoding::PlusMinusOne;
            else if (value == "01") cfg.run.encoding = Encoding::ZeroOne;
            else bad(flag, value, "expected pm1|01");
        } else if (flag == "--eta") {
            double v = 0.0;
            if (!parse_double(value, v)) bad(flag, value, "not a number");
            else if (!(v > 0.0)) bad(flag, value, "eta must be > 0");
            else cfg.run.eta = v;
        } else if (flag == "--iters") {
            long v = 0;
            if (!parse_long(value, v)) bad(flag, value, "not an integer");
            else if (v < 1) bad(flag, value, "iters must be >= 1");
            else cfg.run.iters = v;
        } else if (flag == "--seed") {
            std::uint64_t v = 0;
            if (!parse_seed(value, v)) bad(flag, value, "not a non-negative integer");
            else cfg.run.seed = v;
        } else if (flag == "--tolerance") {
            double v = 0.0;
            if (!parse_double(value, v)) bad(flag, value, "not a number");
            else if (!(v > 0.0)) bad(flag, value, "tolerance must be > 0");
            else cfg.run.tolerance = v;
        } else if (flag == "--r-denominator") {
            if (value == "squared")     cfg.run.r_reading = RDenominatorReading::Squared;
            else if (value == "linear") cfg.run.r_reading = RDenominatorReading::Linear;
            else bad(flag, value, "expected squared|linear");
        } else if (flag == "--format") {
            if (value == "csv")       cfg.format = OutputFormat::Csv;
            else if (value == "svg")  cfg.format = OutputFormat::Svg;
            else if (value == "both") cfg.format = OutputFormat::Both;
            else bad(flag, value, "expected csv|svg|both");
        } else if (flag == "--out") {
            if (value.empty()) bad(flag, value, "empty path prefix");
            else cfg.out_prefix = value;
        } else if (flag == "--log-scale") {
            if (value == "true")       cfg.log_scale = true;
            else if (value == "false") cfg.log_scale = false;
            else bad(flag, value, "expected true|false");
        } else if (flag == "--sweep") {
            long v = 0;
            if (!parse_long(value, v)) bad(flag, value, "not an integer");
            else if (v < 1) bad(flag, value, "sweep seed count must be >= 1");
            else cfg.sweep_seeds = v;
        } else {
            problems.push_back(flag + ": unknown flag");
        }
    }

    if (!problems.empty()) {
        std::ostringstream msg;
        msg << "invalid arguments:\n";
        for (const std::string& p : problems) msg << "  " << p << '\n';
        msg << '\n' << usage_text();
        throw UsageError(msg.str());
    }
    return cfg;
}

namespace {

const char* reading_name(RDenominatorReading r) {
    return r == RDenominatorReading::Squared ? "squared" : "linear";
}

int run_single(const CliConfig& cfg) {
    const EquivalenceReport report = run_equivalence(cfg.run);

    std::cout << "iterations " << report.rows.size()
              << "  max |y_bp - y_fc| " << format_double(report.max_abs_err)
              << "  unsupported steps " << report.unsupported_steps << '\n';
    if (report.first_divergence_iter)
        std::cout << "first divergence past tolerance at iteration "
                  << *report.first_divergence_iter << '\n';
    else
        std::cout << "no iteration exceeded tolerance "
                  << format_double(cfg.run.tolerance) << '\n';
    if (report.selected_reading)
        std::cout << "closed-form denominator reading closest to the oracle: "
                  << reading_name(*report.selected_reading)
                  << " (squared dev " << format_double(*report.r_dev_squared)
                  << ", linear dev " << format_double(*report.r_dev_linear) << ")\n";

    if (cfg.format == OutputFormat::Csv || cfg.format == OutputFormat::Both) {
        const std::string path = cfg.out_prefix + ".csv";
        emit_csv(report, path);
        std::cout << "wrote " << path << '\n';
    }
    if (cfg.format == OutputFormat::Svg || cfg.format == OutputFormat::Both) {
        const std::string path = cfg.out_prefix + ".svg";
        emit_svg(report, path, cfg.log_scale);
        std::cout << "wrote " << path << '\n';
    }
    return kExitOk;
}

int run_sweep(const CliConfig& cfg) {
    const SweepSummary summary = property_sweep(cfg.sweep_seeds, cfg.run, Execution::Parallel);

    const auto line = [](const char* name, const InvariantStats& s, double tol) {
        std::cout << "  " << name << ": " << s.checked << " steps, " << s.violations
                  << " over " << format_double(tol) << ", worst "
                  << format_double(s.worst) << '\n';
    };
    std::cout << "sweep of " << summary.runs.size() << " seeds\n";
    line("output identity   ", summary.output_identity, kOutputIdentityTolerance);
    line("per-node identity ", summary.node_identity, kNodeIdentityTolerance);
    line("annihilation      ", summary.annihilation, kAnnihilationTolerance);
    line("state recurrence  ", summary.recurrence, kRecurrenceTolerance);
    std::cout << "  unsupported steps: " << summary.unsupported_steps << '\n';
    std::cout << "  max |y_bp - y_fc|: " << format_double(summary.max_abs_err) << '\n';
    std::cout << "  gate transitions (node1 x node2):\n";
    static constexpr const char* names[4] = {"active_active", "active_dead", "dead_dead",
                                             "dead_active"};
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j)
            if (summary.gates.counts[i][j] != 0)
                std::cout << "    " << names[i] << " / " << names[j] << ": "
                          << summary.gates.counts[i][j] << '\n';

    if (cfg.format == OutputFormat::Csv || cfg.format == OutputFormat::Both) {
        const std::string path = cfg.out_prefix + "_sweep.csv";
        emit_sweep_csv(summary, path);
        std::cout << "wrote " << path << '\n';
    }
    return kExitOk;
}

} // namespace

int run_cli(int argc, const char* const* argv) {
    std::vector<std::string> args;
    for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);

    CliConfig cfg;
    try {
        cfg = parse_args(args);
    } catch (const UsageError& ex) {
        std::cerr << ex.what();
        return kExitUsage;
    }
    if (cfg.help) {
        std::cout << usage_text();
        return kExitOk;
    }

    try {
        return cfg.sweep_seeds > 0 ? run_sweep(cfg) : run_single(cfg);
    } catch (const DegenerateInit& ex) {
        std::cerr << "degenerate initialization: " << ex.what() << '\n';
        return kExitDegenerateInit;
    } catch (const IoError& ex) {
        std::cerr << "i/o error: " << ex.what() << '\n';
        return kExitIo;
    } catch (const std::exception& ex) {
        std::cerr << "error: " << ex.what() << '\n';
        return 1;
    }
}

} // namespace fc
