// mptmac: analytical model and simulator runs for MPT-capable random access.
//
// Exit codes: 0 ok, 1 runtime error, 2 invalid config or arguments,
// 3 model did not converge (--strict), 4 model/simulation comparison failure.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "mptmac/harness.hpp"
#include "mptmac/simulator.hpp"

using namespace mptmac;

namespace {

constexpr int kExitRuntime = 1;
constexpr int kExitConfig = 2;
constexpr int kExitNoConvergence = 3;
constexpr int kExitComparison = 4;

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, sep)) out.push_back(item);
    return out;
}

SweepAxis parse_sweep(const std::string& arg) {
    const auto eq = arg.find('=');
    if (eq == std::string::npos || eq == 0 || eq + 1 == arg.size()) {
        throw ConfigError("--sweep expects FIELD=V1,V2,...");
    }
    SweepAxis axis;
    axis.field = arg.substr(0, eq);
    if (!is_sweep_field(axis.field)) throw ConfigError("unknown sweep field '" + axis.field + "'");
    for (const auto& v : split(arg.substr(eq + 1), ',')) {
        try {
            std::size_t used = 0;
            axis.values.push_back(std::stod(v, &used));
            if (used != v.size()) throw std::invalid_argument(v);
        } catch (const std::exception&) {
            throw ConfigError("bad sweep value '" + v + "'");
        }
    }
    return axis;
}

std::vector<std::uint64_t> parse_seeds(const std::string& arg) {
    std::vector<std::uint64_t> seeds;
    for (const auto& v : split(arg, ',')) {
        try {
            std::size_t used = 0;
            seeds.push_back(std::stoull(v, &used));
            if (used != v.size()) throw std::invalid_argument(v);
        } catch (const std::exception&) {
            throw ConfigError("bad seed '" + v + "'");
        }
    }
    return seeds;
}

void write_report(std::ostream& out, const ComparisonReport& rep) {
    out << "n_nodes,lambda_pkt_s,m_antennas,s_min,s_max,snr_db,model_throughput,sim_throughput,"
           "sim_throughput_ci95,throughput_rel_error,model_delay,sim_delay,delay_rel_error,flagged\n";
    for (const auto& p : rep.points) {
        const auto& m = p.model;
        out << m.n_nodes << ',' << m.lambda_pkt_s << ',' << m.m_antennas << ',' << m.s_min << ','
            << m.s_max << ',' << m.snr_db << ',' << m.throughput_pkt_s << ',' << p.sim_throughput << ','
            << p.sim_throughput_ci95 << ',' << p.throughput_rel_error << ',' << m.delay_s << ','
            << p.sim_delay << ',' << p.delay_rel_error << ',' << (p.flagged ? "true" : "false") << '\n';
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Analytical model and discrete-event simulator for MPT random access"};

    std::string config_path;
    std::string mode_arg;
    std::string sweep_arg;
    std::string seeds_arg;
    double sim_time_s = -1.0;
    double warmup_s = -1.0;
    std::string out_path;
    std::string format_arg = "csv";
    std::string trace_path;
    std::string report_path;
    bool strict = false;
    unsigned workers = 0;
    double tolerance = 0.07;

    app.add_option("--config", config_path, "Scenario or experiment JSON file");
    app.add_option("--mode", mode_arg, "model | sim | both")->check(CLI::IsMember({"model", "sim", "both"}));
    app.add_option("--sweep", sweep_arg, "FIELD=V1,V2,... (n_nodes, arrival_rate, m_antennas, s_min, s_max, snr_db)");
    app.add_option("--seeds", seeds_arg, "S1,S2,... simulation seeds");
    app.add_option("--sim-time-s", sim_time_s, "Simulated seconds per replication")->check(CLI::PositiveNumber);
    app.add_option("--warmup-s", warmup_s, "Excluded warm-up seconds (default 10% of the run)")
        ->check(CLI::NonNegativeNumber);
    app.add_option("--out", out_path, "Result file (default: stdout)");
    app.add_option("--format", format_arg, "csv | json")->check(CLI::IsMember({"csv", "json"}));
    app.add_option("--trace", trace_path, "Event trace of the first seed at the first point");
    app.add_option("--report", report_path, "Per-point model/simulation comparison CSV");
    app.add_flag("--strict", strict, "Fail when a model point does not converge");
    app.add_option("--workers", workers, "Simulation threads (0 = all cores)");
    app.add_option("--tolerance", tolerance, "Relative throughput tolerance for flagging points")
        ->check(CLI::NonNegativeNumber);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : kExitConfig;
    }

    std::vector<ExperimentSpec> specs;
    try {
        specs = config_path.empty() ? std::vector<ExperimentSpec>{ExperimentSpec{}} : load_experiment(config_path);
        for (auto& spec : specs) {
            if (!mode_arg.empty()) spec.mode = parse_mode(mode_arg);
            if (!sweep_arg.empty()) spec.sweep = parse_sweep(sweep_arg);
            if (!seeds_arg.empty()) spec.seeds = parse_seeds(seeds_arg);
            if (sim_time_s > 0) spec.sim_time = static_cast<Micros>(sim_time_s * 1e6);
            if (warmup_s >= 0) spec.warmup = static_cast<Micros>(warmup_s * 1e6);
            spec.workers = workers;
            if (spec.mode != RunMode::Model && spec.seeds.empty()) {
                for (std::uint64_t s = 1; s <= 10; ++s) spec.seeds.push_back(s);
            }
            spec.validate();
            if (spec.sweep) {
                for (double v : spec.sweep->values) with_field(spec.base, spec.sweep->field, v).validate();
            }
        }
        if (!trace_path.empty() && specs.front().mode == RunMode::Model) {
            throw ConfigError("--trace needs a simulation mode");
        }
        if (!report_path.empty() && specs.front().mode != RunMode::Both) {
            throw ConfigError("--report needs --mode both");
        }
    } catch (const std::exception& e) {
        std::cerr << "mptmac: " << e.what() << '\n';
        return kExitConfig;
    }

    try {
        std::vector<ResultRow> rows;
        for (const auto& spec : specs) {
            auto part = run_experiment(spec);
            rows.insert(rows.end(), part.begin(), part.end());
        }

        const OutputFormat format = parse_format(format_arg);
        if (out_path.empty()) {
            format == OutputFormat::Csv ? write_csv(std::cout, rows) : write_json(std::cout, rows);
        } else {
            write_rows(out_path, rows, format);
        }

        if (!trace_path.empty()) {
            const auto& spec = specs.front();
            const ScenarioConfig cfg =
                spec.sweep ? with_field(spec.base, spec.sweep->field, spec.sweep->values.front()) : spec.base;
            std::ofstream trace(trace_path);
            if (!trace) throw std::runtime_error("cannot write trace file: " + trace_path);
            SimOptions opts;
            opts.trace = &trace;
            run(cfg, spec.seeds.front(), spec.sim_time, spec.effective_warmup(), opts);
        }

        int rc = 0;
        if (strict) {
            for (const auto& r : rows) {
                if (r.source == "model" && !r.converged) {
                    std::cerr << "mptmac: model did not converge at n_nodes=" << r.n_nodes
                              << " lambda=" << r.lambda_pkt_s << '\n';
                    rc = kExitNoConvergence;
                }
            }
        }

        if (specs.front().mode == RunMode::Both) {
            const ComparisonReport rep = compare(rows, rows, tolerance);
            std::cerr << rep.summary() << '\n';
            if (!report_path.empty()) {
                std::ofstream out(report_path);
                if (!out) throw std::runtime_error("cannot write report file: " + report_path);
                write_report(out, rep);
            }
            if (rep.hard_failure && rc == 0) rc = kExitComparison;
        }
        return rc;
    } catch (const ConfigError& e) {
        std::cerr << "mptmac: " << e.what() << '\n';
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "mptmac: " << e.what() << '\n';
        return kExitRuntime;
    }
}
