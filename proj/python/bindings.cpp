#include <sstream>

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "mptmac/channel.hpp"
#include "mptmac/config.hpp"
#include "mptmac/errors.hpp"
#include "mptmac/fixed_point.hpp"
#include "mptmac/harness.hpp"
#include "mptmac/retx.hpp"
#include "mptmac/simulator.hpp"
#include "mptmac/timing.hpp"

namespace py = pybind11;
using namespace mptmac;

namespace {

// Configs cross the boundary as plain dicts with the JSON field names.
ScenarioConfig to_config(const py::dict& d) {
    const auto text = py::module_::import("json").attr("dumps")(d).cast<std::string>();
    ScenarioConfig cfg = config_from_json(nlohmann::json::parse(text));
    cfg.validate();
    return cfg;
}

py::dict to_dict(const ScenarioConfig& cfg) {
    return py::module_::import("json").attr("loads")(config_to_json(cfg).dump()).cast<py::dict>();
}

py::dict metrics_dict(const QueueMetrics& m) {
    py::dict d;
    d["throughput"] = m.throughput;
    d["delay"] = m.delay;
    d["blocking"] = m.blocking;
    d["mean_queue"] = m.mean_queue;
    d["rho"] = m.rho;
    return d;
}

py::dict solution_dict(const ModelSolution& s) {
    py::dict d;
    d["config"] = to_dict(s.config);
    d["converged"] = s.converged;
    d["iterations"] = s.iterations;
    d["residual"] = s.residual;
    d["tau"] = s.contention.tau;
    d["p"] = s.contention.p;
    d["rho"] = s.contention.rho;
    d["gamma_us"] = s.contention.gamma;
    d["service_time_us"] = s.service.ex;
    d["mean_service_time_us"] = s.service.ex_mean;
    d["upsilon_cf"] = s.upsilon_cf;
    d["psi"] = s.steady.psi;
    d["pi_d"] = s.chain.pi_d;
    d["pi_s"] = s.steady.pi_s;
    d["metrics"] = metrics_dict(s.metrics());
    return d;
}

py::dict stats_dict(const SimStats& s) {
    py::dict d;
    d["throughput"] = s.throughput();
    d["delay"] = s.delay();
    d["blocking_prob"] = s.blocking_prob();
    d["collision_prob"] = s.collision_prob();
    d["rho"] = s.rho();
    d["mean_service_time_us"] = s.mean_service_time();
    d["mean_queue"] = s.mean_queue();
    d["total_arrivals"] = s.total_arrivals;
    d["blocked_arrivals"] = s.blocked_arrivals;
    d["delivered_packets"] = s.delivered_packets;
    d["tx_attempts"] = s.tx_attempts;
    d["collided_attempts"] = s.collided_attempts;
    d["batches"] = s.batches;
    return d;
}

py::dict aggregate_dict(const Aggregate& a) {
    py::dict d;
    d["mean"] = a.mean;
    d["stddev"] = a.stddev;
    d["ci95_halfwidth"] = a.ci95_halfwidth;
    return d;
}

SimOptions sim_options(const std::optional<std::vector<double>>& per_override) {
    SimOptions o;
    if (per_override) o.per_override = PerTable::from_values(*per_override);
    return o;
}

Micros to_us(double seconds) { return static_cast<Micros>(seconds * 1e6); }

}  // namespace

PYBIND11_MODULE(_mptmac, m) {
    m.doc() = "Model and simulator for multi-packet transmission random access";

    py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
    py::register_exception<ModelError>(m, "ModelError", PyExc_RuntimeError);

    m.def("default_config", [] { return to_dict(ScenarioConfig{}); });
    m.def("validate_config", [](const py::dict& d) { return to_dict(to_config(d)); }, py::arg("config"),
          "Fill defaults and check ranges; raises ConfigError.");

    m.def("per", &per, py::arg("m"), py::arg("m_antennas"), py::arg("snr_linear"), py::arg("snr_ref_linear"));
    m.def("per_table", [](const py::dict& d) { return PerTable(to_config(d)).values(); }, py::arg("config"));
    m.def("snr_db_to_linear", &snr_db_to_linear);

    m.def(
        "timing",
        [](const py::dict& d) {
            const ScenarioConfig cfg = to_config(d);
            const TimingTable t(cfg);
            py::dict out;
            std::vector<Micros> data;
            std::vector<Micros> cf;
            for (int k = 1; k <= t.m_antennas(); ++k) {
                data.push_back(t.data(k));
                cf.push_back(t.cf(k));
            }
            out["t_data"] = data;
            out["t_cf"] = cf;
            out["t_c"] = cf;
            out["t_ack"] = t.ack();
            out["ack_timeout"] = t.ack_timeout();
            return out;
        },
        py::arg("config"), "Frame durations in microseconds, indexed by batch size - 1.");

    m.def("expected_cf_attempts",
          [](int s, const std::vector<double>& per) { return expected_cf_attempts(s, PerTable::from_values(per)); },
          py::arg("s"), py::arg("per"));
    m.def("attempt_size_distribution",
          [](int s, const std::vector<double>& per) {
              return attempt_size_distribution(s, PerTable::from_values(per));
          },
          py::arg("s"), py::arg("per"));

    m.def(
        "solve",
        [](const py::dict& d, double tolerance, int max_iters, double damping, double initial_rho) {
            const ScenarioConfig cfg = to_config(d);
            SolveOptions o{tolerance, max_iters, damping, initial_rho};
            ModelSolution s = [&] {
                py::gil_scoped_release release;
                return solve(cfg, o);
            }();
            return solution_dict(s);
        },
        py::arg("config"), py::arg("tolerance") = 1e-6, py::arg("max_iters") = 10000, py::arg("damping") = 0.5,
        py::arg("initial_rho") = 1.0);

    m.def(
        "sweep",
        [](const py::dict& d, const std::string& field, const std::vector<double>& values) {
            const ScenarioConfig cfg = to_config(d);
            std::vector<SweepPoint> pts;
            {
                py::gil_scoped_release release;
                pts = sweep(cfg, {field, values});
            }
            py::list out;
            for (const auto& p : pts) {
                py::dict row;
                row["value"] = p.value;
                row["solution"] = p.solution ? py::object(solution_dict(*p.solution)) : py::none();
                row["error"] = p.error;
                out.append(row);
            }
            return out;
        },
        py::arg("config"), py::arg("field"), py::arg("values"));

    m.def(
        "simulate",
        [](const py::dict& d, std::uint64_t seed, double sim_time_s, std::optional<double> warmup_s,
           std::optional<std::vector<double>> per_override, bool trace) {
            const ScenarioConfig cfg = to_config(d);
            const Micros total = to_us(sim_time_s);
            const Micros warm = warmup_s ? to_us(*warmup_s) : total / 10;
            SimOptions o = sim_options(per_override);
            std::ostringstream os;
            if (trace) o.trace = &os;
            SimStats st;
            {
                py::gil_scoped_release release;
                st = run(cfg, seed, total, warm, o);
            }
            py::dict out = stats_dict(st);
            if (trace) out["trace"] = os.str();
            return out;
        },
        py::arg("config"), py::arg("seed"), py::arg("sim_time_s"), py::arg("warmup_s") = py::none(),
        py::arg("per_override") = py::none(), py::arg("trace") = false);

    m.def(
        "replicate",
        [](const py::dict& d, const std::vector<std::uint64_t>& seeds, double sim_time_s,
           std::optional<double> warmup_s, std::optional<std::vector<double>> per_override, unsigned workers) {
            const ScenarioConfig cfg = to_config(d);
            const Micros total = to_us(sim_time_s);
            const Micros warm = warmup_s ? to_us(*warmup_s) : total / 10;
            ReplicationSummary rs;
            {
                py::gil_scoped_release release;
                rs = replicate(cfg, seeds, total, warm, sim_options(per_override), workers);
            }
            py::dict out;
            out["throughput"] = aggregate_dict(rs.throughput);
            out["delay"] = aggregate_dict(rs.delay);
            out["blocking_prob"] = aggregate_dict(rs.blocking_prob);
            out["collision_prob"] = aggregate_dict(rs.collision_prob);
            out["rho"] = aggregate_dict(rs.rho);
            out["service_time"] = aggregate_dict(rs.service_time);
            py::list runs;
            for (const auto& r : rs.runs) runs.append(stats_dict(r));
            out["runs"] = runs;
            return out;
        },
        py::arg("config"), py::arg("seeds"), py::arg("sim_time_s"), py::arg("warmup_s") = py::none(),
        py::arg("per_override") = py::none(), py::arg("workers") = 0);

    m.def(
        "run_experiment_csv",
        [](const std::string& path) {
            const auto specs = load_experiment(path);
            std::vector<ResultRow> rows;
            {
                py::gil_scoped_release release;
                for (const auto& spec : specs) {
                    auto part = run_experiment(spec);
                    rows.insert(rows.end(), part.begin(), part.end());
                }
            }
            std::ostringstream os;
            write_csv(os, rows);
            return os.str();
        },
        py::arg("path"), "Runs an experiment file and returns the result table as CSV text.");
}
