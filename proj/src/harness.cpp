#include "mptmac/harness.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>
#include <stdexcept>
#include <tuple>

#include <json.hpp>

#include "mptmac/parallel.hpp"
#include "mptmac/simulator.hpp"

namespace mptmac {

const char* const kCsvHeader =
    "n_nodes,lambda_pkt_s,m_antennas,s_min,s_max,snr_db,source,replication,throughput_pkt_s,"
    "delay_s,blocking_prob,collision_prob,rho,converged,iterations";

RunMode parse_mode(const std::string& s) {
    if (s == "model") return RunMode::Model;
    if (s == "sim") return RunMode::Sim;
    if (s == "both") return RunMode::Both;
    throw std::invalid_argument("unknown mode '" + s + "'");
}

OutputFormat parse_format(const std::string& s) {
    if (s == "csv") return OutputFormat::Csv;
    if (s == "json") return OutputFormat::Json;
    throw std::invalid_argument("unknown format '" + s + "'");
}

void ExperimentSpec::validate() const {
    base.validate();
    if (mode != RunMode::Model && seeds.empty()) {
        throw std::invalid_argument("simulation modes need at least one seed");
    }
    if (sim_time <= 0 || effective_warmup() < 0 || effective_warmup() >= sim_time) {
        throw std::invalid_argument("simulation window requires 0 <= warmup < sim_time");
    }
    if (sweep && !is_sweep_field(sweep->field)) {
        throw std::invalid_argument("unknown sweep field '" + sweep->field + "'");
    }
}

namespace {

Micros seconds_to_us(double s, const char* what) {
    if (!(s >= 0.0) || !std::isfinite(s)) throw ConfigError(std::string("invalid experiment: bad ") + what);
    return static_cast<Micros>(std::llround(s * 1e6));
}

}  // namespace

std::vector<ExperimentSpec> experiment_from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw ConfigError("invalid experiment: expected a JSON object");
    if (!j.contains("scenario")) {
        ExperimentSpec spec;
        spec.base = config_from_json(j);
        return {spec};
    }
    static const char* const known[] = {"scenario", "variants", "sweep", "mode",
                                        "seeds", "sim_time_s", "warmup_s"};
    for (const auto& [key, _] : j.items()) {
        if (std::find(std::begin(known), std::end(known), key) == std::end(known)) {
            throw ConfigError("invalid experiment: unknown field '" + key + "'");
        }
    }
    ExperimentSpec proto;
    try {
        if (j.contains("sweep")) {
            const auto& sw = j.at("sweep");
            proto.sweep = SweepAxis{sw.at("field").get<std::string>(), sw.at("values").get<std::vector<double>>()};
        }
        if (j.contains("mode")) proto.mode = parse_mode(j.at("mode").get<std::string>());
        if (j.contains("seeds")) proto.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
        if (j.contains("sim_time_s")) proto.sim_time = seconds_to_us(j.at("sim_time_s").get<double>(), "sim_time_s");
        if (j.contains("warmup_s")) proto.warmup = seconds_to_us(j.at("warmup_s").get<double>(), "warmup_s");
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception& e) {
        throw ConfigError(std::string("invalid experiment: ") + e.what());
    }

    const nlohmann::json& scenario = j.at("scenario");
    if (!scenario.is_object()) throw ConfigError("invalid experiment: scenario must be an object");
    std::vector<nlohmann::json> variants;
    if (j.contains("variants")) {
        for (const auto& v : j.at("variants")) {
            if (!v.is_object()) throw ConfigError("invalid experiment: variants must be objects");
            nlohmann::json merged = scenario;
            merged.update(v);
            variants.push_back(merged);
        }
    } else {
        variants.push_back(scenario);
    }

    std::vector<ExperimentSpec> specs;
    for (const auto& v : variants) {
        ExperimentSpec spec = proto;
        spec.base = config_from_json(v);
        specs.push_back(std::move(spec));
    }
    return specs;
}

std::vector<ExperimentSpec> load_experiment(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const std::exception& e) {
        throw ConfigError("cannot parse config file " + path + ": " + e.what());
    }
    return experiment_from_json(j);
}

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

ResultRow key_row(const ScenarioConfig& cfg, const std::string& source, int replication) {
    ResultRow r;
    r.n_nodes = cfg.n_nodes;
    r.lambda_pkt_s = cfg.arrival_rate;
    r.m_antennas = cfg.m_antennas;
    r.s_min = cfg.s_min;
    r.s_max = cfg.s_max;
    r.snr_db = cfg.snr_db;
    r.source = source;
    r.replication = replication;
    return r;
}

ResultRow model_row(const ScenarioConfig& cfg, const SolveOptions& opts) {
    ResultRow r = key_row(cfg, "model", -1);
    try {
        const ModelSolution sol = solve(cfg, opts);
        const QueueMetrics& m = sol.metrics();
        r.throughput_pkt_s = m.throughput;
        r.delay_s = m.delay;
        r.blocking_prob = m.blocking;
        r.collision_prob = sol.contention.p;
        r.rho = m.rho;
        r.converged = sol.converged;
        r.iterations = sol.iterations;
    } catch (const std::exception&) {
        r.throughput_pkt_s = r.delay_s = r.blocking_prob = r.collision_prob = r.rho = kNaN;
        r.converged = false;
    }
    return r;
}

ResultRow sim_row(const ScenarioConfig& cfg, int replication, const SimStats& s) {
    ResultRow r = key_row(cfg, "sim", replication);
    r.throughput_pkt_s = s.throughput();
    r.delay_s = s.delay();
    r.blocking_prob = s.blocking_prob();
    r.collision_prob = s.collision_prob();
    r.rho = s.rho();
    return r;
}

ResultRow sim_mean_row(const ScenarioConfig& cfg, const std::vector<ResultRow>& reps) {
    ResultRow r = key_row(cfg, "sim_mean", -1);
    const auto n = static_cast<double>(reps.size());
    r.throughput_pkt_s = r.delay_s = r.blocking_prob = r.collision_prob = r.rho = 0.0;
    for (const auto& x : reps) {
        r.throughput_pkt_s += x.throughput_pkt_s / n;
        r.delay_s += x.delay_s / n;
        r.blocking_prob += x.blocking_prob / n;
        r.collision_prob += x.collision_prob / n;
        r.rho += x.rho / n;
    }
    return r;
}

}  // namespace

std::vector<ResultRow> run_experiment(const ExperimentSpec& spec) {
    spec.validate();
    std::vector<ScenarioConfig> points;
    if (spec.sweep) {
        for (double v : spec.sweep->values) points.push_back(with_field(spec.base, spec.sweep->field, v));
    } else {
        points.push_back(spec.base);
    }

    const bool want_model = spec.mode != RunMode::Sim;
    const bool want_sim = spec.mode != RunMode::Model;

    std::vector<ResultRow> models(points.size());
    if (want_model) {
        for (std::size_t i = 0; i < points.size(); ++i) models[i] = model_row(points[i], spec.solve);
    }

    // Flat job list: point-major, seed-minor.
    const std::size_t n_seeds = spec.seeds.size();
    std::vector<ResultRow> sims(want_sim ? points.size() * n_seeds : 0);
    if (want_sim) {
        for (const auto& cfg : points) cfg.validate();
        parallel_for(sims.size(), spec.workers, [&](std::size_t job) {
            const std::size_t p = job / n_seeds;
            const std::size_t k = job % n_seeds;
            const SimStats stats =
                run(points[p], spec.seeds[k], spec.sim_time, spec.effective_warmup());
            sims[job] = sim_row(points[p], static_cast<int>(k), stats);
        });
    }

    std::vector<ResultRow> rows;
    for (std::size_t p = 0; p < points.size(); ++p) {
        if (want_model) rows.push_back(models[p]);
        if (want_sim) {
            const auto first = sims.begin() + static_cast<std::ptrdiff_t>(p * n_seeds);
            std::vector<ResultRow> reps(first, first + static_cast<std::ptrdiff_t>(n_seeds));
            rows.insert(rows.end(), reps.begin(), reps.end());
            rows.push_back(sim_mean_row(points[p], reps));
        }
    }
    return rows;
}

namespace {

std::string fmt_double(double v) {
    if (std::isnan(v)) return "nan";
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return {buf, res.ptr};
}

double parse_double(const std::string& s) {
    if (s == "nan") return kNaN;
    double v = 0.0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
        throw std::invalid_argument("bad number '" + s + "'");
    }
    return v;
}

int parse_int(const std::string& s) {
    int v = 0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
        throw std::invalid_argument("bad integer '" + s + "'");
    }
    return v;
}

nlohmann::ordered_json number_or_null(double v) {
    if (std::isnan(v)) return nullptr;
    return v;
}

double from_json_number(const nlohmann::json& j) { return j.is_null() ? kNaN : j.get<double>(); }

}  // namespace

void write_csv(std::ostream& out, const std::vector<ResultRow>& rows) {
    out << kCsvHeader << '\n';
    for (const auto& r : rows) {
        out << r.n_nodes << ',' << fmt_double(r.lambda_pkt_s) << ',' << r.m_antennas << ','
            << r.s_min << ',' << r.s_max << ',' << fmt_double(r.snr_db) << ',' << r.source << ','
            << r.replication << ',' << fmt_double(r.throughput_pkt_s) << ','
            << fmt_double(r.delay_s) << ',' << fmt_double(r.blocking_prob) << ','
            << fmt_double(r.collision_prob) << ',' << fmt_double(r.rho) << ','
            << (r.converged ? "true" : "false") << ',' << r.iterations << '\n';
    }
}

void write_json(std::ostream& out, const std::vector<ResultRow>& rows) {
    // ordered_json keeps the CSV column order.
    nlohmann::ordered_json arr = nlohmann::ordered_json::array();
    for (const auto& r : rows) {
        nlohmann::ordered_json o;
        o["n_nodes"] = r.n_nodes;
        o["lambda_pkt_s"] = r.lambda_pkt_s;
        o["m_antennas"] = r.m_antennas;
        o["s_min"] = r.s_min;
        o["s_max"] = r.s_max;
        o["snr_db"] = r.snr_db;
        o["source"] = r.source;
        o["replication"] = r.replication;
        o["throughput_pkt_s"] = number_or_null(r.throughput_pkt_s);
        o["delay_s"] = number_or_null(r.delay_s);
        o["blocking_prob"] = number_or_null(r.blocking_prob);
        o["collision_prob"] = number_or_null(r.collision_prob);
        o["rho"] = number_or_null(r.rho);
        o["converged"] = r.converged;
        o["iterations"] = r.iterations;
        arr.push_back(std::move(o));
    }
    out << arr.dump(2) << '\n';
}

void write_rows(const std::string& path, const std::vector<ResultRow>& rows, OutputFormat format) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write output file: " + path);
    if (format == OutputFormat::Csv) {
        write_csv(out, rows);
    } else {
        write_json(out, rows);
    }
    if (!out) throw std::runtime_error("error writing output file: " + path);
}

std::vector<ResultRow> read_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line) || line != kCsvHeader) {
        throw std::invalid_argument("CSV header does not match the result schema");
    }
    std::vector<ResultRow> rows;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<std::string> f;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) f.push_back(cell);
        if (f.size() != 15) throw std::invalid_argument("CSV row with " + std::to_string(f.size()) + " fields");
        ResultRow r;
        r.n_nodes = parse_int(f[0]);
        r.lambda_pkt_s = parse_double(f[1]);
        r.m_antennas = parse_int(f[2]);
        r.s_min = parse_int(f[3]);
        r.s_max = parse_int(f[4]);
        r.snr_db = parse_double(f[5]);
        r.source = f[6];
        r.replication = parse_int(f[7]);
        r.throughput_pkt_s = parse_double(f[8]);
        r.delay_s = parse_double(f[9]);
        r.blocking_prob = parse_double(f[10]);
        r.collision_prob = parse_double(f[11]);
        r.rho = parse_double(f[12]);
        r.converged = f[13] == "true";
        r.iterations = parse_int(f[14]);
        rows.push_back(std::move(r));
    }
    return rows;
}

std::vector<ResultRow> read_json(std::istream& in) {
    const nlohmann::json arr = nlohmann::json::parse(in);
    std::vector<ResultRow> rows;
    for (const auto& o : arr) {
        ResultRow r;
        r.n_nodes = o.at("n_nodes").get<int>();
        r.lambda_pkt_s = o.at("lambda_pkt_s").get<double>();
        r.m_antennas = o.at("m_antennas").get<int>();
        r.s_min = o.at("s_min").get<int>();
        r.s_max = o.at("s_max").get<int>();
        r.snr_db = o.at("snr_db").get<double>();
        r.source = o.at("source").get<std::string>();
        r.replication = o.at("replication").get<int>();
        r.throughput_pkt_s = from_json_number(o.at("throughput_pkt_s"));
        r.delay_s = from_json_number(o.at("delay_s"));
        r.blocking_prob = from_json_number(o.at("blocking_prob"));
        r.collision_prob = from_json_number(o.at("collision_prob"));
        r.rho = from_json_number(o.at("rho"));
        r.converged = o.at("converged").get<bool>();
        r.iterations = o.at("iterations").get<int>();
        rows.push_back(std::move(r));
    }
    return rows;
}

namespace {

using Key = std::tuple<int, double, int, int, int, double>;

Key key_of(const ResultRow& r) {
    return {r.n_nodes, r.lambda_pkt_s, r.m_antennas, r.s_min, r.s_max, r.snr_db};
}

}  // namespace

ComparisonReport compare(const std::vector<ResultRow>& model_rows,
                         const std::vector<ResultRow>& sim_rows, double tolerance,
                         double hard_threshold) {
    std::map<Key, std::vector<const ResultRow*>> sims;
    for (const auto& r : sim_rows) {
        if (r.source == "sim") sims[key_of(r)].push_back(&r);
    }
    std::vector<const ResultRow*> models;
    for (const auto& r : model_rows) {
        if (r.source == "model") models.push_back(&r);
    }
    if (models.size() != sims.size()) {
        throw std::invalid_argument("model and simulation tables cover different scenarios");
    }

    ComparisonReport rep;
    std::size_t above = 0;
    for (const ResultRow* m : models) {
        auto it = sims.find(key_of(*m));
        if (it == sims.end()) {
            throw std::invalid_argument("no simulation rows for a model scenario");
        }
        std::vector<double> thr;
        std::vector<double> del;
        for (const ResultRow* s : it->second) {
            thr.push_back(s->throughput_pkt_s);
            del.push_back(s->delay_s);
        }
        const Aggregate at = aggregate(thr);
        const Aggregate ad = aggregate(del);

        PointComparison pc;
        pc.model = *m;
        pc.sim_throughput = at.mean;
        pc.sim_throughput_ci95 = at.ci95_halfwidth;
        pc.sim_delay = ad.mean;
        pc.throughput_rel_error = (m->throughput_pkt_s - at.mean) / at.mean;
        pc.delay_rel_error = (m->delay_s - ad.mean) / ad.mean;
        pc.flagged = !(std::abs(m->throughput_pkt_s - at.mean) <=
                       at.ci95_halfwidth + tolerance * std::abs(at.mean));
        if (!(m->throughput_pkt_s < at.mean)) ++above;

        const double te = std::abs(pc.throughput_rel_error);
        const double de = std::abs(pc.delay_rel_error);
        rep.max_throughput_error = std::max(rep.max_throughput_error, te);
        rep.max_delay_error = std::max(rep.max_delay_error, de);
        rep.mean_throughput_error += te;
        rep.mean_delay_error += de;
        if (!(te <= hard_threshold)) rep.hard_failure = true;
        rep.points.push_back(pc);
    }
    if (!rep.points.empty()) {
        const auto n = static_cast<double>(rep.points.size());
        rep.mean_throughput_error /= n;
        rep.mean_delay_error /= n;
        rep.model_above_fraction = static_cast<double>(above) / n;
    }
    return rep;
}

std::string ComparisonReport::summary() const {
    std::ostringstream os;
    os << "points=" << points.size() << " max_thr_err=" << max_throughput_error
       << " mean_thr_err=" << mean_throughput_error << " max_delay_err=" << max_delay_error
       << " mean_delay_err=" << mean_delay_error << " model_above=" << model_above_fraction;
    if (model_above_fraction >= 0.5) {
        os << " (model biased above simulation)";
    } else {
        os << " (model biased below simulation)";
    }
    std::size_t flagged = 0;
    for (const auto& p : points) flagged += p.flagged ? 1 : 0;
    os << " flagged=" << flagged;
    if (hard_failure) os << " HARD_FAILURE";
    return os.str();
}

}  // namespace mptmac
