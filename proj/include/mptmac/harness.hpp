#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "mptmac/config.hpp"
#include "mptmac/fixed_point.hpp"

namespace mptmac {

enum class RunMode { Model, Sim, Both };
enum class OutputFormat { Csv, Json };

RunMode parse_mode(const std::string& s);
OutputFormat parse_format(const std::string& s);

struct ExperimentSpec {
    ScenarioConfig base;
    std::optional<SweepAxis> sweep;
    RunMode mode = RunMode::Model;
    std::vector<std::uint64_t> seeds;
    Micros sim_time = 2'000'000'000;    // us
    std::optional<Micros> warmup;       // default: 10% of sim_time
    SolveOptions solve;
    unsigned workers = 0;

    Micros effective_warmup() const { return warmup ? *warmup : sim_time / 10; }
    /// Throws std::invalid_argument when a simulation mode has no seeds.
    void validate() const;
};

/// Experiment file: {"scenario": {...}, "variants": [{...}], "sweep": {"field",
/// "values"}, "mode", "seeds", "sim_time_s", "warmup_s"}. Each variant
/// overrides scenario fields and yields one spec; without variants there is
/// one spec. A plain scenario object (no "scenario" key) is accepted as a
/// model-only experiment. Throws ConfigError on malformed input.
std::vector<ExperimentSpec> experiment_from_json(const nlohmann::json& j);
std::vector<ExperimentSpec> load_experiment(const std::string& path);

/// One output line. Model rows use replication = -1; sim rows report
/// converged = true and iterations = 0.
struct ResultRow {
    int n_nodes = 0;
    double lambda_pkt_s = 0.0;
    int m_antennas = 0;
    int s_min = 0;
    int s_max = 0;
    double snr_db = 0.0;
    std::string source;  // model | sim | sim_mean
    int replication = -1;
    double throughput_pkt_s = 0.0;
    double delay_s = 0.0;
    double blocking_prob = 0.0;
    double collision_prob = 0.0;
    double rho = 0.0;
    bool converged = true;
    int iterations = 0;

    bool operator==(const ResultRow&) const = default;
};

/// Ordered by sweep value, then source (model, sim, sim_mean), then
/// replication.
std::vector<ResultRow> run_experiment(const ExperimentSpec& spec);

extern const char* const kCsvHeader;

void write_csv(std::ostream& out, const std::vector<ResultRow>& rows);
void write_json(std::ostream& out, const std::vector<ResultRow>& rows);
void write_rows(const std::string& path, const std::vector<ResultRow>& rows, OutputFormat format);
std::vector<ResultRow> read_csv(std::istream& in);
std::vector<ResultRow> read_json(std::istream& in);

struct PointComparison {
    ResultRow model;
    double sim_throughput = 0.0;
    double sim_throughput_ci95 = 0.0;
    double sim_delay = 0.0;
    double throughput_rel_error = 0.0;  // (model - sim) / sim
    double delay_rel_error = 0.0;
    bool flagged = false;  // |model - sim| beyond the 95% half-width plus tolerance
};

struct ComparisonReport {
    std::vector<PointComparison> points;
    double max_throughput_error = 0.0;  // absolute relative errors
    double mean_throughput_error = 0.0;
    double max_delay_error = 0.0;
    double mean_delay_error = 0.0;
    double model_above_fraction = 0.0;  // share of points with model >= sim throughput
    bool hard_failure = false;          // some point beyond hard_threshold

    std::string summary() const;
};

/// Matches model rows with the per-replication sim rows of the same
/// scenario. Throws std::invalid_argument when the two sets of scenarios
/// differ.
ComparisonReport compare(const std::vector<ResultRow>& model_rows,
                         const std::vector<ResultRow>& sim_rows, double tolerance = 0.07,
                         double hard_threshold = 0.25);

}  // namespace mptmac
