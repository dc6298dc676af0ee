#pragma once

#include <optional>
#include <string>
#include <vector>

#include "mptmac/channel.hpp"
#include "mptmac/config.hpp"
#include "mptmac/queue.hpp"
#include "mptmac/service.hpp"
#include "mptmac/timing.hpp"

namespace mptmac {

struct SolveOptions {
    double tolerance = 1e-6;  // bound on the relative change of (rho, p, E[X(s)]) and on its
                              // extrapolated remaining error
    int max_iters = 10000;
    double damping = 0.5;     // weight of the new rho
    double initial_rho = 1.0;
};

/// Converged state of the coupled queue / contention / retransmission model.
struct ModelSolution {
    explicit ModelSolution(const ScenarioConfig& cfg)
        : config(cfg), timing(cfg), per_table(cfg) {}

    ScenarioConfig config;
    TimingTable timing;
    PerTable per_table;

    // Size-indexed vectors have length s_max (element s-1).
    std::vector<double> upsilon_cf;
    std::vector<std::vector<double>> attempt_dists;  // [s-1][m-1] = p_{m|s}

    ContentionState contention;
    ServiceTimes service;
    DepartureChain chain;
    SteadyState steady;

    int iterations = 0;
    double residual = 0.0;
    bool converged = false;
    std::vector<double> trace;  // residual after each iteration

    const QueueMetrics& metrics() const { return steady.metrics; }
};

/// Damped fixed-point iteration from the saturated guess. Returns the last
/// iterate with converged = false when max_iters is exhausted; throws
/// ModelError when a quantity diverges.
ModelSolution solve(const ScenarioConfig& cfg, const SolveOptions& opts = {});

/// Fields a sweep can vary.
bool is_sweep_field(const std::string& field);
/// Copy of cfg with one field replaced. Throws std::invalid_argument for an
/// unknown field; the result is not validated.
ScenarioConfig with_field(ScenarioConfig cfg, const std::string& field, double value);

struct SweepAxis {
    std::string field;
    std::vector<double> values;
};

struct SweepPoint {
    double value = 0.0;
    ScenarioConfig config;
    std::optional<ModelSolution> solution;
    std::string error;  // set when the point could not be solved
};

/// One solve per axis value; a failing point is recorded, not fatal.
std::vector<SweepPoint> sweep(const ScenarioConfig& cfg, const SweepAxis& axis,
                              const SolveOptions& opts = {});

}  // namespace mptmac
