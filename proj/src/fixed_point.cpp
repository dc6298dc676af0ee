#include "mptmac/fixed_point.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "mptmac/retx.hpp"

namespace mptmac {

namespace {

double relative_change(double before, double after) {
    const double scale = std::max({std::abs(before), std::abs(after), 1e-12});
    return std::abs(after - before) / scale;
}

struct Iterate {
    ContentionState contention;
    ServiceTimes service;
    QueueSolution queue;
};

}  // namespace

ModelSolution solve(const ScenarioConfig& cfg, const SolveOptions& opts) {
    cfg.validate();
    if (!(opts.damping > 0.0 && opts.damping <= 1.0)) {
        throw std::invalid_argument("damping must lie in (0, 1]");
    }
    if (!(opts.initial_rho >= 0.0 && opts.initial_rho <= 1.0)) {
        throw std::invalid_argument("initial rho must lie in [0, 1]");
    }

    ModelSolution sol(cfg);
    const QueueShape shape{cfg.buffer_size, cfg.s_min, cfg.s_max};

    // Error process depends on the PER table only: solve it once.
    sol.upsilon_cf = expected_cf_attempts(cfg.s_max, sol.per_table);
    for (int s = 1; s <= cfg.s_max; ++s) {
        sol.attempt_dists.push_back(attempt_size_distribution(s, sol.per_table));
    }

    double rho = opts.initial_rho;
    std::vector<double> psi(static_cast<std::size_t>(cfg.s_max), 0.0);
    psi.back() = 1.0;

    std::optional<Iterate> prev;
    for (int it = 1; it <= opts.max_iters; ++it) {
        Iterate cur;
        const TransmissionDurations durations =
            transmission_durations(psi, sol.attempt_dists, sol.timing);
        cur.contention = contention_state(rho, cfg, durations);
        cur.service = service_times(cur.contention, durations, sol.upsilon_cf, psi, cfg);
        cur.queue = solve_queue(cfg.arrival_rate, cur.service.ex, shape, cfg.n_nodes);

        const double rho_new = cur.queue.steady.metrics.rho;
        double residual = 1.0;
        if (prev) {
            residual = relative_change(prev->queue.steady.metrics.rho, rho_new);
            residual = std::max(residual, relative_change(prev->contention.p, cur.contention.p));
            for (int s = cfg.s_min; s <= cfg.s_max; ++s) {
                const auto k = static_cast<std::size_t>(s - 1);
                residual = std::max(residual, relative_change(prev->service.ex[k], cur.service.ex[k]));
            }
        }
        // The change between iterates understates the distance to the fixed
        // point when the iteration contracts slowly; also require the
        // geometric estimate of the remaining error to be within tolerance.
        double remaining = residual;
        if (sol.trace.size() >= 2 && sol.trace.back() > 0.0) {
            const double rate = std::min(residual / sol.trace.back(), 0.999);
            remaining = residual * rate / (1.0 - rate);
        }
        sol.trace.push_back(residual);
        sol.iterations = it;
        sol.residual = residual;

        rho = (1.0 - opts.damping) * rho + opts.damping * rho_new;
        psi = cur.queue.steady.psi;
        prev = std::move(cur);
        if (residual < opts.tolerance && remaining < opts.tolerance) {
            sol.converged = true;
            break;
        }
    }

    sol.contention = prev->contention;
    sol.service = prev->service;
    sol.chain = std::move(prev->queue.chain);
    sol.steady = std::move(prev->queue.steady);
    return sol;
}

bool is_sweep_field(const std::string& field) {
    return field == "n_nodes" || field == "arrival_rate" || field == "m_antennas" ||
           field == "s_min" || field == "s_max" || field == "snr_db";
}

ScenarioConfig with_field(ScenarioConfig cfg, const std::string& field, double value) {
    auto as_int = [&](int& slot) {
        if (value != std::floor(value)) {
            throw std::invalid_argument("field '" + field + "' takes integer values");
        }
        slot = static_cast<int>(value);
    };
    if (field == "n_nodes") as_int(cfg.n_nodes);
    else if (field == "m_antennas") as_int(cfg.m_antennas);
    else if (field == "s_min") as_int(cfg.s_min);
    else if (field == "s_max") as_int(cfg.s_max);
    else if (field == "arrival_rate") cfg.arrival_rate = value;
    else if (field == "snr_db") cfg.snr_db = value;
    else throw std::invalid_argument("unknown sweep field '" + field + "'");
    return cfg;
}

std::vector<SweepPoint> sweep(const ScenarioConfig& cfg, const SweepAxis& axis,
                              const SolveOptions& opts) {
    if (!is_sweep_field(axis.field)) {
        throw std::invalid_argument("unknown sweep field '" + axis.field + "'");
    }
    std::vector<SweepPoint> points;
    points.reserve(axis.values.size());
    for (double v : axis.values) {
        SweepPoint pt;
        pt.value = v;
        try {
            pt.config = with_field(cfg, axis.field, v);
            pt.solution = solve(pt.config, opts);
        } catch (const std::exception& e) {
            pt.error = e.what();
        }
        points.push_back(std::move(pt));
    }
    return points;
}

}  // namespace mptmac
