#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "mptmac/channel.hpp"
#include "mptmac/config.hpp"

namespace mptmac {

/// Counters of one simulation run. Windowed counters cover
/// [warmup_end, sim_end); lifetime counters cover the whole run and feed the
/// conservation check.
struct SimStats {
    int n_nodes = 0;
    Micros warmup_end = 0;
    Micros sim_end = 0;

    // Attributed by arrival time.
    std::uint64_t total_arrivals = 0;
    std::uint64_t blocked_arrivals = 0;
    std::uint64_t delivered_packets = 0;
    std::uint64_t discarded_packets = 0;

    // Attributed by departure time.
    std::uint64_t departed_packets = 0;
    double sum_queue_delay = 0.0;  // us

    // Attributed by attempt start.
    std::uint64_t tx_attempts = 0;
    std::uint64_t collided_attempts = 0;

    // Batch service times (scheduling to purge), attributed by departure.
    std::uint64_t batches = 0;
    double sum_service_time = 0.0;     // us
    double sum_service_time_sq = 0.0;  // us^2
    std::vector<std::uint64_t> batches_by_size;    // [s-1]
    std::vector<double> service_time_by_size;      // [s-1], summed us

    // Time integrals over the window, summed over nodes.
    double queue_integral = 0.0;   // packet * us
    double active_integral = 0.0;  // us with q >= s_min

    // Whole run.
    std::uint64_t lifetime_arrivals = 0;
    std::uint64_t lifetime_blocked = 0;
    std::uint64_t lifetime_delivered = 0;
    std::uint64_t lifetime_discarded = 0;
    std::uint64_t queued_at_end = 0;

    double window_seconds() const { return static_cast<double>(sim_end - warmup_end) * 1e-6; }
    /// Aggregate delivered packets per second.
    double throughput() const;
    /// Mean queueing delay in seconds of packets departing in the window.
    double delay() const;
    double blocking_prob() const;
    /// Fraction of transmission attempts that collided.
    double collision_prob() const;
    /// Time fraction a node holds at least s_min packets.
    double rho() const;
    /// Mean service time of a batch, us.
    double mean_service_time() const;
    /// Mean per-node queue occupancy.
    double mean_queue() const;

    bool operator==(const SimStats&) const = default;
};

struct SimOptions {
    /// Replaces the PER table derived from the SNRs, e.g. an error-free channel.
    std::optional<PerTable> per_override;
    /// One CSV line per channel event: timestamp_us,event,node,m,outcome.
    std::ostream* trace = nullptr;
    /// Verify slot alignment and busy-period ordering at every transmission.
    bool audit = false;
};

/// Event-driven simulation of N nodes sharing one collision channel.
/// Deterministic for a given (cfg, seed). Throws std::invalid_argument when
/// warmup >= sim_time.
SimStats run(const ScenarioConfig& cfg, std::uint64_t seed, Micros sim_time, Micros warmup,
             const SimOptions& opts = {});

struct Aggregate {
    double mean = 0.0;
    double stddev = 0.0;
    double ci95_halfwidth = 0.0;
};

/// Mean, sample standard deviation and Student-t 95% half-width.
Aggregate aggregate(const std::vector<double>& samples);

struct ReplicationSummary {
    std::vector<SimStats> runs;  // seed order
    Aggregate throughput;
    Aggregate delay;
    Aggregate blocking_prob;
    Aggregate collision_prob;
    Aggregate rho;
    Aggregate service_time;
};

/// Independent runs, one per seed, executed on up to `workers` threads
/// (0 = hardware concurrency). Requires at least two seeds.
ReplicationSummary replicate(const ScenarioConfig& cfg, const std::vector<std::uint64_t>& seeds,
                             Micros sim_time, Micros warmup, const SimOptions& opts = {},
                             unsigned workers = 0);

}  // namespace mptmac
