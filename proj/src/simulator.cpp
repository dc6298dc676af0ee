#include "mptmac/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <ostream>
#include <random>
#include <stdexcept>

#include <boost/math/distributions/students_t.hpp>

#include "mptmac/parallel.hpp"
#include "mptmac/queue.hpp"
#include "mptmac/timing.hpp"

namespace mptmac {

namespace {

constexpr Micros kNever = std::numeric_limits<Micros>::max();

std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

/// mt19937_64 output is fixed by the standard; the transforms below avoid
/// the implementation-defined std:: distributions.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    int uniform_int(int n) {
        const auto un = static_cast<std::uint64_t>(n);
        const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                    std::numeric_limits<std::uint64_t>::max() % un;
        std::uint64_t x = engine_();
        while (x >= limit) x = engine_();
        return static_cast<int>(x % un);
    }

    double exponential(double rate) { return -std::log1p(-uniform01()) / rate; }

    bool bernoulli(double p) { return uniform01() < p; }

private:
    std::mt19937_64 engine_;
};

struct Packet {
    Micros arrival;
    int destination;
    bool tagged;  // arrived inside the measurement window
};

enum class Mode { Idle, Contending, Transmitting };

struct Node {
    explicit Node(std::uint64_t seed) : rng(seed) {}

    Rng rng;
    std::deque<Packet> queue;
    Mode mode = Mode::Idle;

    int backoff = 0;
    Micros first_boundary = 0;

    int batch_size = 0;
    std::vector<char> acked;  // one flag per head-of-line batch packet
    int attempts = 0;
    Micros batch_start = 0;

    double next_arrival_exact = 0.0;  // us
    Micros next_arrival = kNever;

    Micros last_change = 0;

    Micros tx_at(Micros sigma) const { return first_boundary + backoff * sigma; }
    int unacked() const { return static_cast<int>(std::count(acked.begin(), acked.end(), 0)); }
};

class Simulation {
public:
    Simulation(const ScenarioConfig& cfg, std::uint64_t seed, Micros sim_time, Micros warmup,
               const SimOptions& opts)
        : cfg_(cfg),
          timing_(cfg),
          per_(opts.per_override ? *opts.per_override : PerTable(cfg)),
          trace_(opts.trace),
          audit_(opts.audit),
          sim_time_(sim_time),
          warmup_(warmup),
          arrival_rng_(derive(seed, 0)) {
        if (per_.m_antennas() < cfg.m_antennas) {
            throw std::invalid_argument("PER table shorter than m_antennas");
        }
        stats_.n_nodes = cfg.n_nodes;
        stats_.warmup_end = warmup;
        stats_.sim_end = sim_time;
        stats_.batches_by_size.assign(static_cast<std::size_t>(cfg.s_max), 0);
        stats_.service_time_by_size.assign(static_cast<std::size_t>(cfg.s_max), 0.0);
        nodes_.reserve(static_cast<std::size_t>(cfg.n_nodes));
        for (int i = 0; i < cfg.n_nodes; ++i) nodes_.emplace_back(derive(seed, i + 1));
        arrival_rate_us_ = cfg.arrival_rate * 1e-6;
        for (auto& n : nodes_) schedule_arrival(n);
        if (trace_) *trace_ << "timestamp_us,event,node,m,outcome\n";
    }

    SimStats run() {
        for (;;) {
            const Micros t_end = busy_ ? busy_end_ : kNever;
            int arrival_node = -1;
            Micros t_arr = kNever;
            for (std::size_t i = 0; i < nodes_.size(); ++i) {
                if (nodes_[i].next_arrival < t_arr) {
                    t_arr = nodes_[i].next_arrival;
                    arrival_node = static_cast<int>(i);
                }
            }
            Micros t_tx = kNever;
            if (!busy_) {
                for (const auto& n : nodes_) {
                    if (n.mode == Mode::Contending) t_tx = std::min(t_tx, n.tx_at(cfg_.slot_sigma));
                }
            }
            const Micros t = std::min({t_end, t_arr, t_tx});
            if (t >= sim_time_) break;
            // Same-instant ordering: busy period end, then arrivals, then
            // transmission starts.
            if (t == t_end) {
                finish_busy();
            } else if (t == t_arr) {
                arrival(arrival_node, t);
            } else {
                start_transmission(t);
            }
        }
        finalize();
        return stats_;
    }

private:
    static std::uint64_t derive(std::uint64_t seed, int stream) {
        std::uint64_t state = seed ^ (0xD1B54A32D192ED03ULL * static_cast<std::uint64_t>(stream + 1));
        splitmix64(state);
        return splitmix64(state);
    }

    bool in_window(Micros t) const { return t >= warmup_ && t < sim_time_; }

    void trace(Micros t, const char* event, int node, int m, const std::string& outcome) {
        if (trace_) *trace_ << t << ',' << event << ',' << node << ',' << m << ',' << outcome << '\n';
    }

    void schedule_arrival(Node& n) {
        n.next_arrival_exact += arrival_rng_.exponential(arrival_rate_us_);
        const double rounded = std::round(n.next_arrival_exact);
        n.next_arrival = rounded >= static_cast<double>(sim_time_) ? kNever : static_cast<Micros>(rounded);
    }

    // Integrates q(t) and 1{q >= s_min} over the window before a queue change.
    void account(Node& n, Micros t) {
        const Micros lo = std::max(n.last_change, warmup_);
        const Micros hi = std::min(t, sim_time_);
        if (hi > lo) {
            const auto q = static_cast<double>(n.queue.size());
            const auto dt = static_cast<double>(hi - lo);
            stats_.queue_integral += q * dt;
            if (static_cast<int>(n.queue.size()) >= cfg_.s_min) stats_.active_integral += dt;
        }
        n.last_change = t;
    }

    Micros align(Micros earliest) const {
        if (earliest <= anchor_) return anchor_;
        const Micros k = (earliest - anchor_ + cfg_.slot_sigma - 1) / cfg_.slot_sigma;
        return anchor_ + k * cfg_.slot_sigma;
    }

    void start_batch(Node& n, Micros t) {
        const int q = static_cast<int>(n.queue.size());
        n.batch_size = batch_size_policy(q, cfg_.s_min, cfg_.s_max);
        n.acked.assign(static_cast<std::size_t>(n.batch_size), 0);
        n.attempts = 0;
        n.batch_start = t;
        begin_contention(n, t);
    }

    // DIFS of idle channel, then slot-aligned countdown on the shared grid.
    void begin_contention(Node& n, Micros t) {
        n.mode = Mode::Contending;
        n.backoff = n.rng.uniform_int(cfg_.cw);
        n.first_boundary = align(t + cfg_.difs);
    }

    void arrival(int idx, Micros t) {
        Node& n = nodes_[static_cast<std::size_t>(idx)];
        schedule_arrival(n);
        int destination = -1;
        if (cfg_.n_nodes > 1) {
            destination = arrival_rng_.uniform_int(cfg_.n_nodes - 1);
            if (destination >= idx) ++destination;
        }
        const bool tagged = in_window(t);
        ++stats_.lifetime_arrivals;
        if (tagged) ++stats_.total_arrivals;
        if (static_cast<int>(n.queue.size()) >= cfg_.buffer_size) {
            ++stats_.lifetime_blocked;
            if (tagged) ++stats_.blocked_arrivals;
            trace(t, "BLOCK", idx, 0, "full");
            return;
        }
        account(n, t);
        n.queue.push_back({t, destination, tagged});
        if (n.mode == Mode::Idle && static_cast<int>(n.queue.size()) >= cfg_.s_min) start_batch(n, t);
    }

    void start_transmission(Micros b) {
        std::vector<int> senders;
        for (std::size_t i = 0; i < nodes_.size(); ++i) {
            const Node& n = nodes_[i];
            if (n.mode == Mode::Contending && n.tx_at(cfg_.slot_sigma) == b) {
                senders.push_back(static_cast<int>(i));
            }
        }
        if (audit_) audit_boundary(b);

        const bool collision = senders.size() >= 2;
        int m_max = 0;
        for (int id : senders) m_max = std::max(m_max, nodes_[static_cast<std::size_t>(id)].unacked());
        const Micros duration = collision ? timing_.c(m_max) : timing_.cf(m_max);
        busy_ = true;
        busy_end_ = b + duration;
        anchor_ = busy_end_ + cfg_.difs + cfg_.slot_sigma;

        // Every other contender spends one slot on this busy period, then
        // freezes until the channel frees up.
        for (std::size_t i = 0; i < nodes_.size(); ++i) {
            Node& n = nodes_[i];
            if (n.mode != Mode::Contending || n.tx_at(cfg_.slot_sigma) == b) continue;
            if (n.first_boundary <= b) n.backoff -= static_cast<int>((b - n.first_boundary) / cfg_.slot_sigma) + 1;
            n.first_boundary = anchor_;
        }

        collision_ = collision;
        senders_ = senders;
        if (collision) trace(b, "COLLISION", -1, m_max, std::to_string(senders.size()));
        for (int id : senders) {
            Node& n = nodes_[static_cast<std::size_t>(id)];
            n.mode = Mode::Transmitting;
            const int m = n.unacked();
            if (in_window(b)) {
                ++stats_.tx_attempts;
                if (collision) ++stats_.collided_attempts;
            }
            trace(b, "TX_START", id, m, collision ? "collision" : "clear");
        }
        if (collision) return;

        // Per-packet error coins in packet order; applied when the ACK window closes.
        Node& n = nodes_[static_cast<std::size_t>(senders.front())];
        const double e = per_(n.unacked());
        pending_acks_.assign(n.acked.size(), 0);
        for (std::size_t k = 0; k < n.acked.size(); ++k) {
            if (!n.acked[k]) pending_acks_[k] = n.rng.bernoulli(e) ? 0 : 1;
        }
    }

    void audit_boundary(Micros b) const {
        if (b < last_busy_end_ + cfg_.difs) {
            throw std::logic_error("transmission starts before DIFS after the previous busy period");
        }
        if (b < anchor_ || (b - anchor_) % cfg_.slot_sigma != 0) {
            throw std::logic_error("transmission off the shared slot grid");
        }
    }

    void finish_busy() {
        const Micros e = busy_end_;
        busy_ = false;
        last_busy_end_ = e;
        for (int id : senders_) {
            Node& n = nodes_[static_cast<std::size_t>(id)];
            const int m = n.unacked();
            ++n.attempts;
            if (collision_) {
                trace(e, "TX_END", id, m, "collided");
            } else {
                int newly = 0;
                for (std::size_t k = 0; k < n.acked.size(); ++k) {
                    if (pending_acks_[k]) {
                        n.acked[k] = 1;
                        ++newly;
                    }
                }
                trace(e, "TX_END", id, m, "acked=" + std::to_string(newly));
            }
            if (n.unacked() == 0) {
                depart(id, e);
            } else if (cfg_.retry_limit && n.attempts > *cfg_.retry_limit) {
                discard(id, e);
            } else {
                begin_contention(n, e);
            }
        }
        senders_.clear();
    }

    void purge(Node& n, Micros t) {
        account(n, t);
        for (std::size_t k = 0; k < n.acked.size(); ++k) {
            const Packet pkt = n.queue.front();
            n.queue.pop_front();
            if (n.acked[k]) {
                ++stats_.lifetime_delivered;
                if (pkt.tagged) ++stats_.delivered_packets;
                if (in_window(t)) {
                    ++stats_.departed_packets;
                    stats_.sum_queue_delay += static_cast<double>(t - pkt.arrival);
                }
            } else {
                ++stats_.lifetime_discarded;
                if (pkt.tagged) ++stats_.discarded_packets;
            }
        }
        n.acked.clear();
    }

    void depart(int id, Micros t) {
        Node& n = nodes_[static_cast<std::size_t>(id)];
        if (in_window(t)) {
            const auto service = static_cast<double>(t - n.batch_start);
            ++stats_.batches;
            stats_.sum_service_time += service;
            stats_.sum_service_time_sq += service * service;
            const auto k = static_cast<std::size_t>(n.batch_size - 1);
            ++stats_.batches_by_size[k];
            stats_.service_time_by_size[k] += service;
        }
        trace(t, "DEPARTURE", id, n.batch_size, "delivered");
        purge(n, t);
        next_batch(n, t);
    }

    void discard(int id, Micros t) {
        Node& n = nodes_[static_cast<std::size_t>(id)];
        trace(t, "DISCARD", id, n.unacked(), "retry_limit");
        purge(n, t);
        next_batch(n, t);
    }

    void next_batch(Node& n, Micros t) {
        if (static_cast<int>(n.queue.size()) >= cfg_.s_min) {
            start_batch(n, t);
        } else {
            n.mode = Mode::Idle;
        }
    }

    void finalize() {
        std::uint64_t queued = 0;
        for (auto& n : nodes_) {
            account(n, sim_time_);
            queued += n.queue.size();
        }
        stats_.queued_at_end = queued;
        if (stats_.lifetime_arrivals != stats_.lifetime_delivered + stats_.lifetime_blocked +
                                            stats_.lifetime_discarded + stats_.queued_at_end) {
            throw std::logic_error("packet conservation violated");
        }
    }

    const ScenarioConfig& cfg_;
    TimingTable timing_;
    PerTable per_;
    std::ostream* trace_;
    bool audit_;
    Micros sim_time_;
    Micros warmup_;
    double arrival_rate_us_ = 0.0;

    Rng arrival_rng_;
    std::vector<Node> nodes_;

    bool busy_ = false;
    Micros busy_end_ = 0;
    Micros last_busy_end_ = std::numeric_limits<Micros>::min() / 2;
    Micros anchor_ = 0;  // a boundary of the current slot grid
    bool collision_ = false;
    std::vector<int> senders_;
    std::vector<char> pending_acks_;

    SimStats stats_;
};

}  // namespace

double SimStats::throughput() const {
    return static_cast<double>(departed_packets) / window_seconds();
}

double SimStats::delay() const {
    if (departed_packets == 0) return std::numeric_limits<double>::quiet_NaN();
    return sum_queue_delay / static_cast<double>(departed_packets) * 1e-6;
}

double SimStats::blocking_prob() const {
    if (total_arrivals == 0) return 0.0;
    return static_cast<double>(blocked_arrivals) / static_cast<double>(total_arrivals);
}

double SimStats::collision_prob() const {
    if (tx_attempts == 0) return 0.0;
    return static_cast<double>(collided_attempts) / static_cast<double>(tx_attempts);
}

double SimStats::rho() const {
    return active_integral / (static_cast<double>(n_nodes) * static_cast<double>(sim_end - warmup_end));
}

double SimStats::mean_service_time() const {
    if (batches == 0) return std::numeric_limits<double>::quiet_NaN();
    return sum_service_time / static_cast<double>(batches);
}

double SimStats::mean_queue() const {
    return queue_integral / (static_cast<double>(n_nodes) * static_cast<double>(sim_end - warmup_end));
}

SimStats run(const ScenarioConfig& cfg, std::uint64_t seed, Micros sim_time, Micros warmup,
             const SimOptions& opts) {
    cfg.validate();
    if (warmup < 0 || warmup >= sim_time) {
        throw std::invalid_argument("simulation window requires 0 <= warmup < sim_time");
    }
    return Simulation(cfg, seed, sim_time, warmup, opts).run();
}

Aggregate aggregate(const std::vector<double>& samples) {
    Aggregate a;
    const auto n = samples.size();
    if (n == 0) return a;
    for (double v : samples) a.mean += v;
    a.mean /= static_cast<double>(n);
    if (n < 2) return a;
    double ss = 0.0;
    for (double v : samples) ss += (v - a.mean) * (v - a.mean);
    a.stddev = std::sqrt(ss / static_cast<double>(n - 1));
    const boost::math::students_t dist(static_cast<double>(n - 1));
    a.ci95_halfwidth = boost::math::quantile(dist, 0.975) * a.stddev / std::sqrt(static_cast<double>(n));
    return a;
}

ReplicationSummary replicate(const ScenarioConfig& cfg, const std::vector<std::uint64_t>& seeds,
                             Micros sim_time, Micros warmup, const SimOptions& opts,
                             unsigned workers) {
    if (seeds.size() < 2) throw std::invalid_argument("replicate needs at least two seeds");
    if (opts.trace) throw std::invalid_argument("tracing is only supported for single runs");
    ReplicationSummary summary;
    summary.runs.resize(seeds.size());
    parallel_for(seeds.size(), workers, [&](std::size_t i) {
        summary.runs[i] = run(cfg, seeds[i], sim_time, warmup, opts);
    });
    auto collect = [&](auto getter) {
        std::vector<double> v;
        v.reserve(summary.runs.size());
        for (const auto& r : summary.runs) v.push_back(getter(r));
        return aggregate(v);
    };
    summary.throughput = collect([](const SimStats& s) { return s.throughput(); });
    summary.delay = collect([](const SimStats& s) { return s.delay(); });
    summary.blocking_prob = collect([](const SimStats& s) { return s.blocking_prob(); });
    summary.collision_prob = collect([](const SimStats& s) { return s.collision_prob(); });
    summary.rho = collect([](const SimStats& s) { return s.rho(); });
    summary.service_time = collect([](const SimStats& s) { return s.mean_service_time(); });
    return summary;
}

}  // namespace mptmac
