// Acceptance run: one PASS/FAIL line per criterion, details indented below.
//
//   acceptance [--allow-fail N[,N...]] [--quick]
//
// Exit status is 0 when every criterion passes or fails only where allowed.
// --quick shortens the simulation horizons (not the acceptance settings).

#include <chrono>
#include <cmath>
#include <cstdio>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "mptmac/channel.hpp"
#include "mptmac/fixed_point.hpp"
#include "mptmac/linalg.hpp"
#include "mptmac/queue.hpp"
#include "mptmac/retx.hpp"
#include "mptmac/service.hpp"
#include "mptmac/simulator.hpp"
#include "mptmac/timing.hpp"
#include "oracles.hpp"

using namespace mptmac;

namespace {

constexpr Micros kSecond = 1'000'000;

bool g_quick = false;

struct Outcome {
    bool pass = true;
    std::string summary;
    std::vector<std::string> details;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof(buf), f, args...);
    return buf;
}

Outcome mm1k_equivalence() {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    double worst = 0.0;
    for (double load : {0.2, 0.5, 1.0, 2.0}) {
        for (int k : {2, 5, 50}) {
            const double ex = 11664.0;
            const double lambda = load / ex;
            const QueueShape shape{k, 1, 1};
            const auto p = transition_matrix(lambda, {ex}, shape);
            const auto pi_d = departure_distribution(p);
            const auto epochs = epoch_durations(pi_d, {ex}, lambda, shape);
            const auto pi_s = steady_state_distribution(pi_d, p, epochs.mean, lambda, shape);
            const auto ref = oracle::mm1k(load, k);
            for (std::size_t q = 0; q < ref.size(); ++q) worst = std::max(worst, std::abs(pi_s[q] - ref[q]));
        }
    }
    const double dt = seconds_since(t0);
    o.pass = worst < 1e-9 && dt < 1.0;
    o.summary = fmt("max |pi_s - M/M/1/K| = %.2e (tol 1e-9), %.3f s (limit 1 s)", worst, dt);
    return o;
}

Outcome retx_oracles() {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    const long trials = 1'000'000;
    double worst_z = 0.0;
    double worst_tv = 0.0;
    std::uint64_t seed = 1000;
    for (int m_ant : {2, 4}) {
        for (double db : {20.0, 40.0}) {
            const PerTable per(m_ant, snr_db_to_linear(db), snr_db_to_linear(15));
            const auto ups = expected_cf_attempts(m_ant, per);
            for (int s = 1; s <= m_ant; ++s) {
                const auto mc = oracle::simulate_error_process(s, per.values(), trials, ++seed);
                const double u = ups[static_cast<std::size_t>(s - 1)];
                // Standard error from the exact variance of the absorption time,
                // (2N - I) t - t^2; the sample variance is zero when no packet
                // ever fails.
                const ErrorChain chain(s, per);
                const Eigen::MatrixXd fund = chain.fundamental();
                const Eigen::VectorXd t = fund * Eigen::VectorXd::Ones(s);
                const Eigen::VectorXd second = (2.0 * fund - Eigen::MatrixXd::Identity(s, s)) * t;
                const double var = second(s - 1) - t(s - 1) * t(s - 1);
                const double se = std::sqrt(std::max(var, 0.0) / static_cast<double>(trials));
                const double diff = std::abs(mc.mean_attempts - u);
                const double z = se > 0 ? diff / se : (diff < 1e-12 ? 0.0 : INFINITY);
                const double tv = oracle::total_variation(mc.size_freq, attempt_size_distribution(s, per));
                worst_z = std::max(worst_z, z);
                worst_tv = std::max(worst_tv, tv);
                o.details.push_back(fmt("M=%d snr=%2.0f dB s=%d  Ucf=%.6f mc=%.6f (%.2f se)  tv=%.2e", m_ant, db,
                                        s, u, mc.mean_attempts, z, tv));
            }
        }
    }
    const double dt = seconds_since(t0);
    o.pass = worst_z <= 3.0 && worst_tv < 1e-3 && dt < 30.0;
    o.summary = fmt("worst %.2f se (limit 3), worst tv %.2e (limit 1e-3), %.1f s (limit 30 s)", worst_z, worst_tv,
                    dt);
    return o;
}

Outcome lone_node() {
    Outcome o;
    ScenarioConfig cfg;
    cfg.n_nodes = 1;
    cfg.m_antennas = 2;
    cfg.s_min = 1;
    cfg.s_max = 1;
    cfg.arrival_rate = 2.0;
    SimOptions opts;
    opts.per_override = PerTable::error_free(2);
    const auto st = run(cfg, 1, 6000 * kSecond, 100 * kSecond, opts);
    const double expected = mean_backoff_slots(cfg.cw) * static_cast<double>(cfg.slot_sigma) +
                            static_cast<double>(t_cf(1, cfg) + cfg.difs + cfg.slot_sigma);
    const double err = st.mean_service_time() / expected - 1.0;
    o.pass = st.batches >= 10000 && std::abs(err) < 0.01 && st.collided_attempts == 0;
    o.summary = fmt("service %.1f us vs %.0f us (%+.3f%%, tol 1%%) over %llu batches, %llu collisions", st.mean_service_time(),
                    expected, 100 * err, static_cast<unsigned long long>(st.batches),
                    static_cast<unsigned long long>(st.collided_attempts));
    return o;
}

struct GridPoint {
    int m = 0;
    double lambda = 0.0;
    int n = 0;
    QueueMetrics model;
    ReplicationSummary sim;
};

std::vector<GridPoint> run_grid() {
    std::vector<std::uint64_t> seeds;
    for (std::uint64_t s = 1; s <= 10; ++s) seeds.push_back(s);
    const Micros horizon = (g_quick ? 200 : 2000) * kSecond;
    std::vector<GridPoint> grid;
    for (int m : {2, 4}) {
        for (double lambda : {5.0, 15.0}) {
            for (int n : {2, 4, 8, 12}) {
                ScenarioConfig cfg;
                cfg.m_antennas = m;
                cfg.s_min = 1;
                cfg.s_max = 2;
                cfg.snr_db = 20;
                cfg.arrival_rate = lambda;
                cfg.n_nodes = n;
                GridPoint g{m, lambda, n, solve(cfg).metrics(), replicate(cfg, seeds, horizon, horizon / 10)};
                grid.push_back(std::move(g));
            }
        }
    }
    return grid;
}

Outcome agreement(const std::vector<GridPoint>& grid, double grid_seconds) {
    Outcome o;
    double worst_s = 0.0;
    double worst_d = 0.0;
    int bad_d = 0;
    for (const auto& g : grid) {
        const double es = g.model.throughput / g.sim.throughput.mean - 1.0;
        const double ed = g.model.delay / g.sim.delay.mean - 1.0;
        worst_s = std::max(worst_s, std::abs(es));
        worst_d = std::max(worst_d, std::abs(ed));
        if (std::abs(ed) > 0.15) ++bad_d;
        o.details.push_back(fmt("[%d,1,2] lambda=%2.0f N=%2d  S %8.3f / %8.3f (%+6.2f%%)  D %.4f / %.4f s (%+6.1f%%)%s",
                                g.m, g.lambda, g.n, g.model.throughput, g.sim.throughput.mean, 100 * es, g.model.delay,
                                g.sim.delay.mean, 100 * ed,
                                std::abs(es) > 0.07 || std::abs(ed) > 0.15 ? "  <-" : ""));
    }
    o.pass = worst_s <= 0.07 && worst_d <= 0.15 && grid_seconds < 600;
    o.summary = fmt("max throughput error %.2f%% (tol 7%%), max delay error %.1f%% (tol 15%%, %d of %zu points "
                    "outside), %.0f s (limit 600 s)",
                    100 * worst_s, 100 * worst_d, bad_d, grid.size(), grid_seconds);
    return o;
}

Outcome antenna_ordering(const std::vector<GridPoint>& grid) {
    // Equal expected throughput (every packet delivered) is common at light
    // load; the simulation comparison therefore allows the 95% half-width of
    // the difference.
    Outcome o;
    int violations = 0;
    for (const auto& two : grid) {
        if (two.m != 2) continue;
        for (const auto& four : grid) {
            if (four.m != 4 || four.lambda != two.lambda || four.n != two.n) continue;
            const bool model_ok = four.model.throughput >= two.model.throughput * (1 - 1e-9);
            const double slack = std::hypot(four.sim.throughput.ci95_halfwidth, two.sim.throughput.ci95_halfwidth);
            const bool sim_ok = four.sim.throughput.mean >= two.sim.throughput.mean - slack;
            if (!model_ok || !sim_ok) ++violations;
            o.details.push_back(fmt("lambda=%2.0f N=%2d  model %.3f >= %.3f %s  sim %.3f >= %.3f (-%.3f) %s",
                                    two.lambda, two.n, four.model.throughput, two.model.throughput,
                                    model_ok ? "ok" : "NO", four.sim.throughput.mean, two.sim.throughput.mean, slack,
                                    sim_ok ? "ok" : "NO"));
        }
    }
    o.pass = violations == 0;
    o.summary = fmt("[4,1,2] >= [2,1,2] throughput at every point: %d violations", violations);
    return o;
}

Outcome smin_ordering() {
    Outcome o;
    ScenarioConfig base;
    base.snr_db = 40;
    base.m_antennas = 4;
    base.s_max = 4;
    base.arrival_rate = 5;
    int band_lo = -1;
    int band_hi = -1;
    bool delay_ok = true;
    bool overlap = false;
    for (int n = 1; n <= 60; ++n) {
        ScenarioConfig one = base;
        one.n_nodes = n;
        one.s_min = 1;
        ScenarioConfig four = one;
        four.s_min = 4;
        const auto a = solve(one);
        const auto b = solve(four);
        if (!a.converged || !b.converged) {
            o.details.push_back(fmt("N=%d did not converge", n));
            o.pass = false;
            continue;
        }
        const bool better = b.metrics().throughput > a.metrics().throughput * (1 + 1e-9);
        if (better) {
            if (band_lo < 0) band_lo = n;
            band_hi = n;
            if (n >= 20 && n <= 40) overlap = true;
        }
        if (n <= 8 && !(b.metrics().delay > a.metrics().delay)) delay_ok = false;
        if (n <= 8 || better || n % 4 == 0) {
            o.details.push_back(fmt("N=%2d  S %.3f vs %.3f  D %.4f vs %.4f s (s_min=4 vs 1)%s", n, b.metrics().throughput,
                                    a.metrics().throughput, b.metrics().delay, a.metrics().delay,
                                    better ? "  s_min=4 ahead" : ""));
        }
    }
    o.pass = o.pass && overlap && delay_ok;
    o.summary = fmt("s_min=4 ahead for N in [%d, %d] (must meet [20, 40]); delay larger at every N <= 8: %s", band_lo,
                    band_hi, delay_ok ? "yes" : "no");
    return o;
}

Outcome bias_direction(const std::vector<GridPoint>& grid) {
    Outcome o;
    int above = 0;
    for (const auto& g : grid) above += g.model.throughput >= g.sim.throughput.mean ? 1 : 0;
    const double frac = static_cast<double>(above) / static_cast<double>(grid.size());
    o.pass = frac >= 0.75;
    o.summary = fmt("model >= sim throughput at %d of %zu points (%.0f%%, need 75%%)", above, grid.size(), 100 * frac);
    return o;
}

Outcome invariants() {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    int failures = 0;
    int checks = 0;
    auto expect = [&](bool ok, const std::string& what) {
        ++checks;
        if (!ok) {
            ++failures;
            if (o.details.size() < 20) o.details.push_back("violated: " + what);
        }
    };

    // PER monotone and in [0, 1]; error chains stochastic.
    for (double db = 0; db <= 60; db += 5) {
        for (int m_ant = 1; m_ant <= 8; ++m_ant) {
            const PerTable per(m_ant, snr_db_to_linear(db), snr_db_to_linear(15));
            for (int m = 1; m <= m_ant; ++m) {
                expect(per(m) >= 0 && per(m) <= 1, fmt("PER range M=%d m=%d", m_ant, m));
                if (m > 1) expect(per(m) >= per(m - 1), fmt("PER monotone M=%d m=%d snr=%g", m_ant, m, db));
            }
            if (per(m_ant) >= 1.0) continue;
            for (int s = 1; s <= m_ant; ++s) {
                const ErrorChain ec(s, per);
                expect(row_sum_error(ec.p_hat()) < 1e-12, "error chain rows");
                const AttemptSizeChain ac(s, per);
                expect(row_sum_error(ac.p_tilde()) < 1e-12, "attempt chain rows");
                double sum = 0;
                for (double x : ac.stationary()) sum += x;
                expect(std::abs(sum - 1) < 1e-12, "attempt distribution normalized");
                expect(stationary_residual(ac.stationary(), ac.p_tilde()) < 1e-10, "attempt distribution stationary");
            }
        }
    }

    // Queue chains and model solutions.
    for (int m : {2, 4}) {
        for (double lambda : {1.0, 5.0, 15.0, 40.0}) {
            for (int n : {1, 4, 12, 30}) {
                ScenarioConfig cfg;
                cfg.m_antennas = m;
                cfg.s_max = m;
                cfg.arrival_rate = lambda;
                cfg.n_nodes = n;
                const auto sol = solve(cfg);
                const std::string tag = fmt("M=%d lambda=%g N=%d", m, lambda, n);
                expect(sol.converged, "convergence " + tag);
                expect(row_sum_error(sol.chain.p) < 1e-12, "departure chain rows " + tag);
                expect(stationary_residual(sol.chain.pi_d, sol.chain.p) < 1e-10, "departure stationary " + tag);
                double a = 0, b = 0, c = 0;
                for (double x : sol.chain.pi_d) a += x;
                for (double x : sol.steady.pi_s) b += x;
                for (double x : sol.steady.psi) c += x;
                expect(std::abs(a - 1) < 1e-12 && std::abs(b - 1) < 1e-10 && std::abs(c - 1) < 1e-10,
                       "normalizations " + tag);
                const auto& ct = sol.contention;
                expect(std::abs(ct.p_e + ct.p_cf + ct.p_c - 1) < 1e-12, "slot probabilities " + tag);
                expect(ct.gamma >= static_cast<double>(cfg.slot_sigma), "slot duration " + tag);
            }
        }
    }

    // Simulator conservation and determinism.
    for (int n : {1, 4, 12}) {
        for (double lambda : {5.0, 30.0}) {
            ScenarioConfig cfg;
            cfg.n_nodes = n;
            cfg.arrival_rate = lambda;
            cfg.buffer_size = 10;
            for (bool limited : {false, true}) {
                if (limited) cfg.retry_limit = 2;
                SimOptions opts;
                opts.audit = true;
                const auto s1 = run(cfg, 77, 60 * kSecond, 6 * kSecond, opts);
                const auto s2 = run(cfg, 77, 60 * kSecond, 6 * kSecond, opts);
                const std::string tag = fmt("N=%d lambda=%g limit=%d", n, lambda, limited ? 1 : 0);
                expect(s1.lifetime_arrivals ==
                           s1.lifetime_delivered + s1.lifetime_blocked + s1.lifetime_discarded + s1.queued_at_end,
                       "conservation " + tag);
                expect(s1 == s2, "determinism " + tag);
            }
        }
    }
    const double dt = seconds_since(t0);
    o.pass = failures == 0 && dt < 120;
    o.summary = fmt("%d of %d invariant checks hold, %.1f s (limit 120 s)", checks - failures, checks, dt);
    return o;
}

std::set<int> parse_list(const std::string& s) {
    std::set<int> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (!item.empty()) out.insert(std::stoi(item));
    }
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    std::set<int> allowed;
    for (int i = 1; i < argc; ++i) {
        const std::string a = argv[i];
        if (a == "--quick") {
            g_quick = true;
        } else if (a == "--allow-fail" && i + 1 < argc) {
            allowed = parse_list(argv[++i]);
        } else {
            std::fprintf(stderr, "usage: %s [--allow-fail N[,N...]] [--quick]\n", argv[0]);
            return 2;
        }
    }

    const char* names[] = {"",
                           "M/M/1/K oracle equivalence",
                           "retransmission-chain oracles",
                           "N=1 closed form",
                           "model-vs-simulation agreement",
                           "antenna ordering at 20 dB",
                           "s_min ordering at 40 dB",
                           "model bias direction",
                           "invariant suites"};
    std::vector<Outcome> results(9);
    results[1] = mm1k_equivalence();
    results[2] = retx_oracles();
    results[3] = lone_node();
    const auto t0 = std::chrono::steady_clock::now();
    const auto grid = run_grid();
    results[4] = agreement(grid, seconds_since(t0));
    results[5] = antenna_ordering(grid);
    results[6] = smin_ordering();
    results[7] = bias_direction(grid);
    results[8] = invariants();

    int unexpected = 0;
    int passed = 0;
    for (int c = 1; c <= 8; ++c) {
        const auto& r = results[static_cast<std::size_t>(c)];
        std::printf("%s criterion %d (%s): %s\n", r.pass ? "PASS" : "FAIL", c, names[c], r.summary.c_str());
        for (const auto& d : r.details) std::printf("    %s\n", d.c_str());
        if (r.pass) ++passed;
        else if (!allowed.count(c)) ++unexpected;
    }
    std::printf("%d of 8 criteria passed", passed);
    if (passed < 8 && unexpected == 0) std::printf("; remaining failures are listed as known");
    std::printf("\n");
    return unexpected == 0 ? 0 : 1;
}
