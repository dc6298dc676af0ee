#include <doctest.h>

#include <cmath>

#include "mptmac/fixed_point.hpp"

using namespace mptmac;

namespace {

bool rel_close(double a, double b, double tol) {
    return std::abs(a - b) <= tol * std::max({std::abs(a), std::abs(b), 1e-12});
}

}  // namespace

TEST_CASE("a lone node converges at once") {
    ScenarioConfig cfg;
    cfg.n_nodes = 1;
    for (double rho0 : {0.0, 0.3, 1.0}) {
        SolveOptions o;
        o.initial_rho = rho0;
        const auto sol = solve(cfg, o);
        CHECK(sol.converged);
        CHECK(sol.iterations <= 2);
        CHECK(sol.contention.p == 0.0);
        CHECK(sol.contention.gamma == 20.0);
    }
}

TEST_CASE("light traffic") {
    ScenarioConfig cfg;
    cfg.arrival_rate = 1e-3;
    const auto sol = solve(cfg);
    CHECK(sol.converged);
    CHECK(sol.metrics().rho < 1e-3);
    CHECK(sol.metrics().blocking < 1e-12);
    CHECK(sol.metrics().throughput == doctest::Approx(cfg.n_nodes * cfg.arrival_rate));
}

TEST_CASE("solution invariants") {
    ScenarioConfig cfg;
    cfg.n_nodes = 8;
    cfg.arrival_rate = 15;
    const auto sol = solve(cfg);
    REQUIRE(sol.converged);
    CHECK(sol.residual <= 1e-6);
    CHECK(sol.trace.size() == static_cast<std::size_t>(sol.iterations));
    double psi = 0.0;
    for (double x : sol.steady.psi) psi += x;
    CHECK(std::abs(psi - 1.0) < 1e-10);
    double pis = 0.0;
    for (double x : sol.steady.pi_s) pis += x;
    CHECK(std::abs(pis - 1.0) < 1e-10);
    CHECK(sol.contention.tau == sol.contention.rho * sol.contention.tau_sat);
    CHECK(sol.service.ex[1] >= sol.service.ex[0]);
}

TEST_CASE("solve is deterministic") {
    ScenarioConfig cfg;
    cfg.n_nodes = 12;
    const auto a = solve(cfg);
    const auto b = solve(cfg);
    CHECK(a.iterations == b.iterations);
    CHECK(a.steady.pi_s == b.steady.pi_s);
    CHECK(a.metrics().throughput == b.metrics().throughput);
}

TEST_CASE("solution does not depend on the initial guess") {
    for (int m : {2, 4}) {
        for (double lambda : {5.0, 15.0}) {
            for (int n : {2, 4, 8, 12}) {
                ScenarioConfig cfg;
                cfg.m_antennas = m;
                cfg.arrival_rate = lambda;
                cfg.n_nodes = n;
                SolveOptions base;
                const auto ref = solve(cfg, base);
                for (double rho0 : {0.1, 0.5}) {
                    SolveOptions o;
                    o.initial_rho = rho0;
                    const auto other = solve(cfg, o);
                    CAPTURE(m);
                    CAPTURE(lambda);
                    CAPTURE(n);
                    CAPTURE(rho0);
                    CHECK(rel_close(ref.metrics().throughput, other.metrics().throughput, 1e-5));
                    CHECK(rel_close(ref.metrics().delay, other.metrics().delay, 1e-5));
                    CHECK(rel_close(ref.contention.p, other.contention.p, 1e-5));
                }
            }
        }
    }
}

TEST_CASE("non-convergence is reported, not thrown") {
    ScenarioConfig cfg;
    cfg.n_nodes = 10;
    SolveOptions o;
    o.max_iters = 2;
    const auto sol = solve(cfg, o);
    CHECK_FALSE(sol.converged);
    CHECK(sol.iterations == 2);
    o.damping = 0.0;
    CHECK_THROWS(solve(cfg, o));
}

TEST_CASE("sweeps") {
    ScenarioConfig cfg;
    const auto pts = sweep(cfg, {"n_nodes", {2, 4, 8}});
    REQUIRE(pts.size() == 3);
    CHECK(pts[2].config.n_nodes == 8);
    for (const auto& p : pts) CHECK(p.solution.has_value());

    const auto bad = sweep(cfg, {"s_max", {2, 3}});
    CHECK(bad[0].solution.has_value());
    CHECK_FALSE(bad[1].solution.has_value());
    CHECK_FALSE(bad[1].error.empty());
    CHECK_THROWS(sweep(cfg, {"colour", {1}}));
    CHECK_THROWS(with_field(cfg, "n_nodes", 2.5));
}

TEST_CASE("four antennas never lose to two across an arrival-rate sweep") {
    std::vector<double> rates;
    for (double l = 1; l <= 40; l += 3) rates.push_back(l);
    for (int n : {4, 8, 12}) {
        ScenarioConfig two;
        two.n_nodes = n;
        ScenarioConfig four = two;
        four.m_antennas = 4;
        const auto a = sweep(two, {"arrival_rate", rates});
        const auto b = sweep(four, {"arrival_rate", rates});
        for (std::size_t i = 0; i < rates.size(); ++i) {
            CAPTURE(rates[i]);
            CHECK(b[i].solution->metrics().throughput >= a[i].solution->metrics().throughput * (1 - 1e-9));
        }
    }
}
