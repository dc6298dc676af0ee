#include <doctest.h>

#include <cmath>

#include "mptmac/errors.hpp"
#include "mptmac/retx.hpp"
#include "mptmac/service.hpp"

using namespace mptmac;

namespace {

std::vector<SizeVector> deterministic_sizes(int s_max) {
    std::vector<SizeVector> d;
    for (int s = 1; s <= s_max; ++s) {
        SizeVector v(static_cast<std::size_t>(s), 0.0);
        v.back() = 1.0;
        d.push_back(v);
    }
    return d;
}

bool close(double a, double b, double tol) { return std::abs(a - b) <= tol; }

}  // namespace

TEST_CASE("transmission and collision probabilities") {
    CHECK(tx_probability(1.0, 32) == doctest::Approx(1.0 / 16.5));
    CHECK(tx_probability(0.0, 32) == 0.0);
    CHECK(tx_probability(0.5, 2) == doctest::Approx(1.0 / 3.0));
    CHECK(collision_probability(0.3, 1) == 0.0);
    CHECK(collision_probability(0.0, 5) == 0.0);
    CHECK(collision_probability(0.1, 3) == doctest::Approx(0.19));
}

TEST_CASE("slot probabilities") {
    const auto one = slot_probabilities(0.4, 1);
    CHECK(one.empty == 1.0);
    CHECK(one.collision_free == 0.0);
    CHECK(one.collision == 0.0);
    const auto two = slot_probabilities(0.5, 2);
    CHECK(two.empty == doctest::Approx(0.5));
    CHECK(two.collision_free == doctest::Approx(0.5));
    CHECK(close(two.collision, 0.0, 1e-15));
    const auto four = slot_probabilities(0.1, 4);
    CHECK(four.empty == doctest::Approx(0.729));
    CHECK(four.collision_free == doctest::Approx(0.243));
    CHECK(four.collision == doctest::Approx(0.028));
    for (int n = 1; n <= 40; ++n) {
        for (double tau = 0.0; tau <= 1.0; tau += 0.05) {
            const auto sp = slot_probabilities(tau, n);
            CHECK(close(sp.empty + sp.collision_free + sp.collision, 1.0, 1e-12));
        }
    }
}

TEST_CASE("expected transmission durations") {
    ScenarioConfig cfg;
    const TimingTable timing(cfg);
    const auto clean = deterministic_sizes(2);
    CHECK(expected_cf_duration(1, clean, timing) == 11284);
    CHECK(expected_cf_duration(2, clean, timing) == 11796);
    const std::vector<SizeVector> even{{1.0}, {0.5, 0.5}};
    CHECK(expected_cf_duration(2, even, timing) == doctest::Approx(11540));

    CHECK(expected_collision_duration(1, clean, {1.0, 0.0}, timing) == 11284);
    CHECK(expected_collision_duration(2, clean, {0.0, 1.0}, timing) == 11796);
    const SizeVector psi{0.5, 0.5};
    CHECK(expected_collision_duration(1, clean, psi, timing) == doctest::Approx(11540));
    CHECK(expected_collision_duration(2, clean, psi, timing) == doctest::Approx(11796));

    const auto d = transmission_durations(psi, clean, timing);
    CHECK(d.t_cf_mean == doctest::Approx(11540));
    CHECK(d.t_c_mean == doctest::Approx(0.5 * 11540 + 0.5 * 11796));

    const PerTable per(2, snr_db_to_linear(20), snr_db_to_linear(15));
    const std::vector<SizeVector> real{attempt_size_distribution(1, per), attempt_size_distribution(2, per)};
    const double t2 = expected_cf_duration(2, real, timing);
    CHECK(t2 >= timing.cf(1));
    CHECK(t2 <= timing.cf(2));
}

TEST_CASE("average slot duration") {
    ScenarioConfig cfg;
    CHECK(avg_slot_duration({1.0, 0.0, 0.0}, 11284, 11796, cfg) == 20.0);
    CHECK(avg_slot_duration({0.0, 1.0, 0.0}, 11284, 11796, cfg) == 11354.0);
    cfg.n_nodes = 1;
    const auto c = contention_state(1.0, cfg, transmission_durations({0, 1}, deterministic_sizes(2), TimingTable(cfg)));
    CHECK(c.p == 0.0);
    CHECK(c.p_cf == 0.0);
    CHECK(c.p_c == 0.0);
    CHECK(c.gamma == 20.0);
}

TEST_CASE("contention state invariants") {
    ScenarioConfig cfg;
    const TimingTable timing(cfg);
    const auto d = transmission_durations({0.3, 0.7}, deterministic_sizes(2), timing);
    for (int n = 1; n <= 30; n += 3) {
        cfg.n_nodes = n;
        for (double rho = 0.0; rho <= 1.0; rho += 0.125) {
            const auto c = contention_state(rho, cfg, d);
            CHECK(c.tau == rho * c.tau_sat);
            CHECK(c.tau <= c.tau_sat);
            CHECK(c.tau_sat <= 1.0);
            CHECK(close(c.p_e + c.p_cf + c.p_c, 1.0, 1e-12));
            CHECK(c.gamma >= static_cast<double>(cfg.slot_sigma));
        }
    }
}

TEST_CASE("service time of a lone node") {
    ScenarioConfig cfg;
    cfg.n_nodes = 1;
    ContentionState c;
    c.eb = mean_backoff_slots(cfg.cw);
    c.gamma = 20.0;
    CHECK(expected_service_time({1.0, 11284, 11284}, c, cfg) == 11664.0);
    c.p = 1.0;
    CHECK_THROWS_AS(expected_service_time({1.0, 11284, 11284}, c, cfg), ModelError);
}

TEST_CASE("service time grows with collision probability and batch size") {
    ScenarioConfig cfg;
    ContentionState c;
    c.eb = mean_backoff_slots(cfg.cw);
    c.gamma = 300.0;
    double prev = 0.0;
    for (double p = 0.01; p <= 0.9; p += 0.01) {
        c.p = p;
        const double x = expected_service_time({1.3, 11400, 11600}, c, cfg);
        CHECK(x > prev);
        prev = x;
    }
    const PerTable per(2, snr_db_to_linear(20), snr_db_to_linear(15));
    const auto ups = expected_cf_attempts(2, per);
    const std::vector<SizeVector> sizes{attempt_size_distribution(1, per), attempt_size_distribution(2, per)};
    const TimingTable timing(cfg);
    const auto d = transmission_durations({0.5, 0.5}, sizes, timing);
    const auto st = service_times(contention_state(0.6, cfg, d), d, ups, {0.5, 0.5}, cfg);
    CHECK(st.ex[1] >= st.ex[0]);
    CHECK(st.ex_mean == doctest::Approx(0.5 * st.ex[0] + 0.5 * st.ex[1]));
}

TEST_CASE("mean service time") {
    CHECK(mean_service_time({0.0, 1.0}, {5.0, 7.0}) == 7.0);
    CHECK(mean_service_time({0.5, 0.5}, {10000, 12000}) == 11000.0);
    CHECK_THROWS(mean_service_time({1.0}, {1.0, 2.0}));
}

TEST_CASE("durations scale linearly") {
    ScenarioConfig cfg;
    cfg.n_nodes = 6;
    const TimingTable timing(cfg);
    const PerTable per(cfg);
    const std::vector<SizeVector> sizes{attempt_size_distribution(1, per), attempt_size_distribution(2, per)};
    const auto ups = expected_cf_attempts(2, per);
    const SizeVector psi{0.4, 0.6};
    const auto d = transmission_durations(psi, sizes, timing);
    const auto base = service_times(contention_state(0.7, cfg, d), d, ups, psi, cfg);

    const double k = 3.0;
    ScenarioConfig big = cfg;
    big.slot_sigma *= 3;
    big.difs *= 3;
    TransmissionDurations dk = d;
    for (auto& x : dk.t_cf_bar) x *= k;
    for (auto& x : dk.t_c_bar) x *= k;
    dk.t_cf_mean *= k;
    dk.t_c_mean *= k;
    const auto ck = contention_state(0.7, big, dk);
    const auto scaled = service_times(ck, dk, ups, psi, big);
    CHECK(ck.gamma == doctest::Approx(k * contention_state(0.7, cfg, d).gamma).epsilon(1e-12));
    for (std::size_t s = 0; s < 2; ++s) CHECK(scaled.ex[s] == doctest::Approx(k * base.ex[s]).epsilon(1e-12));
}
