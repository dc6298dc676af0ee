#include "mptmac/service.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "mptmac/errors.hpp"
#include "mptmac/retx.hpp"

namespace mptmac {

double mean_backoff_slots(int cw) {
    if (cw < 1) throw std::invalid_argument("cw must be >= 1");
    return (cw - 1) / 2.0;
}

double tx_probability(double rho, int cw) {
    if (!(rho >= 0.0 && rho <= 1.0)) throw std::invalid_argument("rho outside [0, 1]");
    return rho / (mean_backoff_slots(cw) + 1.0);
}

double collision_probability(double tau, int n_nodes) {
    if (n_nodes < 1) throw std::invalid_argument("n_nodes must be >= 1");
    return 1.0 - std::pow(1.0 - tau, n_nodes - 1);
}

SlotProbabilities slot_probabilities(double tau, int n_nodes) {
    if (n_nodes < 1) throw std::invalid_argument("n_nodes must be >= 1");
    if (n_nodes == 1) return {};
    SlotProbabilities sp;
    sp.empty = std::pow(1.0 - tau, n_nodes - 1);
    sp.collision_free = (n_nodes - 1) * tau * std::pow(1.0 - tau, n_nodes - 2);
    sp.collision = std::max(0.0, 1.0 - sp.empty - sp.collision_free);
    return sp;
}

double expected_cf_duration(int s, const std::vector<SizeVector>& attempt_dists,
                            const TimingTable& timing) {
    const SizeVector& dist = attempt_dists.at(static_cast<std::size_t>(s - 1));
    double t = 0.0;
    for (int m = 1; m <= s; ++m) {
        t += dist[static_cast<std::size_t>(m - 1)] * static_cast<double>(timing.cf(m));
    }
    return t;
}

double expected_collision_duration(int s, const std::vector<SizeVector>& attempt_dists,
                                   const SizeVector& psi, const TimingTable& timing) {
    const SizeVector& own = attempt_dists.at(static_cast<std::size_t>(s - 1));
    double t = 0.0;
    for (std::size_t s1 = 1; s1 <= psi.size(); ++s1) {
        const double w = psi[s1 - 1];
        if (w == 0.0) continue;
        const SizeVector& other = attempt_dists.at(s1 - 1);
        double inner = 0.0;
        for (std::size_t i = 1; i <= s1; ++i) {
            for (int j = 1; j <= s; ++j) {
                const auto longest = std::max(static_cast<int>(i), j);
                inner += other[i - 1] * own[static_cast<std::size_t>(j - 1)] *
                         static_cast<double>(timing.c(longest));
            }
        }
        t += w * inner;
    }
    return t;
}

TransmissionDurations transmission_durations(const SizeVector& psi,
                                             const std::vector<SizeVector>& attempt_dists,
                                             const TimingTable& timing) {
    const auto m = attempt_dists.size();
    TransmissionDurations d;
    d.t_cf_bar.assign(m, 0.0);
    d.t_c_bar.assign(m, 0.0);
    for (std::size_t s = 1; s <= m; ++s) {
        d.t_cf_bar[s - 1] = expected_cf_duration(static_cast<int>(s), attempt_dists, timing);
        d.t_c_bar[s - 1] =
            expected_collision_duration(static_cast<int>(s), attempt_dists, psi, timing);
        d.t_cf_mean += psi[s - 1] * d.t_cf_bar[s - 1];
        d.t_c_mean += psi[s - 1] * d.t_c_bar[s - 1];
    }
    return d;
}

double avg_slot_duration(const SlotProbabilities& slots, double t_cf_mean, double t_c_mean,
                         const ScenarioConfig& cfg) {
    const double sigma = static_cast<double>(cfg.slot_sigma);
    const double gap = static_cast<double>(cfg.difs) + sigma;
    return slots.empty * sigma + slots.collision_free * (t_cf_mean + gap) +
           slots.collision * (t_c_mean + gap);
}

ContentionState contention_state(double rho, const ScenarioConfig& cfg,
                                 const TransmissionDurations& durations) {
    ContentionState c;
    c.rho = rho;
    c.eb = mean_backoff_slots(cfg.cw);
    c.tau_sat = 1.0 / (c.eb + 1.0);
    c.tau = rho * c.tau_sat;
    c.p = collision_probability(c.tau, cfg.n_nodes);
    const SlotProbabilities slots = slot_probabilities(c.tau, cfg.n_nodes);
    c.p_e = slots.empty;
    c.p_cf = slots.collision_free;
    c.p_c = slots.collision;
    c.gamma = avg_slot_duration(slots, durations.t_cf_mean, durations.t_c_mean, cfg);
    return c;
}

double expected_service_time(const AttemptCosts& costs, const ContentionState& contention,
                             const ScenarioConfig& cfg) {
    const double upsilon_c = expected_attempts_per_cf(contention.p);
    const double gap = static_cast<double>(cfg.difs + cfg.slot_sigma);
    const double backoff = costs.upsilon_cf * upsilon_c * contention.eb * contention.gamma;
    const double busy = costs.upsilon_cf * ((costs.t_cf_bar + gap) +
                                            (upsilon_c - 1.0) * (costs.t_c_bar + gap));
    return backoff + busy;
}

double mean_service_time(const SizeVector& psi, const SizeVector& ex) {
    if (psi.size() != ex.size()) throw std::invalid_argument("psi and E[X] sizes differ");
    double total = 0.0;
    for (std::size_t k = 0; k < psi.size(); ++k) {
        if (psi[k] != 0.0) total += psi[k] * ex[k];
    }
    return total;
}

ServiceTimes service_times(const ContentionState& contention,
                           const TransmissionDurations& durations,
                           const SizeVector& upsilon_cf, const SizeVector& psi,
                           const ScenarioConfig& cfg) {
    const double upsilon_c = expected_attempts_per_cf(contention.p);
    ServiceTimes st;
    st.durations = durations;
    const auto m = upsilon_cf.size();
    st.ex.assign(m, 0.0);
    st.upsilon.assign(m, 0.0);
    for (std::size_t s = 0; s < m; ++s) {
        const AttemptCosts costs{upsilon_cf[s], durations.t_cf_bar[s], durations.t_c_bar[s]};
        st.ex[s] = expected_service_time(costs, contention, cfg);
        st.upsilon[s] = upsilon_cf[s] * upsilon_c;
    }
    st.ex_mean = mean_service_time(psi, st.ex);
    return st;
}

}  // namespace mptmac
