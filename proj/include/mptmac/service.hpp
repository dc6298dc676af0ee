#pragma once

#include <vector>

#include "mptmac/config.hpp"
#include "mptmac/timing.hpp"

namespace mptmac {

// Per-size vectors in this module have length M; element s-1 belongs to
// batch (or attempt) size s. Distributions over batch sizes (psi) are zero
// outside [s_min, s_max]. attempt_dists[s-1][m-1] is p_{m|s}.
using SizeVector = std::vector<double>;

/// Mean number of backoff slots, (CW - 1) / 2.
double mean_backoff_slots(int cw);
/// Per-slot transmission probability of a node that holds a batch with
/// probability rho.
double tx_probability(double rho, int cw);
/// Probability that a transmission overlaps with another one.
double collision_probability(double tau, int n_nodes);

struct SlotProbabilities {
    double empty = 1.0;
    double collision_free = 0.0;
    double collision = 0.0;
};

/// What a backoff slot of the reference node contains.
SlotProbabilities slot_probabilities(double tau, int n_nodes);

/// Average collision-free attempt duration for a batch initially of size s.
double expected_cf_duration(int s, const std::vector<SizeVector>& attempt_dists,
                            const TimingTable& timing);
/// Average collision duration for a batch initially of size s, assuming the
/// other party is a single node whose batch size follows psi.
double expected_collision_duration(int s, const std::vector<SizeVector>& attempt_dists,
                                   const SizeVector& psi, const TimingTable& timing);

/// T-bar quantities for every initial batch size, plus their psi-averages.
struct TransmissionDurations {
    SizeVector t_cf_bar;
    SizeVector t_c_bar;
    double t_cf_mean = 0.0;
    double t_c_mean = 0.0;
};

TransmissionDurations transmission_durations(const SizeVector& psi,
                                             const std::vector<SizeVector>& attempt_dists,
                                             const TimingTable& timing);

/// Mean backoff-slot length gamma in microseconds.
double avg_slot_duration(const SlotProbabilities& slots, double t_cf_mean, double t_c_mean,
                         const ScenarioConfig& cfg);

struct ContentionState {
    double tau = 0.0;
    double tau_sat = 0.0;
    double rho = 0.0;
    double p = 0.0;
    double p_e = 1.0;
    double p_cf = 0.0;
    double p_c = 0.0;
    double gamma = 0.0;  // us
    double eb = 0.0;     // slots
};

ContentionState contention_state(double rho, const ScenarioConfig& cfg,
                                 const TransmissionDurations& durations);

/// Inputs of the expected service time of one batch size.
struct AttemptCosts {
    double upsilon_cf = 1.0;  // collision-free attempts to clear the batch
    double t_cf_bar = 0.0;    // us
    double t_c_bar = 0.0;     // us
};

/// E[X(s)] in microseconds. Throws ModelError(SaturationDivergence) when
/// p >= 1.
double expected_service_time(const AttemptCosts& costs, const ContentionState& contention,
                             const ScenarioConfig& cfg);

/// sum_s psi(s) E[X(s)]
double mean_service_time(const SizeVector& psi, const SizeVector& ex);

struct ServiceTimes {
    SizeVector ex;       // E[X(s)], us
    double ex_mean = 0;  // E[X], us
    TransmissionDurations durations;
    SizeVector upsilon;  // Upsilon_cf(s) * Upsilon_c
};

ServiceTimes service_times(const ContentionState& contention,
                           const TransmissionDurations& durations,
                           const SizeVector& upsilon_cf, const SizeVector& psi,
                           const ScenarioConfig& cfg);

}  // namespace mptmac
