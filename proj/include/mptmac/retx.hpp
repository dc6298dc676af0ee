#pragma once

#include <vector>

#include <Eigen/Dense>

#include "mptmac/channel.hpp"

namespace mptmac {

/// Probability that a collision-free attempt carrying i packets leaves j of
/// them unacknowledged: C(i, i-j) (1 - PER(i))^(i-j) PER(i)^j.
double error_transition_prob(int i, int j, const PerTable& per_table);

/// Absorbing chain over the number of still-unacknowledged packets of a batch
/// initially holding s packets. State 0 (all acknowledged) absorbs.
class ErrorChain {
public:
    ErrorChain(int s, const PerTable& per_table);

    int s() const { return s_; }
    /// (s+1)x(s+1) transition matrix over states 0..s.
    const Eigen::MatrixXd& p_hat() const { return p_hat_; }
    /// Transient block over states 1..s (row/column k is state k+1).
    const Eigen::MatrixXd& q_block() const { return q_; }
    /// N = (I - Q)^-1. Throws ModelError(NoAbsorption) if I - Q is singular.
    Eigen::MatrixXd fundamental() const;
    /// Expected number of collision-free attempts until absorption, starting
    /// from each of the states 1..s: N * 1.
    std::vector<double> expected_attempts() const;

private:
    int s_;
    Eigen::MatrixXd p_hat_;
    Eigen::MatrixXd q_;
};

/// Upsilon_cf(i) for i = 1..s, element i-1. A chain built for s = M yields
/// every smaller batch size at once.
std::vector<double> expected_cf_attempts(int s, const PerTable& per_table);

/// Expected attempts per collision-free attempt, 1 / (1 - p).
double expected_attempts_per_cf(double p);

/// The error chain with absorption redirected to a fresh batch of size s,
/// over states 1..s; its stationary vector is p_{m|s}.
class AttemptSizeChain {
public:
    AttemptSizeChain(int s, const PerTable& per_table);

    int s() const { return s_; }
    const Eigen::MatrixXd& p_tilde() const { return p_tilde_; }
    /// stationary()[m-1] = p_{m|s}
    const std::vector<double>& stationary() const { return stationary_; }
    /// Long-run fraction of steps that complete a batch,
    /// sum_m p_{m|s} * p_hat(m, 0).
    double completion_rate() const { return completion_rate_; }

private:
    int s_;
    Eigen::MatrixXd p_tilde_;
    std::vector<double> stationary_;
    double completion_rate_ = 0.0;
};

std::vector<double> attempt_size_distribution(int s, const PerTable& per_table);

}  // namespace mptmac
