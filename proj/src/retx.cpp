#include "mptmac/retx.hpp"

#include <cmath>
#include <string>

#include "mptmac/errors.hpp"
#include "mptmac/linalg.hpp"

namespace mptmac {

namespace {

double binomial(int n, int k) {
    double c = 1.0;
    for (int t = 1; t <= k; ++t) c = c * (n - k + t) / t;
    return c;
}

void check_size(int s, const PerTable& per_table) {
    if (s < 1 || s > per_table.m_antennas()) {
        throw std::out_of_range("batch size " + std::to_string(s) + " outside [1, " +
                                std::to_string(per_table.m_antennas()) + "]");
    }
}

}  // namespace

double error_transition_prob(int i, int j, const PerTable& per_table) {
    if (j < 0 || j > i) {
        throw std::out_of_range("error transition " + std::to_string(i) + " -> " +
                                std::to_string(j) + " would un-acknowledge packets");
    }
    if (i == 0) return 1.0;  // absorbing
    const double e = per_table(i);
    return binomial(i, i - j) * std::pow(1.0 - e, i - j) * std::pow(e, j);
}

ErrorChain::ErrorChain(int s, const PerTable& per_table) : s_(s) {
    check_size(s, per_table);
    p_hat_ = Eigen::MatrixXd::Zero(s + 1, s + 1);
    p_hat_(0, 0) = 1.0;
    for (int i = 1; i <= s; ++i) {
        for (int j = 0; j <= i; ++j) p_hat_(i, j) = error_transition_prob(i, j, per_table);
    }
    q_ = p_hat_.bottomRightCorner(s, s);
}

Eigen::MatrixXd ErrorChain::fundamental() const {
    const Eigen::MatrixXd i_minus_q = Eigen::MatrixXd::Identity(s_, s_) - q_;
    // I - Q is lower triangular; it is singular iff some diagonal entry
    // 1 - PER(i)^i vanishes.
    for (int k = 0; k < s_; ++k) {
        if (std::abs(i_minus_q(k, k)) < 1e-14) {
            throw ModelError(ModelErrorKind::NoAbsorption,
                             "PER(" + std::to_string(k + 1) + ") = 1: batch never clears");
        }
    }
    return i_minus_q.partialPivLu().inverse();
}

std::vector<double> ErrorChain::expected_attempts() const {
    const Eigen::VectorXd ups = fundamental() * Eigen::VectorXd::Ones(s_);
    return {ups.data(), ups.data() + s_};
}

std::vector<double> expected_cf_attempts(int s, const PerTable& per_table) {
    return ErrorChain(s, per_table).expected_attempts();
}

double expected_attempts_per_cf(double p) {
    if (!(p >= 0.0)) throw std::invalid_argument("collision probability must be >= 0");
    if (p >= 1.0) {
        throw ModelError(ModelErrorKind::SaturationDivergence,
                         "collision probability 1: no attempt is ever collision-free");
    }
    return 1.0 / (1.0 - p);
}

AttemptSizeChain::AttemptSizeChain(int s, const PerTable& per_table) : s_(s) {
    check_size(s, per_table);
    p_tilde_ = Eigen::MatrixXd::Zero(s, s);
    for (int i = 1; i <= s; ++i) {
        for (int j = 1; j <= i; ++j) p_tilde_(i - 1, j - 1) = error_transition_prob(i, j, per_table);
        // A cleared batch restarts at full size.
        p_tilde_(i - 1, s - 1) += error_transition_prob(i, 0, per_table);
    }
    stationary_ = stationary_distribution(p_tilde_);
    for (int m = 1; m <= s; ++m) {
        completion_rate_ += stationary_[static_cast<std::size_t>(m - 1)] *
                            error_transition_prob(m, 0, per_table);
    }
}

std::vector<double> attempt_size_distribution(int s, const PerTable& per_table) {
    return AttemptSizeChain(s, per_table).stationary();
}

}  // namespace mptmac
