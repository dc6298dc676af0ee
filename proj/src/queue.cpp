#include "mptmac/queue.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "mptmac/errors.hpp"
#include "mptmac/linalg.hpp"

namespace mptmac {

namespace {

constexpr double kNegativeTol = 1e-9;
constexpr double kClampTol = 1e-12;

double service_mean(const std::vector<double>& ex_by_size, int s) {
    const double ex = ex_by_size.at(static_cast<std::size_t>(s - 1));
    if (!(ex > 0.0) || !std::isfinite(ex)) {
        throw std::invalid_argument("service time for batch size " + std::to_string(s) +
                                    " must be positive and finite");
    }
    return ex;
}

}  // namespace

void QueueShape::validate() const {
    if (buffer_size < 1 || s_min < 1 || s_min > s_max || s_max > buffer_size) {
        throw std::invalid_argument("queue shape requires 1 <= s_min <= s_max <= K");
    }
    if (num_departure_states() > 10000) {
        throw std::invalid_argument("queue chains above 10000 states are not supported");
    }
}

int batch_size_policy(int q, int s_min, int s_max) { return std::max(s_min, std::min(q, s_max)); }

double arrival_count_pmf(int v, double lambda, double mu) {
    if (v < 0) return 0.0;
    const double total = mu + lambda;
    return (mu / total) * std::pow(lambda / total, v);
}

Eigen::MatrixXd transition_matrix(double lambda, const std::vector<double>& ex_by_size,
                                  const QueueShape& shape) {
    shape.validate();
    const int n = shape.num_departure_states();
    Eigen::MatrixXd p = Eigen::MatrixXd::Zero(n, n);
    for (int i = 0; i < n; ++i) {
        const int s = batch_size_policy(i, shape.s_min, shape.s_max);
        const int base = std::max(i - shape.s_max, 0);
        const int top = shape.buffer_size - s;
        const double mu = 1.0 / service_mean(ex_by_size, s);
        double row = 0.0;
        for (int j = base; j < top; ++j) {
            p(i, j) = arrival_count_pmf(j - base, lambda, mu);
            row += p(i, j);
        }
        // The last reachable state absorbs every arrival count that would
        // overflow the buffer.
        p(i, top) = std::max(0.0, 1.0 - row);
    }
    return p;
}

std::vector<double> departure_distribution(const Eigen::MatrixXd& p) {
    return stationary_distribution(p);
}

std::vector<double> initial_batch_distribution(const std::vector<double>& pi_d,
                                               const QueueShape& shape) {
    std::vector<double> psi(static_cast<std::size_t>(shape.s_max), 0.0);
    for (std::size_t q = 0; q < pi_d.size(); ++q) {
        const int s = batch_size_policy(static_cast<int>(q), shape.s_min, shape.s_max);
        psi[static_cast<std::size_t>(s - 1)] += pi_d[q];
    }
    return psi;
}

EpochDurations epoch_durations(const std::vector<double>& pi_d,
                               const std::vector<double>& ex_by_size, double lambda,
                               const QueueShape& shape) {
    EpochDurations e;
    e.per_state.resize(pi_d.size());
    for (std::size_t i = 0; i < pi_d.size(); ++i) {
        const int state = static_cast<int>(i);
        const int s = batch_size_policy(state, shape.s_min, shape.s_max);
        const double idle = std::max(shape.s_min - state, 0) / lambda;
        e.per_state[i] = idle + service_mean(ex_by_size, s);
        e.mean += pi_d[i] * e.per_state[i];
    }
    return e;
}

std::vector<double> steady_state_distribution(const std::vector<double>& pi_d,
                                              const Eigen::MatrixXd& p, double mean_epoch,
                                              double lambda, const QueueShape& shape) {
    const int k_max = shape.buffer_size;
    const int n = static_cast<int>(pi_d.size());
    if (n != shape.num_departure_states() || p.rows() != n) {
        throw std::invalid_argument("departure distribution does not match the queue shape");
    }
    // tail[i][t] = sum_{j >= t} p(i, j), so each inner sum is one lookup.
    Eigen::MatrixXd tail = Eigen::MatrixXd::Zero(n, n + 1);
    for (int i = 0; i < n; ++i) {
        for (int j = n - 1; j >= 0; --j) tail(i, j) = tail(i, j + 1) + p(i, j);
    }

    const double scale = 1.0 / (lambda * mean_epoch);
    std::vector<double> pi_s(static_cast<std::size_t>(k_max + 1), 0.0);
    double sum = 0.0;
    for (int k = 0; k < k_max; ++k) {
        double acc = 0.0;
        for (int i = 0; i <= std::min(k, n - 1); ++i) {
            const int s = batch_size_policy(i, shape.s_min, shape.s_max);
            const int lo = std::max(k + 1 - s, std::max(i - shape.s_max, 0));
            const int hi = k_max - s;
            if (lo > hi) continue;
            acc += pi_d[static_cast<std::size_t>(i)] * (tail(i, lo) - tail(i, hi + 1));
        }
        pi_s[static_cast<std::size_t>(k)] = scale * acc;
        sum += pi_s[static_cast<std::size_t>(k)];
    }
    double last = 1.0 - sum;
    if (last < -kNegativeTol) {
        throw ModelError(ModelErrorKind::Inconsistent,
                         "steady-state mass exceeds 1 before the full-buffer state");
    }
    pi_s[static_cast<std::size_t>(k_max)] = std::max(last, 0.0);
    for (double& v : pi_s) {
        if (v < 0.0 && v >= -kClampTol) v = 0.0;
    }
    return pi_s;
}

QueueMetrics metrics(const std::vector<double>& pi_s, double lambda_pkt_s, int n_nodes,
                     int s_min) {
    QueueMetrics m;
    m.blocking = pi_s.back();
    for (std::size_t q = 0; q < pi_s.size(); ++q) m.mean_queue += static_cast<double>(q) * pi_s[q];
    double below = 0.0;
    for (int q = 0; q < s_min && q < static_cast<int>(pi_s.size()); ++q) {
        below += pi_s[static_cast<std::size_t>(q)];
    }
    m.rho = std::clamp(1.0 - below, 0.0, 1.0);
    const double accepted = lambda_pkt_s * (1.0 - m.blocking);
    m.throughput = n_nodes * accepted;
    if (!(accepted > 0.0)) {
        throw ModelError(ModelErrorKind::NoThroughput, "no accepted traffic; delay undefined");
    }
    m.delay = m.mean_queue / accepted;
    return m;
}

QueueSolution solve_queue(double lambda_pkt_s, const std::vector<double>& ex_by_size_us,
                          const QueueShape& shape, int n_nodes) {
    const double lambda_us = lambda_pkt_s * 1e-6;
    QueueSolution sol;
    sol.chain.shape = shape;
    sol.chain.p = transition_matrix(lambda_us, ex_by_size_us, shape);
    sol.chain.pi_d = departure_distribution(sol.chain.p);
    sol.steady.psi = initial_batch_distribution(sol.chain.pi_d, shape);
    const EpochDurations epochs = epoch_durations(sol.chain.pi_d, ex_by_size_us, lambda_us, shape);
    sol.steady.et_i = epochs.per_state;
    sol.steady.et = epochs.mean;
    sol.steady.pi_s =
        steady_state_distribution(sol.chain.pi_d, sol.chain.p, epochs.mean, lambda_us, shape);
    sol.steady.metrics = metrics(sol.steady.pi_s, lambda_pkt_s, n_nodes, shape.s_min);
    return sol;
}

}  // namespace mptmac
