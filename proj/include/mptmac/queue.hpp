#pragma once

#include <vector>

#include <Eigen/Dense>

namespace mptmac {

/// Buffer size and batch-size bounds of the batch-service queue.
struct QueueShape {
    int buffer_size = 1;  // K
    int s_min = 1;
    int s_max = 1;

    int num_departure_states() const { return buffer_size - s_min + 1; }
    void validate() const;
};

/// Batch scheduled when q packets are queued: max(s_min, min(q, s_max)).
int batch_size_policy(int q, int s_min, int s_max);

/// P(v arrivals during an exponential service of rate mu) with Poisson
/// arrivals of rate lambda; geometric in v.
double arrival_count_pmf(int v, double lambda, double mu);

/// Embedded chain at departure instants over states 0..K-s_min.
///
/// ex_by_size[s-1] is the mean service time of a batch of s packets, in the
/// time unit of 1/lambda. Rows below s_min equal row s_min.
Eigen::MatrixXd transition_matrix(double lambda, const std::vector<double>& ex_by_size,
                                  const QueueShape& shape);

std::vector<double> departure_distribution(const Eigen::MatrixXd& p);

/// Psi(s), s = 1..s_max (element s-1): probability that a freshly
/// scheduled batch holds s packets.
std::vector<double> initial_batch_distribution(const std::vector<double>& pi_d,
                                               const QueueShape& shape);

struct EpochDurations {
    std::vector<double> per_state;  // E[T(i)]
    double mean = 0.0;              // E[T]
};

EpochDurations epoch_durations(const std::vector<double>& pi_d,
                               const std::vector<double>& ex_by_size, double lambda,
                               const QueueShape& shape);

/// Arbitrary-time occupancy distribution over 0..K, lifted from the
/// departure distribution through PASTA.
std::vector<double> steady_state_distribution(const std::vector<double>& pi_d,
                                              const Eigen::MatrixXd& p, double mean_epoch,
                                              double lambda, const QueueShape& shape);

struct QueueMetrics {
    double throughput = 0.0;   // S, packets/s over all nodes
    double delay = 0.0;        // E[D], seconds
    double blocking = 0.0;     // p_b
    double mean_queue = 0.0;   // E[Q], packets
    double rho = 0.0;          // P(q >= s_min)
};

/// lambda_pkt_s is the per-node arrival rate in packets/s.
QueueMetrics metrics(const std::vector<double>& pi_s, double lambda_pkt_s, int n_nodes,
                     int s_min);

struct DepartureChain {
    QueueShape shape;
    Eigen::MatrixXd p;
    std::vector<double> pi_d;
};

struct SteadyState {
    std::vector<double> pi_s;
    std::vector<double> psi;      // length s_max
    std::vector<double> et_i;     // us
    double et = 0.0;              // us
    QueueMetrics metrics;
};

struct QueueSolution {
    DepartureChain chain;
    SteadyState steady;
};

/// Full queue solve for one node. ex_by_size in microseconds, arrival rate
/// in packets/s.
QueueSolution solve_queue(double lambda_pkt_s, const std::vector<double>& ex_by_size_us,
                          const QueueShape& shape, int n_nodes);

}  // namespace mptmac
