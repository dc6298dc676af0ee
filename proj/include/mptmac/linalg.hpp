#pragma once

#include <vector>

#include <Eigen/Dense>

namespace mptmac {

/// Stationary row vector pi = pi * P, sum(pi) = 1, of a row-stochastic P.
///
/// Replaces the last balance equation with the normalization condition and
/// solves the dense system by LU with partial pivoting. Falls back to power
/// iteration when the direct solution fails its residual check. Throws
/// ModelError(ReducibleChain) when neither route produces a distribution.
std::vector<double> stationary_distribution(const Eigen::MatrixXd& p);

/// max_j |(pi * P)_j - pi_j|
double stationary_residual(const std::vector<double>& pi, const Eigen::MatrixXd& p);

/// max_i |sum_j P_ij - 1|
double row_sum_error(const Eigen::MatrixXd& p);

}  // namespace mptmac
