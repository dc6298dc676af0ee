#include "mptmac/linalg.hpp"

#include <cmath>

#include "mptmac/errors.hpp"

namespace mptmac {

namespace {

constexpr double kResidualTol = 1e-10;
constexpr double kNegativeTol = 1e-12;

bool acceptable(const std::vector<double>& pi, const Eigen::MatrixXd& p) {
    for (double v : pi) {
        if (!std::isfinite(v) || v < -kNegativeTol) return false;
    }
    return stationary_residual(pi, p) < kResidualTol;
}

void clean(std::vector<double>& pi) {
    double sum = 0.0;
    for (double& v : pi) {
        v = std::max(v, 0.0);
        sum += v;
    }
    for (double& v : pi) v /= sum;
}

std::vector<double> power_iteration(const Eigen::MatrixXd& p) {
    const auto n = p.rows();
    Eigen::RowVectorXd pi = Eigen::RowVectorXd::Constant(n, 1.0 / static_cast<double>(n));
    // Lazy chain (I + P) / 2 has the same stationary vector and is aperiodic.
    const Eigen::MatrixXd lazy = 0.5 * (Eigen::MatrixXd::Identity(n, n) + p);
    for (int it = 0; it < 200000; ++it) {
        Eigen::RowVectorXd next = pi * lazy;
        const double delta = (next - pi).cwiseAbs().maxCoeff();
        pi = next / next.sum();
        if (delta < 1e-15) break;
    }
    return {pi.data(), pi.data() + n};
}

}  // namespace

double stationary_residual(const std::vector<double>& pi, const Eigen::MatrixXd& p) {
    const Eigen::Map<const Eigen::RowVectorXd> v(pi.data(), static_cast<Eigen::Index>(pi.size()));
    return (v * p - v).cwiseAbs().maxCoeff();
}

double row_sum_error(const Eigen::MatrixXd& p) {
    return (p.rowwise().sum().array() - 1.0).abs().maxCoeff();
}

std::vector<double> stationary_distribution(const Eigen::MatrixXd& p) {
    const auto n = p.rows();
    if (n == 0 || p.cols() != n) {
        throw ModelError(ModelErrorKind::Inconsistent, "stationary solve needs a square matrix");
    }
    if (n == 1) return {1.0};

    // (P^T - I) pi^T = 0 with the last equation replaced by sum(pi) = 1.
    Eigen::MatrixXd a = p.transpose() - Eigen::MatrixXd::Identity(n, n);
    a.row(n - 1).setOnes();
    Eigen::VectorXd b = Eigen::VectorXd::Zero(n);
    b(n - 1) = 1.0;
    const Eigen::VectorXd x = a.partialPivLu().solve(b);

    std::vector<double> pi(x.data(), x.data() + n);
    if (acceptable(pi, p)) {
        clean(pi);
        return pi;
    }
    pi = power_iteration(p);
    if (acceptable(pi, p)) {
        clean(pi);
        return pi;
    }
    throw ModelError(ModelErrorKind::ReducibleChain,
                     "no unique stationary distribution (chain reducible or ill-conditioned)");
}

}  // namespace mptmac
