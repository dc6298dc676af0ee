#pragma once

#include <vector>

#include "mptmac/config.hpp"

namespace mptmac {

/// Packet error rate of each of m spatial streams under zero-forcing
/// detection with M receive antennas: the probability that a chi-square
/// post-processing SNR with 2(M - m + 1) degrees of freedom falls below
/// xi_ref. SNRs are linear ratios.
double per(int m, int m_antennas, double snr_linear, double snr_ref_linear);

/// PER(m) for m = 1..M. Immutable once built.
class PerTable {
public:
    PerTable(int m_antennas, double snr_linear, double snr_ref_linear);
    explicit PerTable(const ScenarioConfig& cfg);

    /// Explicit per-size error rates, e.g. an error-free channel. values[m-1]
    /// is PER(m); every entry must lie in [0, 1].
    static PerTable from_values(std::vector<double> values);
    static PerTable error_free(int m_antennas) {
        return from_values(std::vector<double>(static_cast<std::size_t>(m_antennas), 0.0));
    }

    int m_antennas() const { return static_cast<int>(per_.size()); }
    double operator()(int m) const { return per_.at(static_cast<std::size_t>(m - 1)); }
    const std::vector<double>& values() const { return per_; }
    double snr_linear() const { return snr_linear_; }
    double snr_ref_linear() const { return snr_ref_linear_; }

private:
    PerTable() = default;

    std::vector<double> per_;
    double snr_linear_ = 0.0;
    double snr_ref_linear_ = 0.0;
};

}  // namespace mptmac
