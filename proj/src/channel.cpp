#include "mptmac/channel.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace mptmac {

double per(int m, int m_antennas, double snr_linear, double snr_ref_linear) {
    if (m < 1 || m > m_antennas) {
        throw std::out_of_range("batch size " + std::to_string(m) + " outside [1, " +
                                std::to_string(m_antennas) + "]");
    }
    if (!(snr_linear > 0.0)) throw std::invalid_argument("per: SNR must be positive");
    if (snr_ref_linear < 0.0) throw std::invalid_argument("per: reference SNR must be >= 0");

    const double x = static_cast<double>(m) / snr_linear * snr_ref_linear;
    if (x == 0.0) return 0.0;
    // PER is the Poisson(x) upper tail from n = M - m + 1, with terms from
    // term_k = term_{k-1} * x / k. Below the mean the tail is summed directly,
    // so small error rates keep their relative accuracy.
    const int n = m_antennas - m + 1;
    if (x < n) {
        double term = 1.0;
        for (int k = 1; k <= n; ++k) term *= x / k;
        double tail = 0.0;
        for (int k = n; term > tail * 1e-17; ++k) {
            tail += term;
            term *= x / (k + 1);
        }
        return std::clamp(tail * std::exp(-x), 0.0, 1.0);
    }
    double term = 1.0;
    double sum = 1.0;
    for (int k = 1; k < n; ++k) {
        term *= x / k;
        sum += term;
    }
    return std::clamp(1.0 - sum * std::exp(-x), 0.0, 1.0);
}

PerTable::PerTable(int m_antennas, double snr_linear, double snr_ref_linear)
    : snr_linear_(snr_linear), snr_ref_linear_(snr_ref_linear) {
    if (m_antennas < 1) throw std::invalid_argument("PerTable: m_antennas must be >= 1");
    per_.reserve(static_cast<std::size_t>(m_antennas));
    for (int m = 1; m <= m_antennas; ++m) {
        per_.push_back(per(m, m_antennas, snr_linear, snr_ref_linear));
    }
}

PerTable::PerTable(const ScenarioConfig& cfg)
    : PerTable(cfg.m_antennas, cfg.snr_linear(), cfg.snr_ref_linear()) {}

PerTable PerTable::from_values(std::vector<double> values) {
    if (values.empty()) throw std::invalid_argument("PerTable: empty table");
    for (double v : values) {
        if (!(v >= 0.0 && v <= 1.0)) throw std::invalid_argument("PerTable: PER outside [0, 1]");
    }
    PerTable t;
    t.per_ = std::move(values);
    return t;
}

}  // namespace mptmac
