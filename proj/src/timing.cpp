#include "mptmac/timing.hpp"

#include <cmath>
#include <sstream>

namespace mptmac {

namespace {

constexpr double kIntegralTol = 1e-6;

struct Exact {
    double us;
    Micros rounded() const { return static_cast<Micros>(std::llround(us)); }
    bool integral() const { return std::abs(us - std::round(us)) <= kIntegralTol; }
};

Exact bits_over_rate(double bits, double rate) { return {bits / rate * 1e6}; }

void check_batch(int m, const ScenarioConfig& cfg) {
    if (m < 1 || m > cfg.m_antennas) {
        throw std::out_of_range("batch size " + std::to_string(m) + " outside [1, " +
                                std::to_string(cfg.m_antennas) + "]");
    }
}

Exact data_exact(int m, const ScenarioConfig& cfg) {
    // m = 1 carries no training sequence; m >= 2 carries one per stream.
    const double training = m == 1 ? 0.0 : static_cast<double>(m) * cfg.training_seq_len;
    return {bits_over_rate(cfg.phy_header_len + training, cfg.phy_rate).us +
            bits_over_rate(cfg.mac_header_len + cfg.packet_len, cfg.data_rate).us};
}

Exact ack_exact(const ScenarioConfig& cfg) {
    return {bits_over_rate(cfg.phy_header_len, cfg.phy_rate).us +
            bits_over_rate(cfg.mac_header_len, cfg.data_rate).us};
}

}  // namespace

Micros t_data(int m, const ScenarioConfig& cfg) {
    check_batch(m, cfg);
    return data_exact(m, cfg).rounded();
}

Micros t_ack(const ScenarioConfig& cfg) { return ack_exact(cfg).rounded(); }

Micros ack_timeout(const ScenarioConfig& cfg) {
    return static_cast<Micros>(cfg.m_antennas) * (cfg.sifs + t_ack(cfg));
}

Micros t_cf(int m, const ScenarioConfig& cfg) { return t_data(m, cfg) + ack_timeout(cfg); }

Micros t_c(int m_max, const ScenarioConfig& cfg) { return t_cf(m_max, cfg); }

TimingTable::TimingTable(const ScenarioConfig& cfg) {
    const Exact ack = ack_exact(cfg);
    if (!ack.integral()) {
        std::ostringstream os;
        os << "ACK duration " << ack.us << " us rounded to " << ack.rounded() << " us";
        warnings_.push_back(os.str());
    }
    ack_ = ack.rounded();
    ack_timeout_ = static_cast<Micros>(cfg.m_antennas) * (cfg.sifs + ack_);
    for (int m = 1; m <= cfg.m_antennas; ++m) {
        const Exact d = data_exact(m, cfg);
        if (!d.integral()) {
            std::ostringstream os;
            os << "data duration for m=" << m << " (" << d.us << " us) rounded to " << d.rounded()
               << " us";
            warnings_.push_back(os.str());
        }
        data_.push_back(d.rounded());
        cf_.push_back(d.rounded() + ack_timeout_);
    }
}

}  // namespace mptmac
