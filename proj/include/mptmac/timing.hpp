#pragma once

#include <string>
#include <vector>

#include "mptmac/config.hpp"

namespace mptmac {

// Raw frame durations. Each converts bit counts and bit rates into integer
// microseconds, rounding to the nearest microsecond when the exact value is
// not integral (see TimingTable::warnings).
Micros t_data(int m, const ScenarioConfig& cfg);
Micros t_ack(const ScenarioConfig& cfg);
/// Time all nodes wait for the M possible ACKs; independent of the batch size.
Micros ack_timeout(const ScenarioConfig& cfg);
/// Channel occupancy of a collision-free space-batch of m packets.
Micros t_cf(int m, const ScenarioConfig& cfg);
/// Channel occupancy of a collision whose longest batch carries m_max packets.
Micros t_c(int m_max, const ScenarioConfig& cfg);

/// All durations of one scenario, precomputed. Batch-indexed accessors take
/// m in 1..M.
class TimingTable {
public:
    explicit TimingTable(const ScenarioConfig& cfg);

    int m_antennas() const { return static_cast<int>(data_.size()); }
    Micros data(int m) const { return data_.at(static_cast<std::size_t>(m - 1)); }
    Micros cf(int m) const { return cf_.at(static_cast<std::size_t>(m - 1)); }
    Micros c(int m_max) const { return cf(m_max); }
    Micros ack() const { return ack_; }
    Micros ack_timeout() const { return ack_timeout_; }

    /// Non-empty when some duration had to be rounded to whole microseconds.
    const std::vector<std::string>& warnings() const { return warnings_; }

private:
    std::vector<Micros> data_;
    std::vector<Micros> cf_;
    Micros ack_ = 0;
    Micros ack_timeout_ = 0;
    std::vector<std::string> warnings_;
};

}  // namespace mptmac
