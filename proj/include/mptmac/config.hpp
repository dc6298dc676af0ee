#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

namespace mptmac {

/// Integer microseconds. Every duration in the model and the simulator uses it.
using Micros = std::int64_t;

class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Network, traffic, PHY and MAC parameters of one scenario.
///
/// Defaults reproduce the published parameter set (500/250 kb/s, 4000-bit
/// packets, CW = 32, K = 50, reference SNR 15 dB) with [M, s_min, s_max] =
/// [2, 1, 2] at 20 dB.
struct ScenarioConfig {
    int n_nodes = 4;
    int m_antennas = 2;
    int s_min = 1;
    int s_max = 2;
    int buffer_size = 50;
    double arrival_rate = 5.0;  // packets/s per node

    int cw = 32;
    Micros slot_sigma = 20;
    Micros difs = 50;
    Micros sifs = 10;

    double data_rate = 500e3;  // bits/s
    double phy_rate = 250e3;   // bits/s
    int packet_len = 4000;
    int phy_header_len = 192;
    int mac_header_len = 160;
    int training_seq_len = 64;  // bits per training sequence

    double snr_db = 20.0;
    double snr_ref_db = 15.0;

    std::optional<int> retry_limit;  // simulator only; unset = unlimited

    double snr_linear() const;
    double snr_ref_linear() const;

    /// Checks every range invariant and throws ConfigError on the first
    /// violation.
    void validate() const;

    bool operator==(const ScenarioConfig&) const = default;
};

double snr_db_to_linear(double db);

/// Flat JSON object, one key per field. Missing keys keep their default;
/// unknown keys are rejected.
ScenarioConfig config_from_json(const nlohmann::json& j);
nlohmann::json config_to_json(const ScenarioConfig& cfg);
ScenarioConfig load_config(const std::string& path);

}  // namespace mptmac
