#include "mptmac/config.hpp"

#include <cmath>
#include <fstream>
#include <set>

namespace mptmac {

double snr_db_to_linear(double db) { return std::pow(10.0, db / 10.0); }

double ScenarioConfig::snr_linear() const { return snr_db_to_linear(snr_db); }
double ScenarioConfig::snr_ref_linear() const { return snr_db_to_linear(snr_ref_db); }

namespace {

void require(bool ok, const std::string& what) {
    if (!ok) throw ConfigError("invalid config: " + what);
}

}  // namespace

void ScenarioConfig::validate() const {
    require(n_nodes >= 1, "n_nodes must be >= 1");
    require(m_antennas >= 1, "m_antennas must be >= 1");
    require(s_min >= 1, "s_min must be >= 1");
    require(s_min <= s_max, "s_min must not exceed s_max");
    require(s_max <= m_antennas, "s_max must not exceed m_antennas");
    require(buffer_size >= 1, "buffer_size must be >= 1");
    require(s_max <= buffer_size, "s_max must not exceed buffer_size");
    require(buffer_size <= 10000, "buffer_size above 10000 states is not supported");
    require(std::isfinite(arrival_rate) && arrival_rate > 0.0, "arrival_rate must be > 0");
    require(cw >= 1, "cw must be >= 1");
    require(slot_sigma > 0 && difs > 0 && sifs > 0, "slot_sigma, difs and sifs must be > 0");
    require(std::isfinite(data_rate) && data_rate > 0.0, "data_rate must be > 0");
    require(std::isfinite(phy_rate) && phy_rate > 0.0, "phy_rate must be > 0");
    require(packet_len > 0 && phy_header_len > 0, "packet_len and phy_header_len must be > 0");
    require(mac_header_len >= 0 && training_seq_len >= 0, "header lengths must be >= 0");
    require(std::isfinite(snr_db) && std::isfinite(snr_ref_db), "SNR values must be finite");
    require(!retry_limit || *retry_limit >= 1, "retry_limit must be >= 1 when set");
}

namespace {

const std::set<std::string>& known_keys() {
    static const std::set<std::string> keys{
        "n_nodes",    "m_antennas",     "s_min",          "s_max",          "buffer_size",
        "arrival_rate", "cw",           "slot_sigma",     "difs",           "sifs",
        "data_rate",  "phy_rate",       "packet_len",     "phy_header_len", "mac_header_len",
        "training_seq_len", "snr_db",   "snr_ref_db",     "retry_limit"};
    return keys;
}

template <typename T>
void read_field(const nlohmann::json& j, const char* key, T& out) {
    auto it = j.find(key);
    if (it == j.end()) return;
    try {
        out = it->get<T>();
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("invalid config: field '") + key + "': " + e.what());
    }
}

}  // namespace

ScenarioConfig config_from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw ConfigError("invalid config: expected a JSON object");
    for (const auto& [key, _] : j.items()) {
        if (!known_keys().count(key)) throw ConfigError("invalid config: unknown field '" + key + "'");
    }
    ScenarioConfig cfg;
    read_field(j, "n_nodes", cfg.n_nodes);
    read_field(j, "m_antennas", cfg.m_antennas);
    read_field(j, "s_min", cfg.s_min);
    read_field(j, "s_max", cfg.s_max);
    read_field(j, "buffer_size", cfg.buffer_size);
    read_field(j, "arrival_rate", cfg.arrival_rate);
    read_field(j, "cw", cfg.cw);
    read_field(j, "slot_sigma", cfg.slot_sigma);
    read_field(j, "difs", cfg.difs);
    read_field(j, "sifs", cfg.sifs);
    read_field(j, "data_rate", cfg.data_rate);
    read_field(j, "phy_rate", cfg.phy_rate);
    read_field(j, "packet_len", cfg.packet_len);
    read_field(j, "phy_header_len", cfg.phy_header_len);
    read_field(j, "mac_header_len", cfg.mac_header_len);
    read_field(j, "training_seq_len", cfg.training_seq_len);
    read_field(j, "snr_db", cfg.snr_db);
    read_field(j, "snr_ref_db", cfg.snr_ref_db);
    if (auto it = j.find("retry_limit"); it != j.end() && !it->is_null()) {
        int limit = 0;
        read_field(j, "retry_limit", limit);
        cfg.retry_limit = limit;
    }
    cfg.validate();
    return cfg;
}

nlohmann::json config_to_json(const ScenarioConfig& cfg) {
    nlohmann::json j{
        {"n_nodes", cfg.n_nodes},
        {"m_antennas", cfg.m_antennas},
        {"s_min", cfg.s_min},
        {"s_max", cfg.s_max},
        {"buffer_size", cfg.buffer_size},
        {"arrival_rate", cfg.arrival_rate},
        {"cw", cfg.cw},
        {"slot_sigma", cfg.slot_sigma},
        {"difs", cfg.difs},
        {"sifs", cfg.sifs},
        {"data_rate", cfg.data_rate},
        {"phy_rate", cfg.phy_rate},
        {"packet_len", cfg.packet_len},
        {"phy_header_len", cfg.phy_header_len},
        {"mac_header_len", cfg.mac_header_len},
        {"training_seq_len", cfg.training_seq_len},
        {"snr_db", cfg.snr_db},
        {"snr_ref_db", cfg.snr_ref_db},
    };
    if (cfg.retry_limit) j["retry_limit"] = *cfg.retry_limit;
    return j;
}

ScenarioConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError("cannot parse config file " + path + ": " + e.what());
    }
    return config_from_json(j);
}

}  // namespace mptmac
