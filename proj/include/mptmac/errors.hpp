#pragma once

#include <stdexcept>
#include <string>

namespace mptmac {

enum class ModelErrorKind {
    NoAbsorption,          // some reachable PER(i) == 1: a batch is never cleared
    SaturationDivergence,  // collision probability reached 1
    ReducibleChain,        // stationary solve has no unique solution
    Inconsistent,          // a derived distribution violates its invariants
    NoThroughput,          // lambda * (1 - p_b) == 0
};

const char* to_string(ModelErrorKind kind);

/// Raised by the analytical model when a quantity diverges or a chain
/// cannot be solved.
class ModelError : public std::runtime_error {
public:
    ModelError(ModelErrorKind kind, const std::string& what)
        : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

    ModelErrorKind kind() const { return kind_; }

private:
    ModelErrorKind kind_;
};

inline const char* to_string(ModelErrorKind kind) {
    switch (kind) {
        case ModelErrorKind::NoAbsorption: return "no-absorption";
        case ModelErrorKind::SaturationDivergence: return "saturation-divergence";
        case ModelErrorKind::ReducibleChain: return "reducible-chain";
        case ModelErrorKind::Inconsistent: return "inconsistent";
        case ModelErrorKind::NoThroughput: return "no-throughput";
    }
    return "unknown";
}

}  // namespace mptmac
