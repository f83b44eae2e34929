#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace vrp {

enum class ErrorKind {
    Domain,                 // capacity outside the declared model domain
    Argument,               // invalid argument or violated precondition
    Singularity,            // net-zero grid: e(Q) <= 0, demand undefined
    NoSellableCredits,      // f(Q) <= 0
    NoRevenue,              // optimal revenue is not positive
    InfeasibleSharing,      // gamma* >= 1
    ThresholdUnreachable,   // f never reaches M/exp(1) on the domain
    InfeasibleAtThreshold,  // F(Q_dagger) < 0
    Shortage,               // dispatch cannot serve residual load
    Configuration,          // enumeration or scenario configuration error
    Parse,                  // malformed input file
    Validation,             // structurally valid input that fails model checks
};

std::string_view to_string(ErrorKind kind) noexcept;

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(what), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) {
    throw Error(kind, what);
}

}  // namespace vrp
