#pragma once

#include <stdexcept>
#include <string>

namespace onepulse {

enum class ErrorKind {
    domain,               // invalid argument or unreachable target
    accuracy,             // integrator too coarse
    non_return,           // pulse left population in the excited level
    unfittable,           // degenerate trace
    window,               // too few samples in the fit window
    ill_posed,            // normal matrix badly conditioned
    degenerate_reference, // reference visibility ~ 0
    config,               // configuration invariant violated
    parse,                // malformed input text
    io,
};

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}

    [[nodiscard]] ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

} // namespace onepulse
