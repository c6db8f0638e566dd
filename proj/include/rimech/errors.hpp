#pragma once

#include <stdexcept>
#include <string>

namespace rimech {

// Failure taxonomy shared by all modules. Every throw site picks the kind
// that a caller could reasonably dispatch on; the message carries context.
enum class ErrorKind {
    invalid_dimension,
    derivative_failure,
    degenerate_probe,
    underdetermined_system,
    integration_diverged,
    gauge_degenerate,
    space_like_segment,
    not_applicable,
    constraint_violation,
    not_an_integral,
    superluminal_state,
    off_shell_state,
    division_degenerate,
    kind_mismatch,
    window_out_of_range,
    grid_too_coarse,
    parse_error,
    schema_error,
};

const char* to_string(ErrorKind k);

class Error : public std::runtime_error {
  public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

  private:
    ErrorKind kind_;
};

}  // namespace rimech
