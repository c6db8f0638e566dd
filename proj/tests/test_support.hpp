#pragma once

#include <optional>
#include <utility>

#include "rimech/errors.hpp"

// Runs the callable and reports the kind of the Error it threw, or nullopt
// when it returned normally.  Lets tests pin the taxonomy, not just "threw
// something".
template <typename F>
std::optional<rimech::ErrorKind> thrown_kind(F&& f) {
    try {
        std::forward<F>(f)();
    } catch (const rimech::Error& e) {
        return e.kind();
    }
    return std::nullopt;
}
