#pragma once

#include <stdexcept>
#include <string>

namespace mmck {

// Bad configuration detected before any compute (exit code 1 at the CLI).
class config_error : public std::runtime_error {
public:
    explicit config_error(const std::string& what) : std::runtime_error(what) {}
};

// Numerical fault during a run: non-finite sample, diverging state (exit code 2).
class simulation_fault : public std::runtime_error {
public:
    simulation_fault(const std::string& what, double t_fault)
        : std::runtime_error(what), t(t_fault) {}
    double t;
};

// Signal-analysis failure (too short a window, degenerate fundamental).
class analysis_error : public std::runtime_error {
public:
    explicit analysis_error(const std::string& what) : std::runtime_error(what) {}
};

} // namespace mmck
