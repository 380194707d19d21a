#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace crnfit {

// Base class for all library errors.
class error : public std::runtime_error {
public:
    explicit error(const std::string& msg) : std::runtime_error(msg) {}
};

// Invalid argument shapes, sizes, or values supplied by the caller.
class invalid_input_error : public error {
public:
    explicit invalid_input_error(const std::string& msg) : error(msg) {}
};

// Numerically singular linear system; carries the offending column.
class singular_error : public error {
public:
    singular_error(const std::string& msg, int column_index)
        : error(msg), column(column_index) {}
    int column;
};

// Trajectory left the admissible region; carries the first offending time.
class instability_error : public error {
public:
    instability_error(const std::string& msg, double at_time)
        : error(msg), time(at_time) {}
    double time;
};

// Iteration did not reach its target; carries the final iterate.
class no_equilibrium_error : public error {
public:
    no_equilibrium_error(const std::string& msg, std::vector<double> state)
        : error(msg), final_state(std::move(state)) {}
    std::vector<double> final_state;
};

// Filesystem or parse failure on external data.
class io_error : public error {
public:
    explicit io_error(const std::string& msg) : error(msg) {}
};

} // namespace crnfit
