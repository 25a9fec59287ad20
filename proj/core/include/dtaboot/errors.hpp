// Error types shared across the library. Callers that drive whole
// pipelines (CLI, bootstrap engine) dispatch on these.
#pragma once

#include <stdexcept>
#include <string>

namespace dtaboot {

class error : public std::runtime_error {
public:
    explicit error(const std::string& msg) : std::runtime_error(msg) {}
};

// Malformed or invalid input data (CSV rows, counts, study invariants).
class parse_error : public error {
public:
    explicit parse_error(const std::string& msg) : error(msg) {}
};

// Model fitting did not converge, or a result requires a converged fit.
class convergence_error : public error {
public:
    explicit convergence_error(const std::string& msg) : error(msg) {}
};

// Bootstrap replicate failure budget exceeded.
class budget_error : public error {
public:
    explicit budget_error(const std::string& msg) : error(msg) {}
};

} // namespace dtaboot
