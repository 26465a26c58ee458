#pragma once

#include <stdexcept>
#include <vector>

#include "starqb/config.hpp"

namespace starqb {

struct AnalysisError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Sampled charging trajectory; theta is the dimensionless charging phase.
struct ChargingTrace {
    std::vector<double> theta;
    std::vector<double> e_b;
    std::vector<double> ergotropy_ratio;  // empty unless requested
    std::vector<double> ergotropy_scaled; // empty unless requested
    SystemConfig config;
};

struct FitResult {
    double amplitude = 0;
    double time_constant = 0;
    double offset = 0;
    double residual_rms = 0;
    bool converged = false;
};

}  // namespace starqb
