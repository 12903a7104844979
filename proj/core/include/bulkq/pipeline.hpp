#pragma once

#include <optional>
#include <string>
#include <vector>

#include "bulkq/config.hpp"
#include "bulkq/epochs.hpp"
#include "bulkq/measures.hpp"
#include "bulkq/solver.hpp"

namespace bulkq {

// Everything the analytic pipeline produces for one model.
struct Solution {
    StationaryArrivalSummary summary;
    CharPoly char_poly;
    BoundaryVectors boundary;
    DepartureDistribution departure;
    NormalizationScalars scalars;
    EpochDistribution arbitrary;
    EpochDistribution pre_arrival;
    PerformanceReport report;
};

Solution solve(const BmapModel& model, const ServicePolicy& policy,
               const SolverOptions& options = {});

struct CheckResult {
    std::string name;
    double value = 0.0;
    double tolerance = 0.0;
    bool pass = false;
};

// Internal identity suite on a solved model (mass, marginal consistency,
// Little's law, decomposition, nonnegativity, reconstruction probes).
std::vector<CheckResult> self_check(const BmapModel& model, const ServicePolicy& policy,
                                    const Solution& sol);

}  // namespace bulkq
