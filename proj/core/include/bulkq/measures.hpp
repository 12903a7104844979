#pragma once

#include <vector>

#include "bulkq/epochs.hpp"

namespace bulkq {

struct PerformanceReport {
    std::vector<double> p_system;  // number in system (queue + in service)
    std::vector<double> p_queue;   // number waiting
    std::vector<double> p_server;  // batch size in service given busy, index r - a
    double l = 0.0;                // mean system size
    double l_q = 0.0;              // mean queue length
    double l_s = 0.0;              // mean served batch size given busy
    double w = 0.0;                // mean time in system
    double w_q = 0.0;              // mean waiting time
    double p_idle = 0.0;
    double p_busy = 0.0;
    double rho = 0.0;
};

PerformanceReport build_report(const EpochDistribution& arbitrary,
                               const StationaryArrivalSummary& summary,
                               const ServicePolicy& policy);

// rho = lambda* s_b / b; the system is stable iff rho < 1.
double traffic_intensity(const StationaryArrivalSummary& summary,
                         const ServicePolicy& policy);
bool stability_check(const StationaryArrivalSummary& summary,
                     const ServicePolicy& policy);

}  // namespace bulkq
