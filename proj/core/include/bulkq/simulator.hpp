#pragma once

#include <cstdint>
#include <vector>

#include "bulkq/bmap.hpp"
#include "bulkq/service.hpp"

namespace bulkq {

struct SimConfig {
    long departures = 100000;     // horizon in served batches per replication
    double warmup_fraction = 0.2; // discarded share of the horizon
    int replications = 10;
    std::uint64_t seed = 1;
    int queue_histogram_cap = 512;
    bool collect_departure = true;
    bool collect_arbitrary = true;
    bool collect_pre_arrival = true;
    double drift_bound = 5e6;     // queue length that triggers an instability warning
};

struct SimMeasure {
    double mean = 0.0;
    double std_error = 0.0;
    double half_width_95 = 0.0;
    double half_width_99 = 0.0;
    bool contains(double x, bool wide = false) const {
        const double h = wide ? half_width_99 : half_width_95;
        return x >= mean - h && x <= mean + h;
    }
};

struct SimEstimate {
    SimMeasure l, l_q, l_s, w, w_q, p_idle;
    // pooled empirical distributions (normalized counts / time weights)
    std::vector<double> queue_arbitrary;       // queue length at a random time
    std::vector<double> queue_departure;       // queue length after a departure
    std::vector<double> queue_pre_arrival;     // queue length seen by an arrival
    std::vector<double> served_batch;          // index r - a
    std::vector<std::vector<double>> arbitrary_joint;  // [n][r - a], time-weighted
    std::vector<double> idle_by_queue;         // idle with queue n, 0 <= n < a
    long total_departures = 0;
    bool drift_warning = false;
};

// SplitMix64, used to derive independent replication streams from the master seed.
std::uint64_t splitmix64(std::uint64_t x);

SimEstimate simulate(const BmapModel& model, const ServicePolicy& policy,
                     const SimConfig& config);

}  // namespace bulkq
