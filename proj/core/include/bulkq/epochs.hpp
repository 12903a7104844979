#pragma once

#include <Eigen/Dense>
#include <vector>

#include "bulkq/solver.hpp"

namespace bulkq {

enum class Epoch { departure, arbitrary, pre_arrival };

struct EpochDistribution {
    Epoch epoch = Epoch::arbitrary;
    int a = 0;
    int b = 0;
    int n_max = 0;
    // idle[n], 0 <= n <= a-1 (empty for the departure epoch)
    std::vector<Eigen::RowVectorXd> idle;
    // busy[n][r - a], 0 <= n <= n_max, a <= r <= b
    std::vector<std::vector<Eigen::RowVectorXd>> busy;
    double modeled_tail_mass = 0.0;  // mass beyond n_max per the tail model

    const Eigen::RowVectorXd& pi(int n, int r) const {
        return busy[static_cast<size_t>(n)][static_cast<size_t>(r - a)];
    }
    double total_mass() const;
};

struct NormalizationScalars {
    double omega = 0.0;   // Lemma-2 scalar (time)
    double e_star = 0.0;  // mean inter-departure scale (time)
};

// omega and E* from the departure-epoch solution; the psi+ tail beyond the
// array is taken from the exact generating-function totals.
NormalizationScalars compute_omega_estar(const BmapModel& model,
                                         const ServicePolicy& policy,
                                         const IdleRecursions& rec,
                                         const DepartureDistribution& dep);

// Departure -> arbitrary epoch (idle vectors plus the busy recursions).
EpochDistribution to_arbitrary(const BmapModel& model, const ServicePolicy& policy,
                               const IdleRecursions& rec,
                               const DepartureDistribution& dep,
                               const NormalizationScalars& scalars);

// Arbitrary -> pre-arrival epoch: row-multiply by D'_1 / lambda_g.
EpochDistribution to_pre_arrival(const EpochDistribution& arbitrary,
                                 const BmapModel& model,
                                 const StationaryArrivalSummary& summary);

}  // namespace bulkq
