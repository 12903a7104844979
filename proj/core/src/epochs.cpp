#include "bulkq/epochs.hpp"

#include <algorithm>
#include <cmath>

#include "bulkq/errors.hpp"

namespace bulkq {

double EpochDistribution::total_mass() const {
    double mass = modeled_tail_mass;
    for (const auto& p : idle) mass += p.sum();
    for (const auto& row : busy)
        for (const auto& v : row) mass += v.sum();
    return mass;
}

NormalizationScalars compute_omega_estar(const BmapModel& model,
                                         const ServicePolicy& policy,
                                         const IdleRecursions& rec,
                                         const DepartureDistribution& dep) {
    const int a = policy.a;
    const int b = policy.b;
    const int m = model.phases();

    NormalizationScalars out;
    double omega = 0.0;
    for (int n = 0; n < a; ++n) {
        Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(m, m);
        for (int l = a; l <= b; ++l) acc += rec.c(l, n) * policy.law(l).mean();
        for (int j = n; j < a; ++j) {
            Eigen::MatrixXd tail_d = Eigen::MatrixXd::Zero(m, m);
            for (int i = b + 1 - j; i <= model.max_batch(); ++i) tail_d += model.dbar(i);
            acc += rec.m(j, n) * tail_d * policy.law(b).mean();
        }
        omega += (dep.psi_marginal[static_cast<size_t>(n)] * acc).sum();
    }
    for (int n = a; n <= b; ++n)
        omega += policy.law(std::min(n, b)).mean() *
                 dep.psi_marginal[static_cast<size_t>(n)].sum();
    // exact psi+ tail beyond n = b from the generating-function totals
    double total = 0.0;
    for (const auto& phi : dep.phi_plus) total += phi.sum();
    double head = 0.0;
    for (int n = 0; n <= b; ++n) head += dep.psi_marginal[static_cast<size_t>(n)].sum();
    omega += policy.law(b).mean() * (total - head);
    out.omega = omega;

    double estar = omega;
    const Eigen::VectorXd d0inv_e =
        model.minus_d0_inverse() * Eigen::VectorXd::Ones(m);
    for (int n = 0; n < a; ++n)
        for (int j = 0; j <= n; ++j)
            estar += dep.psi_marginal[static_cast<size_t>(j)] * rec.m(n, j) * d0inv_e;
    out.e_star = estar;
    return out;
}

EpochDistribution to_arbitrary(const BmapModel& model, const ServicePolicy& policy,
                               const IdleRecursions& rec,
                               const DepartureDistribution& dep,
                               const NormalizationScalars& scalars) {
    const int a = policy.a;
    const int b = policy.b;
    const int m = model.phases();
    const int kmax = model.max_batch();
    const double inv_estar = 1.0 / scalars.e_star;
    // the busy recursion needs psi+(n + b); keep b rows of headroom
    const int n_max = dep.n_max - b;
    if (n_max < 0) throw SolverError("departure arrays too short for the epoch map");

    EpochDistribution arb;
    arb.epoch = Epoch::arbitrary;
    arb.a = a;
    arb.b = b;
    arb.n_max = n_max;

    const Eigen::MatrixXd d0inv = model.d(0).inverse();
    const Eigen::MatrixXd minus_d0inv = model.minus_d0_inverse();

    arb.idle.reserve(static_cast<size_t>(a));
    for (int n = 0; n < a; ++n) {
        Eigen::RowVectorXd acc = Eigen::RowVectorXd::Zero(m);
        for (int j = 0; j <= n; ++j)
            acc += dep.psi_marginal[static_cast<size_t>(j)] * rec.m(n, j);
        arb.idle.push_back(inv_estar * acc * minus_d0inv);
    }

    arb.busy.assign(static_cast<size_t>(n_max) + 1,
                    std::vector<Eigen::RowVectorXd>(static_cast<size_t>(b - a + 1),
                                                    Eigen::RowVectorXd::Zero(m)));
    for (int r = a; r <= b; ++r) {
        Eigen::RowVectorXd acc =
            inv_estar * (dep.pi(0, r) - dep.psi_marginal[static_cast<size_t>(r)]);
        for (int i = 0; i < a; ++i)
            if (r - i >= 1 && r - i <= kmax) acc -= arb.idle[static_cast<size_t>(i)] * model.d(r - i);
        arb.busy[0][static_cast<size_t>(r - a)] = acc * d0inv;
    }
    for (int n = 1; n <= n_max; ++n) {
        for (int r = a; r < b; ++r) {
            Eigen::RowVectorXd acc = inv_estar * dep.pi(n, r);
            for (int i = 1; i <= std::min(n, kmax); ++i)
                acc -= arb.busy[static_cast<size_t>(n - i)][static_cast<size_t>(r - a)] *
                       model.d(i);
            arb.busy[static_cast<size_t>(n)][static_cast<size_t>(r - a)] = acc * d0inv;
        }
        Eigen::RowVectorXd acc =
            inv_estar * (dep.pi(n, b) - dep.psi_marginal[static_cast<size_t>(n + b)]);
        for (int i = 1; i <= std::min(n, kmax); ++i)
            acc -= arb.busy[static_cast<size_t>(n - i)].back() * model.d(i);
        for (int j = a; j <= b; ++j) {
            const int idle_idx = b - j;
            if (idle_idx <= a - 1 && n + j <= kmax)
                acc -= arb.idle[static_cast<size_t>(idle_idx)] * model.d(n + j);
        }
        arb.busy[static_cast<size_t>(n)].back() = acc * d0inv;
    }

    double worst_negative = 0.0;
    for (auto& row : arb.busy)
        for (auto& v : row)
            for (Eigen::Index j = 0; j < v.size(); ++j) {
                worst_negative = std::min(worst_negative, v(j));
                if (v(j) < 0.0 && v(j) > -1e-8) v(j) = 0.0;
            }
    if (worst_negative < -1e-8)
        throw NegativeProbabilityError(
            "arbitrary-epoch recursion produced a negative probability beyond "
            "tolerance; upstream accuracy is insufficient");

    // geometric extrapolation of the mass beyond the computed horizon
    double last = 0.0, prev = 0.0;
    for (const auto& v : arb.busy[static_cast<size_t>(n_max)]) last += v.sum();
    for (const auto& v : arb.busy[static_cast<size_t>(n_max - 1)]) prev += v.sum();
    double ratio = prev > 0.0 ? last / prev : 0.0;
    ratio = std::clamp(ratio, 0.0, 0.999);
    arb.modeled_tail_mass = last * ratio / (1.0 - ratio);
    return arb;
}

EpochDistribution to_pre_arrival(const EpochDistribution& arbitrary,
                                 const BmapModel& model,
                                 const StationaryArrivalSummary& summary) {
    EpochDistribution out = arbitrary;
    out.epoch = Epoch::pre_arrival;
    const Eigen::MatrixXd w = model.tail_dprime(1) / summary.lambda_g;
    for (auto& p : out.idle) p = (p * w).eval();
    for (auto& row : out.busy)
        for (auto& v : row) v = (v * w).eval();
    double last = 0.0, prev = 0.0;
    for (const auto& v : out.busy.back()) last += v.sum();
    for (const auto& v : out.busy[out.busy.size() - 2]) prev += v.sum();
    double ratio = prev > 0.0 ? last / prev : 0.0;
    ratio = std::clamp(ratio, 0.0, 0.999);
    out.modeled_tail_mass = last * ratio / (1.0 - ratio);
    return out;
}

}  // namespace bulkq
