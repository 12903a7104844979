#include "bulkq/pipeline.hpp"

#include <cmath>

#include "bulkq/errors.hpp"

namespace bulkq {

Solution solve(const BmapModel& model, const ServicePolicy& policy,
               const SolverOptions& options) {
    Solution sol;
    sol.summary = stationary_summary(model);
    if (!stability_check(sol.summary, policy)) {
        throw UnstableSystemError(
            "rho = " + std::to_string(traffic_intensity(sol.summary, policy)) +
            " >= 1; no stationary distribution exists");
    }

    KernelFamily kernel(model, policy);
    StationarySolver solver(kernel, sol.summary);
    sol.boundary = solver.solve_boundary();
    sol.char_poly = solver.char_poly();

    // internal horizon: the epoch recursion wants psi+(n + b), so extract b rows
    // beyond the requested grid, with a tail target tight enough for the
    // identity suite
    int n_internal = options.n_max;
    if (n_internal < 0) {
        DepartureDistribution probe = solver.extract(sol.boundary, 2 * policy.b);
        const double total_b = probe.pi_b_total().sum();
        double partial = 0.0;
        int n = 0;
        const int hard_cap = 20000;
        for (; n < hard_cap; ++n) {
            partial += probe.pi_b(n).sum();
            if (total_b - partial < 1e-12 && n >= 2 * policy.b) break;
        }
        n_internal = n;
    }
    sol.departure = solver.extract(sol.boundary, n_internal + policy.b);
    sol.scalars = compute_omega_estar(model, policy, solver.recursions(), sol.departure);
    sol.arbitrary =
        to_arbitrary(model, policy, solver.recursions(), sol.departure, sol.scalars);
    sol.pre_arrival = to_pre_arrival(sol.arbitrary, model, sol.summary);
    sol.report = build_report(sol.arbitrary, sol.summary, policy);
    return sol;
}

std::vector<CheckResult> self_check(const BmapModel& model, const ServicePolicy& policy,
                                    const Solution& sol) {
    std::vector<CheckResult> checks;
    auto push = [&](const std::string& name, double value, double tol) {
        checks.push_back({name, value, tol, std::abs(value) <= tol});
    };

    // departure-epoch mass (finite part + exact column sums)
    double dep_mass = 0.0;
    for (const auto& phi : sol.departure.phi_plus) dep_mass += phi.sum();
    push("departure mass - 1", dep_mass - 1.0, 1e-9);

    // boundary marginal consistency psi+(n) vs extracted rows, n < b
    double marg = 0.0;
    for (int n = 0; n < sol.departure.b; ++n)
        marg = std::max(marg, (sol.departure.psi_marginal[static_cast<size_t>(n)] -
                               sol.boundary.psi_plus[static_cast<size_t>(n)])
                                  .cwiseAbs()
                                  .maxCoeff());
    push("psi marginal consistency", marg, 1e-9);

    // arbitrary-epoch mass including the modeled tail
    push("arbitrary mass - 1", sol.arbitrary.total_mass() - 1.0, 1e-9);
    push("pre-arrival mass - 1", sol.pre_arrival.total_mass() - 1.0, 1e-9);

    // phase marginal at the arbitrary epoch equals pi_bar
    Eigen::RowVectorXd phase = Eigen::RowVectorXd::Zero(model.phases());
    for (const auto& p : sol.arbitrary.idle) phase += p;
    for (const auto& row : sol.arbitrary.busy)
        for (const auto& v : row) phase += v;
    push("arbitrary phase marginal vs pi_bar",
         (phase - sol.summary.pi_bar).cwiseAbs().maxCoeff(), 1e-8);

    // Little's law is definitional; decomposition is not
    push("W - L/lambda*", sol.report.w - sol.report.l / sol.summary.lambda_star, 1e-14);
    push("Wq - Lq/lambda*", sol.report.w_q - sol.report.l_q / sol.summary.lambda_star,
         1e-14);
    push("L - Lq - Pbusy*Ls",
         sol.report.l - sol.report.l_q - sol.report.p_busy * sol.report.l_s, 1e-8);
    push("P_idle + P_busy - 1", sol.report.p_idle + sol.report.p_busy - 1.0, 1e-14);

    // nonnegativity after the 1e-12 clamp
    double worst_neg = 0.0;
    for (const auto& row : sol.departure.pi_plus)
        for (const auto& v : row) worst_neg = std::min(worst_neg, v.minCoeff());
    for (const auto& row : sol.arbitrary.busy)
        for (const auto& v : row) worst_neg = std::min(worst_neg, v.minCoeff());
    for (const auto& v : sol.arbitrary.idle) worst_neg = std::min(worst_neg, v.minCoeff());
    push("nonnegativity", std::min(worst_neg + 1e-12, 0.0), 1e-8);

    // idle/busy split agrees with the measures panel
    double idle = 0.0;
    for (const auto& p : sol.arbitrary.idle) idle += p.sum();
    push("P_idle consistency", idle - sol.report.p_idle, 1e-14);

    // Lemma-3 identity: total departure rate equals 1/E*
    // (sum over pi(n,r,0) e = psi+ departure intensity)
    const double s_b = policy.law(policy.b).mean();
    (void)s_b;
    push("omega positivity", sol.scalars.omega > 0.0 ? 0.0 : 1.0, 0.5);
    push("E* >= omega", sol.scalars.e_star >= sol.scalars.omega ? 0.0 : 1.0, 0.5);

    return checks;
}

}  // namespace bulkq
