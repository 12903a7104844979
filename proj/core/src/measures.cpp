#include "bulkq/measures.hpp"

namespace bulkq {

double traffic_intensity(const StationaryArrivalSummary& summary,
                         const ServicePolicy& policy) {
    return summary.lambda_star * policy.law(policy.b).mean() / policy.b;
}

bool stability_check(const StationaryArrivalSummary& summary,
                     const ServicePolicy& policy) {
    return traffic_intensity(summary, policy) < 1.0;
}

PerformanceReport build_report(const EpochDistribution& arb,
                               const StationaryArrivalSummary& summary,
                               const ServicePolicy& policy) {
    const int a = arb.a;
    const int b = arb.b;
    const int n_max = arb.n_max;
    PerformanceReport rep;
    rep.rho = traffic_intensity(summary, policy);

    for (const auto& p : arb.idle) rep.p_idle += p.sum();
    rep.p_busy = 1.0 - rep.p_idle;

    rep.p_queue.assign(static_cast<size_t>(n_max) + 1, 0.0);
    for (int n = 0; n <= n_max; ++n) {
        double q = 0.0;
        for (int r = a; r <= b; ++r) q += arb.pi(n, r).sum();
        if (n < a) q += arb.idle[static_cast<size_t>(n)].sum();
        rep.p_queue[static_cast<size_t>(n)] = q;
    }

    rep.p_system.assign(static_cast<size_t>(n_max + b) + 1, 0.0);
    for (int n = 0; n <= n_max + b; ++n) {
        if (n < a) {
            rep.p_system[static_cast<size_t>(n)] = arb.idle[static_cast<size_t>(n)].sum();
            continue;
        }
        double s = 0.0;
        for (int r = a; r <= std::min(b, n); ++r)
            if (n - r <= n_max) s += arb.pi(n - r, r).sum();
        rep.p_system[static_cast<size_t>(n)] = s;
    }

    rep.p_server.assign(static_cast<size_t>(b - a + 1), 0.0);
    for (int r = a; r <= b; ++r) {
        double s = 0.0;
        for (int n = 0; n <= n_max; ++n) s += arb.pi(n, r).sum();
        rep.p_server[static_cast<size_t>(r - a)] = s / rep.p_busy;
    }

    for (int n = 0; n <= n_max; ++n) rep.l_q += n * rep.p_queue[static_cast<size_t>(n)];
    for (int n = 0; n <= n_max + b; ++n) rep.l += n * rep.p_system[static_cast<size_t>(n)];
    for (int r = a; r <= b; ++r) rep.l_s += r * rep.p_server[static_cast<size_t>(r - a)];
    rep.w = rep.l / summary.lambda_star;
    rep.w_q = rep.l_q / summary.lambda_star;
    return rep;
}

}  // namespace bulkq
