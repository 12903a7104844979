#include "bulkq/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <atomic>
#include <random>
#include <thread>

#include "bulkq/errors.hpp"

namespace bulkq {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

namespace {

double t_quantile(int df, bool p995) {
    static const double t975[] = {12.706, 4.303, 3.182, 2.776, 2.571, 2.447, 2.365,
                                  2.306,  2.262, 2.228, 2.201, 2.179, 2.160, 2.145,
                                  2.131,  2.120, 2.110, 2.101, 2.093, 2.086, 2.080,
                                  2.074,  2.069, 2.064, 2.060, 2.056, 2.052, 2.048,
                                  2.045,  2.042};
    static const double t995[] = {63.657, 9.925, 5.841, 4.604, 4.032, 3.707, 3.499,
                                  3.355,  3.250, 3.169, 3.106, 3.055, 3.012, 2.977,
                                  2.947,  2.921, 2.898, 2.878, 2.861, 2.845, 2.831,
                                  2.819,  2.807, 2.797, 2.787, 2.779, 2.771, 2.763,
                                  2.756,  2.750};
    if (df < 1) df = 1;
    if (df <= 30) return p995 ? t995[df - 1] : t975[df - 1];
    return p995 ? 2.576 : 1.960;
}

struct RepResult {
    double l = 0.0, l_q = 0.0, l_s = 0.0, p_idle = 0.0;
    double span = 0.0;              // collected time
    double customers_served = 0.0;  // throughput over the collected span
    std::vector<double> queue_arb, queue_dep, queue_pre, served, idle_by_queue;
    std::vector<std::vector<double>> joint;
    long departures = 0;
    bool drift = false;
};

class Rng {
public:
    explicit Rng(std::uint64_t seed) : eng_(seed) {}
    double uniform() {
        return static_cast<double>(eng_() >> 11) * 0x1.0p-53;
    }
    double exponential(double rate) { return -std::log1p(-uniform()) / rate; }

private:
    std::mt19937_64 eng_;
};

double sample_service(const ServiceLaw& law, Rng& rng) {
    if (law.kind() == ServiceLaw::Kind::deterministic) return law.det_duration();
    const auto& beta = law.ph_beta();
    const auto& t = law.ph_sub_generator();
    const auto nu = beta.size();
    // pick the starting phase (atom 1 - beta e starts absorbed)
    double u = rng.uniform();
    Eigen::Index phase = -1;
    for (Eigen::Index i = 0; i < nu; ++i) {
        u -= beta(i);
        if (u < 0.0) {
            phase = i;
            break;
        }
    }
    double time = 0.0;
    while (phase >= 0) {
        const double rate = -t(phase, phase);
        time += rng.exponential(rate);
        double v = rng.uniform() * rate;
        Eigen::Index next = -1;  // absorption unless an internal jump wins
        for (Eigen::Index j = 0; j < nu; ++j) {
            if (j == phase) continue;
            v -= t(phase, j);
            if (v < 0.0) {
                next = j;
                break;
            }
        }
        phase = next;
    }
    return time;
}

RepResult run_replication(const BmapModel& model, const ServicePolicy& policy,
                          const SimConfig& cfg, std::uint64_t seed) {
    RepResult res;
    const int a = policy.a;
    const int b = policy.b;
    const int m = model.phases();
    const int cap = cfg.queue_histogram_cap;
    res.queue_arb.assign(static_cast<size_t>(cap) + 1, 0.0);
    res.queue_dep.assign(static_cast<size_t>(cap) + 1, 0.0);
    res.queue_pre.assign(static_cast<size_t>(cap) + 1, 0.0);
    res.served.assign(static_cast<size_t>(b - a + 1), 0.0);
    res.idle_by_queue.assign(static_cast<size_t>(a), 0.0);
    res.joint.assign(static_cast<size_t>(cap) + 1,
                     std::vector<double>(static_cast<size_t>(b - a + 2), 0.0));
    if (cfg.departures <= 0) return res;

    Rng rng(seed);
    // cumulative transition table per phase: (threshold, next_phase, batch)
    struct Jump {
        double cum;
        int next;
        int batch;
    };
    std::vector<std::vector<Jump>> jumps(static_cast<size_t>(m));
    std::vector<double> rate(static_cast<size_t>(m));
    for (int i = 0; i < m; ++i) {
        double acc = 0.0;
        for (int j = 0; j < m; ++j)
            if (j != i && model.d(0)(i, j) > 0.0) {
                acc += model.d(0)(i, j);
                jumps[static_cast<size_t>(i)].push_back({acc, j, 0});
            }
        for (int k = 1; k <= model.max_batch(); ++k)
            for (int j = 0; j < m; ++j)
                if (model.d(k)(i, j) > 0.0) {
                    acc += model.d(k)(i, j);
                    jumps[static_cast<size_t>(i)].push_back({acc, j, k});
                }
        rate[static_cast<size_t>(i)] = -model.d(0)(i, i);
    }

    long queue = 0;
    int phase = 0;
    int in_service = 0;  // 0 while idle
    double now = 0.0;
    double t_arrival = rng.exponential(rate[0]);
    double t_complete = std::numeric_limits<double>::infinity();
    long done = 0;
    const long warmup = static_cast<long>(cfg.warmup_fraction *
                                          static_cast<double>(cfg.departures));
    bool collecting = warmup == 0;
    double t_start = 0.0;
    double area_q = 0.0, area_sys = 0.0, area_busy = 0.0, area_served = 0.0;
    double idle_time = 0.0;
    long arrivals_seen = 0;

    auto start_service_if_due = [&]() {
        if (in_service == 0 && queue >= a) {
            in_service = static_cast<int>(std::min<long>(queue, b));
            queue -= in_service;
            t_complete = now + sample_service(policy.law(in_service), rng);
        }
    };

    const long total = cfg.departures;
    while (done < total) {
        const double t_next = std::min(t_arrival, t_complete);
        if (collecting) {
            const double dt = t_next - now;
            area_q += dt * static_cast<double>(queue);
            area_sys += dt * static_cast<double>(queue + in_service);
            if (in_service > 0) {
                area_busy += dt;
                area_served += dt * static_cast<double>(in_service);
                const long qn = std::min<long>(queue, cap);
                res.joint[static_cast<size_t>(qn)][static_cast<size_t>(in_service - a + 1)] += dt;
                res.queue_arb[static_cast<size_t>(qn)] += dt;
            } else {
                idle_time += dt;
                res.idle_by_queue[static_cast<size_t>(std::min<long>(queue, a - 1))] += dt;
                const long qn = std::min<long>(queue, cap);
                res.joint[static_cast<size_t>(qn)][0] += dt;
                res.queue_arb[static_cast<size_t>(qn)] += dt;
            }
        }
        now = t_next;
        if (t_complete <= t_arrival) {
            // service completion
            ++done;
            if (collecting) {
                res.queue_dep[static_cast<size_t>(std::min<long>(queue, cap))] += 1.0;
                res.served[static_cast<size_t>(in_service - a)] += 1.0;
                res.customers_served += static_cast<double>(in_service);
            }
            in_service = 0;
            t_complete = std::numeric_limits<double>::infinity();
            start_service_if_due();
            if (!collecting && done >= warmup) {
                collecting = true;
                t_start = now;
            }
        } else {
            // BMAP transition
            const auto& row = jumps[static_cast<size_t>(phase)];
            const double u = rng.uniform() * row.back().cum;
            const Jump* pick = &row.back();
            for (const auto& jmp : row)
                if (u < jmp.cum) {
                    pick = &jmp;
                    break;
                }
            if (pick->batch > 0) {
                if (collecting) {
                    ++arrivals_seen;
                    res.queue_pre[static_cast<size_t>(std::min<long>(queue, cap))] += 1.0;
                }
                queue += pick->batch;
                if (queue > static_cast<long>(cfg.drift_bound)) res.drift = true;
                start_service_if_due();
            }
            phase = pick->next;
            t_arrival = now + rng.exponential(rate[static_cast<size_t>(phase)]);
        }
    }

    const double span = now - t_start;
    res.departures = done - warmup;
    res.span = span;
    (void)arrivals_seen;
    if (span > 0.0) {
        res.l = area_sys / span;
        res.l_q = area_q / span;
        res.p_idle = idle_time / span;
        res.l_s = area_busy > 0.0 ? area_served / area_busy : 0.0;
    }
    return res;
}

SimMeasure summarize(std::vector<double> xs) {
    SimMeasure out;
    const int n = static_cast<int>(xs.size());
    if (n == 0) return out;
    double mean = 0.0;
    for (double x : xs) mean += x;
    mean /= n;
    double var = 0.0;
    for (double x : xs) var += (x - mean) * (x - mean);
    var = n > 1 ? var / (n - 1) : 0.0;
    out.mean = mean;
    out.std_error = std::sqrt(var / n);
    out.half_width_95 = t_quantile(n - 1, false) * out.std_error;
    out.half_width_99 = t_quantile(n - 1, true) * out.std_error;
    return out;
}

}  // namespace

SimEstimate simulate(const BmapModel& model, const ServicePolicy& policy,
                     const SimConfig& cfg) {
    SimEstimate est;
    if (cfg.departures <= 0 || cfg.replications < 1) return est;

    std::vector<RepResult> reps(static_cast<size_t>(cfg.replications));
    const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
    const unsigned workers =
        std::min<unsigned>(hw, static_cast<unsigned>(cfg.replications));
    std::vector<std::thread> threads;
    std::atomic<int> next{0};
    auto work = [&]() {
        for (;;) {
            const int i = next.fetch_add(1);
            if (i >= cfg.replications) break;
            const std::uint64_t seed =
                splitmix64(cfg.seed + 0x9E3779B97F4A7C15ULL * static_cast<std::uint64_t>(i));
            reps[static_cast<size_t>(i)] = run_replication(model, policy, cfg, seed);
        }
    };
    for (unsigned t = 0; t < workers; ++t) threads.emplace_back(work);
    for (auto& t : threads) t.join();

    std::vector<double> l, lq, ls, w, wq, pidle;
    for (const auto& r : reps) {
        l.push_back(r.l);
        lq.push_back(r.l_q);
        ls.push_back(r.l_s);
        pidle.push_back(r.p_idle);
        est.total_departures += r.departures;
        est.drift_warning = est.drift_warning || r.drift;
    }
    est.l = summarize(l);
    est.l_q = summarize(lq);
    est.l_s = summarize(ls);
    est.p_idle = summarize(pidle);

    // waiting times by Little's law with the observed per-replication throughput
    std::vector<double> ws, wqs;
    ws.reserve(reps.size());
    wqs.reserve(reps.size());
    for (const auto& r : reps) {
        if (r.customers_served > 0.0 && r.span > 0.0) {
            const double lambda_hat = r.customers_served / r.span;
            ws.push_back(r.l / lambda_hat);
            wqs.push_back(r.l_q / lambda_hat);
        }
    }
    est.w = summarize(ws);
    est.w_q = summarize(wqs);

    auto pool = [&](auto getter) {
        std::vector<double> out;
        for (const auto& r : reps) {
            const auto& v = getter(r);
            double tot = 0.0;
            for (double x : v) tot += x;
            if (tot <= 0.0) continue;
            if (out.size() < v.size()) out.resize(v.size(), 0.0);
            for (size_t k = 0; k < v.size(); ++k) out[k] += v[k] / tot / reps.size();
        }
        return out;
    };
    est.queue_arbitrary = pool([](const RepResult& r) -> const std::vector<double>& {
        return r.queue_arb;
    });
    est.queue_departure = pool([](const RepResult& r) -> const std::vector<double>& {
        return r.queue_dep;
    });
    est.queue_pre_arrival = pool([](const RepResult& r) -> const std::vector<double>& {
        return r.queue_pre;
    });
    est.served_batch = pool([](const RepResult& r) -> const std::vector<double>& {
        return r.served;
    });
    est.idle_by_queue = pool([](const RepResult& r) -> const std::vector<double>& {
        return r.idle_by_queue;
    });
    // joint histogram, normalized by pooled time
    if (!reps.empty()) {
        const auto rows = reps.front().joint.size();
        const auto cols = reps.front().joint.front().size();
        est.arbitrary_joint.assign(rows, std::vector<double>(cols, 0.0));
        double total_time = 0.0;
        for (const auto& r : reps)
            for (const auto& row : r.joint)
                for (double x : row) total_time += x;
        if (total_time > 0.0)
            for (const auto& r : reps)
                for (size_t i = 0; i < rows; ++i)
                    for (size_t j = 0; j < cols; ++j)
                        est.arbitrary_joint[i][j] += r.joint[i][j] / total_time;
    }
    return est;
}

}  // namespace bulkq
