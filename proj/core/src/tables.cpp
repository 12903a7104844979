#include "bulkq/tables.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

namespace bulkq {

namespace {

constexpr double kBlank = std::numeric_limits<double>::quiet_NaN();

std::string cell(double v) {
    if (std::isnan(v)) return "";
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.6f", v);
    return buf;
}

void epoch_body(const EpochDistribution& dist, bool with_idle, Table& t) {
    const int a = dist.a;
    const int b = dist.b;
    const auto m = dist.busy.front().front().cols();
    const int rows = static_cast<int>(t.row_labels.size());
    for (int n = 0; n < rows; ++n) {
        std::vector<double> row;
        if (with_idle) {
            for (Eigen::Index i = 0; i < m; ++i)
                row.push_back(n < a ? dist.idle[static_cast<size_t>(n)](i) : kBlank);
        }
        for (int r = a; r <= b; ++r)
            for (Eigen::Index i = 0; i < m; ++i) row.push_back(dist.pi(n, r)(i));
        double queue = 0.0;
        for (int r = a; r <= b; ++r) queue += dist.pi(n, r).sum();
        if (with_idle && n < a) queue += dist.idle[static_cast<size_t>(n)].sum();
        row.push_back(queue);
        t.body.push_back(std::move(row));
    }
    // totals over the full internal horizon, not just the displayed rows
    t.totals.clear();
    if (with_idle) {
        for (Eigen::Index i = 0; i < m; ++i) {
            double s = 0.0;
            for (const auto& p : dist.idle) s += p(i);
            t.totals.push_back(s);
        }
    }
    for (int r = a; r <= b; ++r)
        for (Eigen::Index i = 0; i < m; ++i) {
            double s = 0.0;
            for (int n = 0; n <= dist.n_max; ++n) s += dist.pi(n, r)(i);
            t.totals.push_back(s);
        }
    t.totals.push_back(dist.total_mass());
}

}  // namespace

int default_display_rows(const Solution& sol) {
    const double rho = sol.report.rho;
    const int b = sol.departure.b;
    const int cap =
        static_cast<int>(std::ceil(10.0 * b / std::max(1.0 - rho, 1e-6)));
    const double total_b = sol.departure.pi_b_total().sum();
    double partial = 0.0;
    for (int n = 0; n <= cap && n <= sol.departure.n_max; ++n) {
        partial += sol.departure.pi_plus[static_cast<size_t>(n)].back().sum();
        if (total_b - partial < 1e-10) return n;
    }
    return std::min(cap, sol.arbitrary.n_max);
}

Table departure_table(const Solution& sol, int display_n_max) {
    const auto& dep = sol.departure;
    const auto m = dep.phi_plus.front().cols();
    Table t;
    t.name = "departure";
    for (int r = dep.a; r <= dep.b; ++r)
        for (Eigen::Index i = 0; i < m; ++i)
            t.columns.push_back("pi+_" + std::to_string(i + 1) + "[r=" +
                                std::to_string(r) + "]");
    t.columns.push_back("psi+(n)e");
    const int rows = std::min(display_n_max, dep.n_max);
    for (int n = 0; n <= rows; ++n) t.row_labels.push_back(std::to_string(n));
    for (int n = 0; n <= rows; ++n) {
        std::vector<double> row;
        for (int r = dep.a; r <= dep.b; ++r)
            for (Eigen::Index i = 0; i < m; ++i) row.push_back(dep.pi(n, r)(i));
        row.push_back(dep.psi_marginal[static_cast<size_t>(n)].sum());
        t.body.push_back(std::move(row));
    }
    double grand = 0.0;
    for (const auto& phi : dep.phi_plus) {
        for (Eigen::Index i = 0; i < m; ++i) t.totals.push_back(phi(i));
        grand += phi.sum();
    }
    t.totals.push_back(grand);
    return t;
}

Table arbitrary_table(const Solution& sol, int display_n_max) {
    const auto& arb = sol.arbitrary;
    const auto m = arb.busy.front().front().cols();
    Table t;
    t.name = "arbitrary";
    for (Eigen::Index i = 0; i < m; ++i)
        t.columns.push_back("p_" + std::to_string(i + 1) + "[r=0]");
    for (int r = arb.a; r <= arb.b; ++r)
        for (Eigen::Index i = 0; i < m; ++i)
            t.columns.push_back("pi_" + std::to_string(i + 1) + "[r=" +
                                std::to_string(r) + "]");
    t.columns.push_back("p_queue(n)");
    const int rows = std::min(display_n_max, arb.n_max);
    for (int n = 0; n <= rows; ++n) t.row_labels.push_back(std::to_string(n));
    epoch_body(arb, /*with_idle=*/true, t);
    return t;
}

Table pre_arrival_table(const Solution& sol, int display_n_max) {
    const auto& pre = sol.pre_arrival;
    const auto m = pre.busy.front().front().cols();
    Table t;
    t.name = "prearrival";
    for (Eigen::Index i = 0; i < m; ++i)
        t.columns.push_back("p-_" + std::to_string(i + 1) + "[r=0]");
    for (int r = pre.a; r <= pre.b; ++r)
        for (Eigen::Index i = 0; i < m; ++i)
            t.columns.push_back("pi-_" + std::to_string(i + 1) + "[r=" +
                                std::to_string(r) + "]");
    t.columns.push_back("p-_queue(n)");
    const int rows = std::min(display_n_max, pre.n_max);
    for (int n = 0; n <= rows; ++n) t.row_labels.push_back(std::to_string(n));
    epoch_body(pre, /*with_idle=*/true, t);
    return t;
}

Table measures_panel(const Solution& sol) {
    Table t;
    t.name = "measures";
    t.columns = {"value"};
    const auto& r = sol.report;
    const std::pair<std::string, double> entries[] = {
        {"L", r.l},        {"L_q", r.l_q},     {"L_s", r.l_s},
        {"W", r.w},        {"W_q", r.w_q},     {"P_idle", r.p_idle},
        {"P_busy", r.p_busy}, {"rho", r.rho},
        {"lambda*", sol.summary.lambda_star},  {"lambda_g", sol.summary.lambda_g},
        {"omega", sol.scalars.omega},          {"E*", sol.scalars.e_star},
    };
    for (const auto& [k, v] : entries) {
        t.row_labels.push_back(k);
        t.body.push_back({v});
    }
    return t;
}

Table comparison_table(const Solution& sol, const SimEstimate& sim) {
    Table t;
    t.name = "comparison";
    t.columns = {"analytic", "simulated", "std_error", "z"};
    const std::tuple<std::string, double, SimMeasure> rows[] = {
        {"L", sol.report.l, sim.l},        {"L_q", sol.report.l_q, sim.l_q},
        {"L_s", sol.report.l_s, sim.l_s},  {"W", sol.report.w, sim.w},
        {"W_q", sol.report.w_q, sim.w_q},  {"P_idle", sol.report.p_idle, sim.p_idle},
    };
    for (const auto& [name, analytic, meas] : rows) {
        t.row_labels.push_back(name);
        const double z = meas.std_error > 0.0
                             ? (analytic - meas.mean) / meas.std_error
                             : 0.0;
        t.body.push_back({analytic, meas.mean, meas.std_error, z});
    }
    return t;
}

std::string render_text(const Table& table) {
    const size_t ncol = table.columns.size();
    std::vector<size_t> width(ncol + 1, 1);
    width[0] = 5;
    for (const auto& lbl : table.row_labels) width[0] = std::max(width[0], lbl.size());
    width[0] = std::max(width[0], std::string("Total").size());
    for (size_t c = 0; c < ncol; ++c) {
        width[c + 1] = table.columns[c].size();
        for (const auto& row : table.body)
            width[c + 1] = std::max(width[c + 1], cell(row[c]).size());
        if (c < table.totals.size())
            width[c + 1] = std::max(width[c + 1], cell(table.totals[c]).size());
    }
    std::ostringstream os;
    auto pad = [&](const std::string& s, size_t w) {
        for (size_t i = s.size(); i < w; ++i) os << ' ';
        os << s;
    };
    pad("n", width[0]);
    for (size_t c = 0; c < ncol; ++c) {
        os << "  ";
        pad(table.columns[c], width[c + 1]);
    }
    os << '\n';
    for (size_t r = 0; r < table.body.size(); ++r) {
        pad(table.row_labels[r], width[0]);
        for (size_t c = 0; c < ncol; ++c) {
            os << "  ";
            pad(cell(table.body[r][c]), width[c + 1]);
        }
        os << '\n';
    }
    if (!table.totals.empty()) {
        pad("Total", width[0]);
        for (size_t c = 0; c < ncol; ++c) {
            os << "  ";
            pad(c < table.totals.size() ? cell(table.totals[c]) : "", width[c + 1]);
        }
        os << '\n';
    }
    return os.str();
}

std::string render_csv(const Table& table) {
    std::ostringstream os;
    os << "n";
    for (const auto& c : table.columns) os << ',' << c;
    os << '\n';
    for (size_t r = 0; r < table.body.size(); ++r) {
        os << table.row_labels[r];
        for (double v : table.body[r]) os << ',' << cell(v);
        os << '\n';
    }
    if (!table.totals.empty()) {
        os << "Total";
        for (double v : table.totals) os << ',' << cell(v);
        os << '\n';
    }
    return os.str();
}

}  // namespace bulkq
