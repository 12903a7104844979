#include "bulkq/config.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "bulkq/errors.hpp"

namespace bulkq {

namespace {

using nlohmann::json;

Eigen::MatrixXd parse_matrix(const json& rows, const std::string& where) {
    if (!rows.is_array() || rows.empty())
        throw SolverError(where + ": expected a non-empty array of rows");
    const size_t m = rows.size();
    Eigen::MatrixXd out(m, m);
    for (size_t i = 0; i < m; ++i) {
        if (!rows[i].is_array() || rows[i].size() != m)
            throw SolverError(where + ": row " + std::to_string(i) +
                              " must have " + std::to_string(m) + " entries");
        for (size_t j = 0; j < m; ++j) out(static_cast<Eigen::Index>(i),
                                           static_cast<Eigen::Index>(j)) =
            rows[i][j].get<double>();
    }
    return out;
}

double rate_for(const std::string& rule, double mu, int r, const std::string& where) {
    if (rule == "mu_r = r*mu") return static_cast<double>(r) * mu;
    if (rule == "mu_r = mu/r") return mu / static_cast<double>(r);
    if (rule == "mu_r = mu") return mu;
    throw SolverError(where + ": unknown rate rule '" + rule + "'");
}

ServiceLaw parse_one_law(const json& j, int r, const SolverOptions& opts,
                         const std::string& where) {
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "ph") {
        const auto beta_j = j.at("beta");
        Eigen::RowVectorXd beta(beta_j.size());
        for (size_t i = 0; i < beta_j.size(); ++i)
            beta(static_cast<Eigen::Index>(i)) = beta_j[i].get<double>();
        Eigen::MatrixXd t = parse_matrix(j.at("T"), where + ".T");
        return ServiceLaw::phase_type(beta, t);
    }
    if (kind == "deterministic") {
        const double tau = j.at("tau").get<double>();
        int pn = opts.pade_num, pd = opts.pade_den;
        if (j.contains("pade_order")) {
            pn = j["pade_order"][0].get<int>();
            pd = j["pade_order"][1].get<int>();
        }
        return ServiceLaw::deterministic(tau, pn, pd);
    }
    throw SolverError(where + ": unknown service kind '" + kind + "' for r=" +
                      std::to_string(r));
}

}  // namespace

ModelSpec parse_model_spec(const std::string& json_text) {
    json root;
    try {
        root = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw SolverError(std::string("spec parse error: ") + e.what());
    }
    ModelSpec spec;

    // arrival block
    const auto& arrival = root.at("arrival");
    const auto& mats = arrival.at("matrices");
    int k_top = 0;
    for (const auto& entry : mats) k_top = std::max(k_top, entry.at("k").get<int>());
    if (k_top < 1) throw SolverError("arrival: need at least one D_k with k >= 1");
    Eigen::Index m = 0;
    std::vector<Eigen::MatrixXd> d;
    for (const auto& entry : mats) {
        const int k = entry.at("k").get<int>();
        Eigen::MatrixXd dk = parse_matrix(entry.at("rows"),
                                          "arrival.matrices[k=" + std::to_string(k) + "]");
        if (m == 0) {
            m = dk.rows();
            d.assign(static_cast<size_t>(k_top) + 1, Eigen::MatrixXd::Zero(m, m));
        }
        if (k < 0 || k > k_top) throw SolverError("arrival: bad batch index");
        d[static_cast<size_t>(k)] = dk;
    }
    spec.model = BmapModel::validate(std::move(d));

    // solver block (parsed before service: Pade defaults feed law construction)
    if (root.contains("solver")) {
        const auto& s = root["solver"];
        if (s.contains("nmax")) spec.solver.n_max = s["nmax"].get<int>();
        if (s.contains("pade_order")) {
            spec.solver.pade_num = s["pade_order"][0].get<int>();
            spec.solver.pade_den = s["pade_order"][1].get<int>();
        }
        if (s.contains("series_tail_tol"))
            spec.solver.series_tail_tol = s["series_tail_tol"].get<double>();
    }

    // service block
    const auto& service = root.at("service");
    const int a = service.at("a").get<int>();
    const int b = service.at("b").get<int>();
    std::vector<ServiceLaw> laws;
    if (service.contains("laws")) {
        std::map<int, ServiceLaw> by_r;
        for (const auto& lj : service["laws"]) {
            const int r = lj.at("r").get<int>();
            by_r.emplace(r, parse_one_law(lj, r, spec.solver,
                                          "service.laws[r=" + std::to_string(r) + "]"));
        }
        for (int r = a; r <= b; ++r) {
            auto it = by_r.find(r);
            if (it == by_r.end())
                throw SolverError("service.laws: missing law for r=" + std::to_string(r));
            laws.push_back(it->second);
        }
    } else {
        const std::string kind = service.at("kind").get<std::string>();
        const std::string rule =
            service.contains("rate_rule") ? service["rate_rule"].get<std::string>()
                                          : "mu_r = mu";
        const double mu = service.at("mu").get<double>();
        for (int r = a; r <= b; ++r) {
            const double mu_r = rate_for(rule, mu, r, "service.rate_rule");
            if (kind == "ph") {
                const auto beta_j = service.at("beta");
                Eigen::RowVectorXd beta(beta_j.size());
                for (size_t i = 0; i < beta_j.size(); ++i)
                    beta(static_cast<Eigen::Index>(i)) = beta_j[i].get<double>();
                Eigen::MatrixXd t =
                    mu_r * parse_matrix(service.at("T_template"), "service.T_template");
                laws.push_back(ServiceLaw::phase_type(beta, t));
            } else if (kind == "deterministic") {
                laws.push_back(ServiceLaw::deterministic(1.0 / mu_r, spec.solver.pade_num,
                                                         spec.solver.pade_den));
            } else {
                throw SolverError("service.kind must be 'ph' or 'deterministic'");
            }
        }
    }
    spec.policy = make_policy(a, b, std::move(laws));

    if (root.contains("sim")) {
        spec.has_sim_block = true;
        const auto& s = root["sim"];
        if (s.contains("departures")) spec.sim.departures = s["departures"].get<long>();
        if (s.contains("replications"))
            spec.sim.replications = s["replications"].get<int>();
        if (s.contains("seed")) spec.sim.seed = s["seed"].get<std::uint64_t>();
        if (s.contains("warmup_fraction"))
            spec.sim.warmup_fraction = s["warmup_fraction"].get<double>();
    }
    return spec;
}

ModelSpec load_model_spec(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw SolverError("cannot open spec file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_model_spec(buf.str());
}

}  // namespace bulkq
