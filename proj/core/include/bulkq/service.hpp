#pragma once

#include <Eigen/Dense>
#include <map>
#include <optional>

#include "bulkq/polynomial.hpp"

namespace bulkq {

// Service-time law with a rational Laplace-Stieltjes transform P(theta)/Q(theta).
// Phase-type laws are exact; deterministic laws are rationalized by a Pade
// approximant of e^{-theta tau}.
class ServiceLaw {
public:
    enum class Kind { phase_type, deterministic };

    static ServiceLaw phase_type(const Eigen::RowVectorXd& beta,
                                 const Eigen::MatrixXd& sub_generator);
    static ServiceLaw deterministic(double tau, int pade_num_degree = 6,
                                    int pade_den_degree = 7);

    Kind kind() const { return kind_; }
    double mean() const { return mean_; }
    const Poly& lst_num() const { return num_; }
    const Poly& lst_den() const { return den_; }

    Complex lst_eval(Complex theta) const;

    // Atom at zero service time: lim_{theta->inf} P/Q (0 for strictly proper laws).
    double atom_at_zero() const;

    // Sampling data for the simulator.
    const Eigen::RowVectorXd& ph_beta() const { return beta_; }
    const Eigen::MatrixXd& ph_sub_generator() const { return sub_gen_; }
    double det_duration() const { return tau_; }

private:
    ServiceLaw() = default;
    Kind kind_ = Kind::deterministic;
    Poly num_;
    Poly den_;
    double mean_ = 0.0;
    Eigen::RowVectorXd beta_;
    Eigen::MatrixXd sub_gen_;
    double tau_ = 0.0;
};

// Pade(k, l) approximant of e^x about 0, ascending coefficients in x.
std::pair<Poly, Poly> pade_exp(int k, int l);

// Bulk thresholds plus one law per batch size r in [a, b].
struct ServicePolicy {
    int a = 1;
    int b = 1;
    std::vector<ServiceLaw> laws;  // indexed r - a

    const ServiceLaw& law(int r) const { return laws[static_cast<size_t>(r - a)]; }
    ServiceLaw& law(int r) { return laws[static_cast<size_t>(r - a)]; }
};

ServicePolicy make_policy(int a, int b, std::vector<ServiceLaw> laws);

}  // namespace bulkq
