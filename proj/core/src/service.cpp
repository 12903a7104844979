#include "bulkq/service.hpp"

#include <cmath>
#include <sstream>

#include "bulkq/errors.hpp"

namespace bulkq {

namespace {

constexpr double kUnitTol = 1e-12;
constexpr double kMeanTol = 1e-10;

void check_rational_form(const Poly& num, const Poly& den, double mean) {
    if (num.size() > den.size())
        throw DegenerateApproximant("deg P must not exceed deg Q");
    const double at0 = num[0] / den[0];
    if (std::abs(at0 - 1.0) > kUnitTol)
        throw DegenerateApproximant("LST not normalized to 1 at theta = 0");
    // mean must agree with -d/dtheta P/Q at 0
    const double p0 = num[0], q0 = den[0];
    const double p1 = num.size() > 1 ? num[1] : 0.0;
    const double q1 = den.size() > 1 ? den[1] : 0.0;
    const double slope = (p1 * q0 - p0 * q1) / (q0 * q0);
    if (std::abs(-slope - mean) > kMeanTol * std::max(1.0, mean))
        throw DegenerateApproximant("LST derivative at 0 disagrees with the mean");
    for (const Complex& pole : poly_roots(den)) {
        if (pole.real() >= 0.0) {
            std::ostringstream os;
            os << "LST pole with nonnegative real part at " << pole.real();
            throw DegenerateApproximant(os.str());
        }
    }
}

}  // namespace

ServiceLaw ServiceLaw::phase_type(const Eigen::RowVectorXd& beta,
                                  const Eigen::MatrixXd& sub_generator) {
    const auto nu = sub_generator.rows();
    if (beta.size() != nu || sub_generator.cols() != nu)
        throw InvalidSubGenerator("beta and T dimensions disagree");
    if ((beta.array() < 0.0).any() || beta.sum() > 1.0 + kUnitTol)
        throw InvalidSubGenerator("beta must be substochastic and nonnegative");
    bool exit_row = false;
    for (Eigen::Index i = 0; i < nu; ++i) {
        if (!(sub_generator(i, i) < 0.0))
            throw InvalidSubGenerator("T diagonal must be negative");
        double row = 0.0;
        for (Eigen::Index j = 0; j < nu; ++j) {
            if (i != j && sub_generator(i, j) < 0.0)
                throw InvalidSubGenerator("T off-diagonals must be nonnegative");
            row += sub_generator(i, j);
        }
        if (row > kUnitTol) throw InvalidSubGenerator("T row sums must be <= 0");
        if (row < -kUnitTol) exit_row = true;
    }
    if (!exit_row) throw InvalidSubGenerator("T has no exit rate (Te = 0)");

    // theta I - T as a matrix polynomial; denominator is its determinant and the
    // numerator follows from beta adj(theta I - T)(-T e) + (1 - beta e) det.
    MatPoly theta_minus_t{-sub_generator, Eigen::MatrixXd::Identity(nu, nu)};
    Poly den = matpoly_det(theta_minus_t);
    MatPoly adj = matpoly_adjugate(theta_minus_t);
    const Eigen::VectorXd exit = -sub_generator.rowwise().sum();
    const double atom = 1.0 - beta.sum();
    Poly num(den.size(), 0.0);
    for (size_t k = 0; k < adj.size(); ++k) {
        const double v = beta * adj[k] * exit;
        num[k] += v;
    }
    for (size_t k = 0; k < den.size(); ++k) num[k] += atom * den[k];
    while (num.size() > 1 && num.back() == 0.0) num.pop_back();

    ServiceLaw law;
    law.kind_ = Kind::phase_type;
    law.num_ = std::move(num);
    law.den_ = std::move(den);
    law.mean_ = beta * (-sub_generator).inverse() * Eigen::VectorXd::Ones(nu);
    law.beta_ = beta;
    law.sub_gen_ = sub_generator;
    check_rational_form(law.num_, law.den_, law.mean_);
    return law;
}

ServiceLaw ServiceLaw::deterministic(double tau, int pade_num_degree,
                                     int pade_den_degree) {
    if (!(tau > 0.0)) throw DegenerateApproximant("deterministic duration must be > 0");
    if (pade_num_degree >= pade_den_degree)
        throw DegenerateApproximant("Pade order requires k < l");
    auto [pn, pd] = pade_exp(pade_num_degree, pade_den_degree);
    // S(theta) = N(-theta tau) / D(-theta tau)
    Poly num(pn.size()), den(pd.size());
    double pw = 1.0;
    for (size_t j = 0; j < std::max(pn.size(), pd.size()); ++j) {
        if (j < pn.size()) num[j] = pn[j] * pw;
        if (j < pd.size()) den[j] = pd[j] * pw;
        pw *= -tau;
    }
    ServiceLaw law;
    law.kind_ = Kind::deterministic;
    law.num_ = std::move(num);
    law.den_ = std::move(den);
    law.mean_ = tau;
    law.tau_ = tau;
    check_rational_form(law.num_, law.den_, law.mean_);
    return law;
}

Complex ServiceLaw::lst_eval(Complex theta) const {
    const Complex q = poly_eval(den_, theta);
    const double scale = std::abs(poly_eval(den_, Complex(0.0, 0.0)));
    if (std::abs(q) < 1e-14 * std::max(scale, 1.0))
        throw PoleEvaluation("LST evaluated at a pole of Q");
    return poly_eval(num_, theta) / q;
}

double ServiceLaw::atom_at_zero() const {
    if (num_.size() == den_.size()) return num_.back() / den_.back();
    return 0.0;
}

std::pair<Poly, Poly> pade_exp(int k, int l) {
    Poly num(static_cast<size_t>(k) + 1), den(static_cast<size_t>(l) + 1);
    num[0] = 1.0;
    for (int j = 0; j < k; ++j)
        num[static_cast<size_t>(j + 1)] =
            num[static_cast<size_t>(j)] * static_cast<double>(k - j) /
            (static_cast<double>(j + 1) * static_cast<double>(k + l - j));
    den[0] = 1.0;
    for (int j = 0; j < l; ++j)
        den[static_cast<size_t>(j + 1)] =
            den[static_cast<size_t>(j)] * (-static_cast<double>(l - j)) /
            (static_cast<double>(j + 1) * static_cast<double>(k + l - j));
    return {num, den};
}

ServicePolicy make_policy(int a, int b, std::vector<ServiceLaw> laws) {
    if (a < 1 || a > b) throw SolverError("need 1 <= a <= b");
    if (laws.size() != static_cast<size_t>(b - a + 1))
        throw SolverError("one service law per batch size in [a, b] required");
    return ServicePolicy{a, b, std::move(laws)};
}

}  // namespace bulkq
