#include "bulkq/kernel.hpp"

#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "bulkq/errors.hpp"

namespace bulkq {

namespace {

// Value/derivative pair of coeffs(-D(z)) along z.
struct MatPair {
    Eigen::MatrixXcd value;
    Eigen::MatrixXcd deriv;
};

MatPair horner_pair(const Poly& coeffs, const Eigen::MatrixXcd& m,
                    const Eigen::MatrixXcd& mp) {
    const auto dim = m.rows();
    MatPair out{Eigen::MatrixXcd::Zero(dim, dim), Eigen::MatrixXcd::Zero(dim, dim)};
    const Eigen::MatrixXcd id = Eigen::MatrixXcd::Identity(dim, dim);
    for (auto it = coeffs.rbegin(); it != coeffs.rend(); ++it) {
        out.deriv = out.deriv * m + out.value * mp;
        out.value = out.value * m + *it * id;
    }
    return out;
}

// det and d(det)/dz from a value/derivative pair, via the adjugate.
struct DetPair {
    Complex value;
    Complex deriv;
    Eigen::MatrixXcd adj;
};

DetPair det_pair(const MatPair& m) {
    DetPair out;
    out.adj = adjugate(m.value);
    const auto dim = m.value.rows();
    if (dim == 1) {
        out.value = m.value(0, 0);
        out.deriv = m.deriv(0, 0);
        return out;
    }
    // det = (first-row cofactor expansion), det' = tr(adj * M')
    out.value = Complex(0.0, 0.0);
    for (Eigen::Index j = 0; j < dim; ++j) out.value += m.value(0, j) * out.adj(j, 0);
    out.deriv = (out.adj * m.deriv).trace();
    return out;
}

}  // namespace

KernelFamily::KernelFamily(const BmapModel& model, const ServicePolicy& policy)
    : model_(&model), policy_(&policy) {
    const int m = model.phases();
    MatPoly neg_d;
    for (int k = 0; k <= model.max_batch(); ++k) neg_d.push_back(-model.d(k));

    den_polys_.reserve(static_cast<size_t>(policy.b - policy.a + 1));
    for (int r = policy.a; r <= policy.b; ++r)
        den_polys_.push_back(matpoly_det(matpoly_of_scalar(policy.law(r).lst_den(), neg_d)));

    // Upsilon = det(z^b d(z) I - f(z)) with f = P(-D) adj(Q(-D)).
    const auto& law_b = policy.law(policy.b);
    MatPoly qm = matpoly_of_scalar(law_b.lst_den(), neg_d);
    MatPoly pm = matpoly_of_scalar(law_b.lst_num(), neg_d);
    MatPoly f = matpoly_mul(pm, matpoly_adjugate(qm));
    const Poly& d = den_polys_.back();
    MatPoly h(std::max(f.size(), d.size() + static_cast<size_t>(policy.b)),
              Eigen::MatrixXd::Zero(m, m));
    for (size_t k = 0; k < f.size(); ++k) h[k] = -f[k];
    for (size_t k = 0; k < d.size(); ++k)
        h[k + static_cast<size_t>(policy.b)] += d[k] * Eigen::MatrixXd::Identity(m, m);
    upsilon_ = matpoly_det(h);
}

Eigen::MatrixXcd KernelFamily::eval(int r, Complex z) const {
    const auto& law = policy_->law(r);
    const Eigen::MatrixXcd neg_dz = -model_->d_of_z(z);
    const auto dim = neg_dz.rows();
    const Eigen::MatrixXcd id = Eigen::MatrixXcd::Identity(dim, dim);
    Eigen::MatrixXcd q = Eigen::MatrixXcd::Zero(dim, dim);
    for (auto it = law.lst_den().rbegin(); it != law.lst_den().rend(); ++it)
        q = q * neg_dz + *it * id;
    Eigen::MatrixXcd p = Eigen::MatrixXcd::Zero(dim, dim);
    for (auto it = law.lst_num().rbegin(); it != law.lst_num().rend(); ++it)
        p = p * neg_dz + *it * id;
    // scale before factorizing so very large |z| cannot overflow the pivots
    const double scale = std::max(q.cwiseAbs().maxCoeff(), 1e-300);
    Eigen::PartialPivLU<Eigen::MatrixXcd> lu((q / scale).transpose());
    const auto& lu_mat = lu.matrixLU();
    double pivot_min = std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < dim; ++i)
        pivot_min = std::min(pivot_min, std::abs(lu_mat(i, i)));
    if (!(pivot_min > 1e-14)) {
        std::ostringstream os;
        os << "Q_r(-D(z)) numerically singular at z = (" << z.real() << ", "
           << z.imag() << "), r = " << r << ", pivot " << pivot_min;
        throw SingularDenominator(os.str());
    }
    // A Q = P  =>  Q^T A^T = P^T
    return lu.solve(p.transpose() / scale).transpose();
}

Complex KernelFamily::denominator_value(int r, Complex z) const {
    const auto& law = policy_->law(r);
    const Eigen::MatrixXcd neg_dz = -model_->d_of_z(z);
    const auto dim = neg_dz.rows();
    const Eigen::MatrixXcd id = Eigen::MatrixXcd::Identity(dim, dim);
    Eigen::MatrixXcd q = Eigen::MatrixXcd::Zero(dim, dim);
    for (auto it = law.lst_den().rbegin(); it != law.lst_den().rend(); ++it)
        q = q * neg_dz + *it * id;
    return q.determinant();
}

const Poly& KernelFamily::denominator_poly(int r) const {
    return den_polys_[static_cast<size_t>(r - policy_->a)];
}

const Poly& KernelFamily::char_poly_coefficients() const { return upsilon_; }

KernelFamily::Series KernelFamily::series(int r, int n_max) const {
    const auto& law = policy_->law(r);
    const int m = model_->phases();
    double lambda = 0.0;
    for (int i = 0; i < m; ++i) lambda = std::max(lambda, -model_->d(0)(i, i));
    lambda *= 1.0000001;

    // Mixing weights w_nu = (-lambda)^nu [Taylor_nu of P/Q about lambda]; exact
    // for any rational LST, so series and point evaluations agree.
    auto shifted = [&](const Poly& c) {
        Poly out(c.size(), 0.0);
        for (size_t k = 0; k < c.size(); ++k) {
            double binom = 1.0;  // C(j, k) built incrementally over j
            double pw = 1.0;
            for (size_t j = k; j < c.size(); ++j) {
                out[k] += c[j] * binom * pw;
                binom *= static_cast<double>(j + 1) / static_cast<double>(j + 1 - k);
                pw *= lambda;
            }
        }
        return out;
    };
    const Poly pnum = shifted(law.lst_num());
    const Poly pden = shifted(law.lst_den());
    std::vector<double> weights;
    std::vector<double> taylor;
    double total = 0.0;
    int quiet = 0;
    double sign_pow = 1.0;
    constexpr double kTailTol = 1e-14;
    constexpr int kMaxTerms = 400000;
    while (static_cast<int>(weights.size()) < kMaxTerms) {
        const size_t nu = taylor.size();
        double acc = nu < pnum.size() ? pnum[nu] : 0.0;
        for (size_t i = 0; i < nu; ++i) {
            const size_t k = nu - i;
            if (k < pden.size()) acc -= taylor[i] * pden[k];
        }
        taylor.push_back(acc / pden[0]);
        const double w = taylor.back() * sign_pow;
        sign_pow *= -lambda;
        weights.push_back(w);
        total += w;
        quiet = std::abs(w) < 0.1 * kTailTol ? quiet + 1 : 0;
        if (quiet >= 4 && std::abs(1.0 - total) < 10 * kTailTol) break;
    }
    if (std::abs(1.0 - total) > 1e-10)
        throw TruncationError("uniformization weights failed to sum to one");

    // B_0 = I + D_0 / lambda, B_k = D_k / lambda; accumulate A_n = sum w_nu C_n.
    std::vector<Eigen::MatrixXd> bmat;
    bmat.push_back(Eigen::MatrixXd::Identity(m, m) + model_->d(0) / lambda);
    for (int k = 1; k <= model_->max_batch(); ++k) bmat.push_back(model_->d(k) / lambda);

    Series out;
    out.coeff.assign(static_cast<size_t>(n_max) + 1, Eigen::MatrixXd::Zero(m, m));
    std::vector<Eigen::MatrixXd> layer(static_cast<size_t>(n_max) + 1,
                                       Eigen::MatrixXd::Zero(m, m));
    layer[0] = Eigen::MatrixXd::Identity(m, m);
    out.coeff[0] += weights[0] * layer[0];
    int live = 0;
    std::vector<Eigen::MatrixXd> next(layer.size(), Eigen::MatrixXd::Zero(m, m));
    for (size_t nu = 1; nu < weights.size(); ++nu) {
        live = std::min(live + model_->max_batch(), n_max);
        for (int n = 0; n <= live; ++n) {
            Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(m, m);
            for (int k = 0; k <= std::min(model_->max_batch(), n); ++k)
                acc.noalias() += layer[static_cast<size_t>(n - k)] * bmat[static_cast<size_t>(k)];
            next[static_cast<size_t>(n)] = acc;
        }
        for (int n = 0; n <= live; ++n) {
            layer[static_cast<size_t>(n)] = next[static_cast<size_t>(n)];
            out.coeff[static_cast<size_t>(n)] += weights[nu] * layer[static_cast<size_t>(n)];
        }
    }
    Eigen::VectorXd mass = Eigen::VectorXd::Zero(m);
    for (const auto& an : out.coeff) mass += an.rowwise().sum();
    out.tail_mass = (Eigen::VectorXd::Ones(m) - mass).cwiseAbs().maxCoeff();
    return out;
}

Complex KernelFamily::newton_step_char(Complex z) const {
    const int b = policy_->b;
    const Eigen::MatrixXcd neg_dz = -model_->d_of_z(z);
    const Eigen::MatrixXcd neg_dzp = -model_->d_of_z_derivative(z);
    const auto& law = policy_->law(b);
    const MatPair q = horner_pair(law.lst_den(), neg_dz, neg_dzp);
    const MatPair p = horner_pair(law.lst_num(), neg_dz, neg_dzp);
    const DetPair dq = det_pair(q);
    const auto dim = neg_dz.rows();

    // f = P adj(Q); adjugate derivative entrywise via cofactor determinants.
    Eigen::MatrixXcd adj = dq.adj;
    Eigen::MatrixXcd adjp = Eigen::MatrixXcd::Zero(dim, dim);
    if (dim == 1) {
        adjp.setZero();
    } else {
        Eigen::MatrixXcd minor(dim - 1, dim - 1), minorp(dim - 1, dim - 1);
        for (Eigen::Index i = 0; i < dim; ++i) {
            for (Eigen::Index j = 0; j < dim; ++j) {
                Eigen::Index ii = 0;
                for (Eigen::Index rr = 0; rr < dim; ++rr) {
                    if (rr == i) continue;
                    Eigen::Index jj = 0;
                    for (Eigen::Index cc = 0; cc < dim; ++cc) {
                        if (cc == j) continue;
                        minor(ii, jj) = q.value(rr, cc);
                        minorp(ii, jj) = q.deriv(rr, cc);
                        ++jj;
                    }
                    ++ii;
                }
                const double sign = ((i + j) % 2 == 0) ? 1.0 : -1.0;
                adjp(j, i) = sign * (adjugate(minor) * minorp).trace();
            }
        }
    }
    const Eigen::MatrixXcd f = p.value * adj;
    const Eigen::MatrixXcd fp = p.deriv * adj + p.value * adjp;
    const Complex zb = std::pow(z, b);
    const Complex zbp = static_cast<double>(b) * std::pow(z, b - 1);
    const auto id = Eigen::MatrixXcd::Identity(dim, dim);
    const Eigen::MatrixXcd h = zb * dq.value * id - f;
    const Eigen::MatrixXcd hp = (zbp * dq.value + zb * dq.deriv) * id - fp;
    const Eigen::MatrixXcd adjh = adjugate(h);
    Complex det_h(0.0, 0.0);
    for (Eigen::Index j = 0; j < dim; ++j) det_h += h(0, j) * adjh(j, 0);
    if (dim == 1) det_h = h(0, 0);
    const Complex det_hp = (adjh * hp).trace();
    if (det_hp == Complex(0.0, 0.0)) return Complex(0.0, 0.0);
    return det_h / det_hp;
}

Complex KernelFamily::newton_step_denominator(int r, Complex z) const {
    const Eigen::MatrixXcd neg_dz = -model_->d_of_z(z);
    const Eigen::MatrixXcd neg_dzp = -model_->d_of_z_derivative(z);
    const MatPair q = horner_pair(policy_->law(r).lst_den(), neg_dz, neg_dzp);
    const DetPair dq = det_pair(q);
    if (dq.deriv == Complex(0.0, 0.0)) return Complex(0.0, 0.0);
    return dq.value / dq.deriv;
}

namespace {

std::vector<Complex> polish(const KernelFamily& kernel, std::vector<Complex> roots,
                            int den_index /* -1 for Upsilon */) {
    for (auto& z : roots) {
        if (std::abs(z) > 100.0) continue;
        const Complex start = z;
        const double travel_cap = 0.05 * std::max(1.0, std::abs(start));
        for (int it = 0; it < 48; ++it) {
            const Complex step = den_index < 0 ? kernel.newton_step_char(z)
                                               : kernel.newton_step_denominator(den_index, z);
            if (!std::isfinite(step.real()) || !std::isfinite(step.imag())) break;
            z -= step;
            if (std::abs(z - start) > travel_cap) {
                z = start;  // keep the companion estimate; Newton hopped basins
                break;
            }
            if (std::abs(step) < 1e-14 * std::max(1.0, std::abs(z))) break;
        }
    }
    return roots;
}

}  // namespace

CharPoly classify_char_roots(const KernelFamily& kernel,
                             const StationaryArrivalSummary& summary,
                             double cluster_tol) {
    const int m = kernel.model().phases();
    const int b = kernel.policy().b;
    const int mb = m * b;
    CharPoly out;
    out.coefficients = kernel.char_poly_coefficients();

    std::vector<Complex> roots = polish(kernel, poly_roots(out.coefficients), -1);
    size_t near_one = 0;
    double best = std::numeric_limits<double>::infinity();
    for (size_t i = 0; i < roots.size(); ++i) {
        const double d = std::abs(roots[i] - Complex(1.0, 0.0));
        if (d < best) {
            best = d;
            near_one = i;
        }
    }
    if (best > 1e-6) throw RootCountError("no characteristic root near z = 1");
    roots[near_one] = Complex(1.0, 0.0);

    for (const Complex& z : roots) {
        if (std::abs(z) <= 1.0 + 1e-8)
            out.inside_roots.push_back(z);
        else
            out.outside_roots.push_back(z);
    }
    if (static_cast<int>(out.inside_roots.size()) != mb) {
        std::ostringstream os;
        os << "expected " << mb << " characteristic roots in the closed unit disk, found "
           << out.inside_roots.size() << ";";
        const double s_b = kernel.policy().law(b).mean();
        const double rho = summary.lambda_star * s_b / static_cast<double>(b);
        if (rho >= 1.0)
            os << " system is unstable (rho = " << rho << " >= 1)";
        else
            os << " rho = " << rho << " < 1, so this indicates a bad service law"
               << " or a numerical failure";
        throw RootCountError(os.str());
    }
    for (size_t i = 0; i < out.inside_roots.size(); ++i)
        for (size_t j = i + 1; j < out.inside_roots.size(); ++j)
            if (std::abs(out.inside_roots[i] - out.inside_roots[j]) < cluster_tol)
                throw RootCountError(
                    "repeated characteristic roots inside the unit disk; the "
                    "boundary procedure requires simple interior roots");

    for (const auto& grp : cluster_points(out.outside_roots, cluster_tol, 0.0)) {
        RootCluster rc;
        rc.center = std::accumulate(grp.begin(), grp.end(), Complex(0.0, 0.0)) /
                    static_cast<double>(grp.size());
        rc.multiplicity = static_cast<int>(grp.size());
        out.outside_groups.push_back(rc);
    }
    return out;
}

}  // namespace bulkq
