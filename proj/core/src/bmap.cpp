#include "bulkq/bmap.hpp"

#include <cmath>
#include <sstream>

#include "bulkq/errors.hpp"

namespace bulkq {

namespace {

constexpr double kGeneratorTol = 1e-12;

// Strong connectivity of the nonzero pattern by forward/backward reachability.
bool pattern_irreducible(const Eigen::MatrixXd& d) {
    const auto n = d.rows();
    if (n == 1) return true;
    auto reach = [&](bool transpose) {
        std::vector<bool> seen(static_cast<size_t>(n), false);
        std::vector<Eigen::Index> stack{0};
        seen[0] = true;
        while (!stack.empty()) {
            const Eigen::Index i = stack.back();
            stack.pop_back();
            for (Eigen::Index j = 0; j < n; ++j) {
                if (i == j || seen[static_cast<size_t>(j)]) continue;
                const double v = transpose ? d(j, i) : d(i, j);
                if (v != 0.0) {
                    seen[static_cast<size_t>(j)] = true;
                    stack.push_back(j);
                }
            }
        }
        for (bool s : seen)
            if (!s) return false;
        return true;
    };
    return reach(false) && reach(true);
}

}  // namespace

BmapModel BmapModel::validate(std::vector<Eigen::MatrixXd> d_matrices) {
    if (d_matrices.size() < 2)
        throw SignPatternError("BMAP needs D_0 and at least one D_k, k >= 1");
    const auto m = d_matrices[0].rows();
    std::ostringstream diag;
    bool ok = true;
    for (const auto& dk : d_matrices) {
        if (dk.rows() != m || dk.cols() != m) {
            ok = false;
            diag << "matrix dimensions differ; ";
        }
    }
    if (!ok) throw SignPatternError("invalid BMAP: " + diag.str());

    const auto& d0 = d_matrices[0];
    for (Eigen::Index i = 0; i < m; ++i) {
        if (!(d0(i, i) < 0.0)) {
            ok = false;
            diag << "D_0(" << i << "," << i << ") not negative; ";
        }
        for (Eigen::Index j = 0; j < m; ++j) {
            if (i != j && d0(i, j) < 0.0) {
                ok = false;
                diag << "D_0(" << i << "," << j << ") negative; ";
            }
        }
    }
    for (size_t k = 1; k < d_matrices.size(); ++k) {
        if ((d_matrices[k].array() < 0.0).any()) {
            ok = false;
            diag << "D_" << k << " has negative entries; ";
        }
    }
    if (!ok) throw SignPatternError("invalid BMAP: " + diag.str());

    Eigen::MatrixXd total = Eigen::MatrixXd::Zero(m, m);
    for (const auto& dk : d_matrices) total += dk;
    const double worst_row = total.rowwise().sum().cwiseAbs().maxCoeff();
    if (worst_row > kGeneratorTol) {
        std::ostringstream os;
        os << "rows of sum_k D_k do not sum to zero (worst " << worst_row << ")";
        throw GeneratorRowSumError(os.str());
    }
    if (!pattern_irreducible(total))
        throw ReducibleError("generator D is reducible on its nonzero pattern");

    BmapModel model;
    model.m_ = static_cast<int>(m);
    model.k_ = static_cast<int>(d_matrices.size()) - 1;
    model.d_ = std::move(d_matrices);
    model.d_total_ = total;
    model.d0inv_neg_ = (-model.d_[0]).inverse();
    return model;
}

Eigen::MatrixXcd BmapModel::d_of_z(Complex z) const {
    Eigen::MatrixXcd acc = Eigen::MatrixXcd::Zero(m_, m_);
    for (auto it = d_.rbegin(); it != d_.rend(); ++it)
        acc = acc * z + it->cast<Complex>();
    return acc;
}

Eigen::MatrixXcd BmapModel::d_of_z_derivative(Complex z) const {
    Eigen::MatrixXcd acc = Eigen::MatrixXcd::Zero(m_, m_);
    for (int k = k_; k >= 1; --k)
        acc = acc * z + static_cast<double>(k) * d_[static_cast<size_t>(k)].cast<Complex>();
    return acc;
}

Eigen::MatrixXd BmapModel::dbar(int k) const {
    if (k < 1 || k > k_) return Eigen::MatrixXd::Zero(m_, m_);
    return d0inv_neg_ * d_[static_cast<size_t>(k)];
}

Eigen::MatrixXd BmapModel::tail_dprime(int n) const {
    Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(m_, m_);
    for (int k = std::max(n, 1); k <= k_; ++k) acc += d_[static_cast<size_t>(k)];
    return acc;
}

Eigen::MatrixXcd BmapModel::tau(int j, Complex z) const {
    Eigen::MatrixXcd acc = Eigen::MatrixXcd::Zero(m_, m_);
    for (int k = j; k <= k_; ++k)
        acc += dbar(k).cast<Complex>() * std::pow(z, k);
    return acc;
}

StationaryArrivalSummary stationary_summary(const BmapModel& model) {
    const int m = model.phases();
    // Replace the last column of D with ones and solve pi A = e_m.
    Eigen::MatrixXd a = model.d_sum();
    a.col(m - 1).setOnes();
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(m);
    rhs(m - 1) = 1.0;
    Eigen::FullPivLU<Eigen::MatrixXd> lu(a.transpose());
    if (!lu.isInvertible())
        throw SingularSolveError("stationary phase system is numerically singular");
    Eigen::VectorXd pi = lu.solve(rhs);
    const double resid = (pi.transpose() * model.d_sum()).cwiseAbs().maxCoeff();
    if (resid > 1e-8)
        throw SingularSolveError("stationary phase solve residual too large");

    StationaryArrivalSummary s;
    s.pi_bar = pi.transpose();
    Eigen::VectorXd kde = Eigen::VectorXd::Zero(m);
    Eigen::VectorXd de = Eigen::VectorXd::Zero(m);
    for (int k = 1; k <= model.max_batch(); ++k) {
        kde += static_cast<double>(k) * model.d(k).rowwise().sum();
        de += model.d(k).rowwise().sum();
    }
    s.lambda_star = s.pi_bar * kde;
    s.lambda_g = s.pi_bar * de;
    return s;
}

IdleRecursions idle_recursions(const BmapModel& model, int a, int b) {
    const int m = model.phases();
    IdleRecursions rec;
    rec.a = a;
    rec.b = b;

    rec.c_table.resize(static_cast<size_t>(b - a + 1));
    for (int l = a; l <= b; ++l) {
        auto& row = rec.c_table[static_cast<size_t>(l - a)];
        row.assign(static_cast<size_t>(a), Eigen::MatrixXd::Zero(m, m));
        row[static_cast<size_t>(a - 1)] = model.dbar(l - a + 1);
        for (int n = a - 2; n >= 0; --n) {
            Eigen::MatrixXd acc = model.dbar(l - n);
            for (int j = n + 1; j <= a - 1; ++j)
                acc += model.dbar(j - n) * row[static_cast<size_t>(j)];
            row[static_cast<size_t>(n)] = acc;
        }
    }

    rec.m_table.resize(static_cast<size_t>(a));
    for (int n = 0; n < a; ++n) {
        auto& row = rec.m_table[static_cast<size_t>(n)];
        row.assign(static_cast<size_t>(n + 1), Eigen::MatrixXd::Zero(m, m));
        row[static_cast<size_t>(n)] = Eigen::MatrixXd::Identity(m, m);
        if (n >= 1) row[static_cast<size_t>(n - 1)] = model.dbar(1);
        for (int i = n - 2; i >= 0; --i) {
            Eigen::MatrixXd acc = model.dbar(n - i);
            for (int j = i + 1; j <= n - 1; ++j)
                acc += row[static_cast<size_t>(j)] * model.dbar(j - i);
            row[static_cast<size_t>(i)] = acc;
        }
    }

    rec.q_table.assign(static_cast<size_t>(std::max(a, 1)),
                       Eigen::MatrixXd::Zero(m, m));
    rec.q_table[0] = Eigen::MatrixXd::Identity(m, m);
    if (a >= 2) rec.q_table[1] = model.dbar(1);
    for (int n = 2; n < a; ++n) {
        Eigen::MatrixXd acc = model.dbar(n);
        for (int j = 1; j <= n - 1; ++j)
            acc += rec.q_table[static_cast<size_t>(j)] * model.dbar(n - j);
        rec.q_table[static_cast<size_t>(n)] = acc;
    }
    return rec;
}

}  // namespace bulkq
