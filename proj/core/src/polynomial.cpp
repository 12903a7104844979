#include "bulkq/polynomial.hpp"

#include <algorithm>
#include <cmath>

namespace bulkq {

Complex poly_eval(const Poly& c, Complex z) {
    Complex acc(0.0, 0.0);
    for (auto it = c.rbegin(); it != c.rend(); ++it) acc = acc * z + *it;
    return acc;
}

double poly_eval(const Poly& c, double z) {
    double acc = 0.0;
    for (auto it = c.rbegin(); it != c.rend(); ++it) acc = acc * z + *it;
    return acc;
}

Poly poly_derivative(const Poly& c) {
    if (c.size() <= 1) return {0.0};
    Poly d(c.size() - 1);
    for (size_t k = 1; k < c.size(); ++k) d[k - 1] = static_cast<double>(k) * c[k];
    return d;
}

Poly poly_mul(const Poly& a, const Poly& b) {
    Poly out(a.size() + b.size() - 1, 0.0);
    for (size_t i = 0; i < a.size(); ++i)
        for (size_t j = 0; j < b.size(); ++j) out[i + j] += a[i] * b[j];
    return out;
}

Poly poly_add(const Poly& a, const Poly& b) {
    Poly out(std::max(a.size(), b.size()), 0.0);
    for (size_t i = 0; i < a.size(); ++i) out[i] += a[i];
    for (size_t i = 0; i < b.size(); ++i) out[i] += b[i];
    return out;
}

namespace {

// Parlett-Reinsch style balancing; Eigen's EigenSolver does not balance and
// companion matrices of high-degree polynomials need it.
void balance_matrix(Eigen::MatrixXd& a) {
    const int n = static_cast<int>(a.rows());
    bool converged = false;
    while (!converged) {
        converged = true;
        for (int i = 0; i < n; ++i) {
            double row = 0.0, col = 0.0;
            for (int j = 0; j < n; ++j) {
                if (j == i) continue;
                row += std::abs(a(i, j));
                col += std::abs(a(j, i));
            }
            if (row == 0.0 || col == 0.0) continue;
            double f = 1.0;
            double s = col + row;
            while (col < row / 2.0) {
                col *= 2.0;
                row /= 2.0;
                f *= 2.0;
            }
            while (col >= row * 2.0) {
                col /= 2.0;
                row *= 2.0;
                f /= 2.0;
            }
            if (col + row < 0.95 * s) {
                converged = false;
                a.row(i) /= f;
                a.col(i) *= f;
            }
        }
    }
}

}  // namespace

std::vector<Complex> poly_roots(const Poly& c, double strip) {
    int hi = static_cast<int>(c.size()) - 1;
    while (hi > 0 && std::abs(c[hi]) < strip) --hi;
    int lo = 0;
    while (lo < hi && c[lo] == 0.0) ++lo;  // exact zero roots at the origin
    std::vector<Complex> roots(lo, Complex(0.0, 0.0));
    const int deg = hi - lo;
    if (deg < 1) return roots;
    Eigen::MatrixXd comp = Eigen::MatrixXd::Zero(deg, deg);
    for (int k = 0; k < deg; ++k) comp(0, k) = -c[hi - 1 - k] / c[hi];
    for (int k = 1; k < deg; ++k) comp(k, k - 1) = 1.0;
    balance_matrix(comp);
    Eigen::EigenSolver<Eigen::MatrixXd> es(comp, /*computeEigenvectors=*/false);
    for (int k = 0; k < deg; ++k) roots.push_back(es.eigenvalues()(k));
    return roots;
}

MatPoly matpoly_mul(const MatPoly& a, const MatPoly& b) {
    const auto m = a.front().rows();
    MatPoly out(a.size() + b.size() - 1, Eigen::MatrixXd::Zero(m, m));
    for (size_t i = 0; i < a.size(); ++i)
        for (size_t j = 0; j < b.size(); ++j) out[i + j] += a[i] * b[j];
    return out;
}

MatPoly matpoly_add(const MatPoly& a, const MatPoly& b) {
    const auto m = a.front().rows();
    MatPoly out(std::max(a.size(), b.size()), Eigen::MatrixXd::Zero(m, m));
    for (size_t i = 0; i < a.size(); ++i) out[i] += a[i];
    for (size_t i = 0; i < b.size(); ++i) out[i] += b[i];
    return out;
}

MatPoly matpoly_of_scalar(const Poly& coeffs, const MatPoly& m) {
    const auto dim = m.front().rows();
    MatPoly acc{Eigen::MatrixXd::Zero(dim, dim)};
    for (auto it = coeffs.rbegin(); it != coeffs.rend(); ++it) {
        acc = matpoly_mul(acc, m);
        acc[0] += *it * Eigen::MatrixXd::Identity(dim, dim);
    }
    return acc;
}

namespace {

MatPoly matpoly_minor(const MatPoly& a, Eigen::Index di, Eigen::Index dj) {
    const auto m = a.front().rows();
    MatPoly out(a.size(), Eigen::MatrixXd::Zero(m - 1, m - 1));
    for (size_t k = 0; k < a.size(); ++k) {
        Eigen::Index ii = 0;
        for (Eigen::Index i = 0; i < m; ++i) {
            if (i == di) continue;
            Eigen::Index jj = 0;
            for (Eigen::Index j = 0; j < m; ++j) {
                if (j == dj) continue;
                out[k](ii, jj) = a[k](i, j);
                ++jj;
            }
            ++ii;
        }
    }
    return out;
}

}  // namespace

Poly matpoly_det(const MatPoly& a) {
    const auto m = a.front().rows();
    if (m == 1) {
        Poly out(a.size());
        for (size_t k = 0; k < a.size(); ++k) out[k] = a[k](0, 0);
        return out;
    }
    Poly out{0.0};
    double sign = 1.0;
    for (Eigen::Index j = 0; j < m; ++j) {
        Poly entry(a.size());
        for (size_t k = 0; k < a.size(); ++k) entry[k] = a[k](0, j);
        Poly term = poly_mul(entry, matpoly_det(matpoly_minor(a, 0, j)));
        for (auto& t : term) t *= sign;
        out = poly_add(out, term);
        sign = -sign;
    }
    return out;
}

MatPoly matpoly_adjugate(const MatPoly& a) {
    const auto m = a.front().rows();
    if (m == 1) return MatPoly{Eigen::MatrixXd::Ones(1, 1)};
    const size_t deg_out = (a.size() - 1) * static_cast<size_t>(m - 1);
    MatPoly out(deg_out + 1, Eigen::MatrixXd::Zero(m, m));
    for (Eigen::Index i = 0; i < m; ++i) {
        for (Eigen::Index j = 0; j < m; ++j) {
            Poly cof = matpoly_det(matpoly_minor(a, i, j));
            const double sign = ((i + j) % 2 == 0) ? 1.0 : -1.0;
            for (size_t k = 0; k < cof.size() && k <= deg_out; ++k)
                out[k](j, i) = sign * cof[k];
        }
    }
    return out;
}

Eigen::MatrixXcd adjugate(const Eigen::MatrixXcd& m) {
    const auto n = m.rows();
    if (n == 1) return Eigen::MatrixXcd::Ones(1, 1);
    Eigen::MatrixXcd adj(n, n);
    Eigen::MatrixXcd minor(n - 1, n - 1);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) {
            Eigen::Index ii = 0;
            for (Eigen::Index r = 0; r < n; ++r) {
                if (r == i) continue;
                Eigen::Index jj = 0;
                for (Eigen::Index c = 0; c < n; ++c) {
                    if (c == j) continue;
                    minor(ii, jj) = m(r, c);
                    ++jj;
                }
                ++ii;
            }
            const double sign = ((i + j) % 2 == 0) ? 1.0 : -1.0;
            adj(j, i) = sign * minor.determinant();
        }
    }
    return adj;
}

std::vector<std::vector<Complex>> cluster_points(const std::vector<Complex>& pts,
                                                 double tol_abs, double tol_rel) {
    const size_t n = pts.size();
    std::vector<size_t> parent(n);
    for (size_t i = 0; i < n; ++i) parent[i] = i;
    auto find = [&](size_t x) {
        while (parent[x] != x) {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        return x;
    };
    for (size_t i = 0; i < n; ++i) {
        for (size_t j = i + 1; j < n; ++j) {
            const double tol =
                std::max(tol_abs, tol_rel * std::max(std::abs(pts[i]), std::abs(pts[j])));
            if (std::abs(pts[i] - pts[j]) < tol) parent[find(i)] = find(j);
        }
    }
    std::vector<std::vector<Complex>> groups;
    std::vector<long> slot(n, -1);
    for (size_t i = 0; i < n; ++i) {
        const size_t root = find(i);
        if (slot[root] < 0) {
            slot[root] = static_cast<long>(groups.size());
            groups.emplace_back();
        }
        groups[static_cast<size_t>(slot[root])].push_back(pts[i]);
    }
    return groups;
}

}  // namespace bulkq
