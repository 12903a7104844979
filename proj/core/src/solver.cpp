#include "bulkq/solver.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <numeric>
#include <sstream>

#include "bulkq/errors.hpp"

namespace bulkq {

namespace {

constexpr double kClusterTolAbs = 5e-4;
constexpr double kClusterTolRel = 5e-4;
constexpr int kMaxDepth = 48;
constexpr int kMaxContourPoints = 4096;

double spread_of(const std::vector<Complex>& c, Complex center) {
    double s = 0.0;
    for (const Complex& x : c) s = std::max(s, std::abs(x - center));
    return s;
}

}  // namespace

Eigen::RowVectorXd DepartureDistribution::pi_b(int n) const {
    const auto m = phi_plus.front().cols();
    Eigen::RowVectorXcd acc = Eigen::RowVectorXcd::Zero(m);
    for (const auto& t : tail) {
        const Complex g = t.center;
        double binom = 1.0;  // C(n + i - 1, i - 1), built over i
        Complex gpow = std::pow(g, n + 1);
        double sign = -1.0;  // (-1)^i
        for (int i = 1; i <= t.depth; ++i) {
            acc += t.coeff[static_cast<size_t>(i - 1)] * (sign * binom / gpow);
            binom *= static_cast<double>(n + i) / static_cast<double>(i);
            gpow *= g;
            sign = -sign;
        }
    }
    Eigen::RowVectorXd out = acc.real();
    for (size_t j = 0; j < eps.size(); ++j)
        if (n < eps[j].size()) out(static_cast<Eigen::Index>(j)) += eps[j](n);
    return out;
}

Eigen::RowVectorXd DepartureDistribution::pi_b_total() const {
    const auto m = phi_plus.front().cols();
    Eigen::RowVectorXcd acc = Eigen::RowVectorXcd::Zero(m);
    for (const auto& t : tail) {
        Complex w = 1.0 / (Complex(1.0, 0.0) - t.center);
        Complex wp = w;
        for (int i = 1; i <= t.depth; ++i) {
            // 1/(z-g)^i at z=1 equals (-1)^i / (g-1)^i = -(1/(1-g))^i with sign folded
            acc += t.coeff[static_cast<size_t>(i - 1)] * wp;
            wp *= w;
        }
    }
    Eigen::RowVectorXd out = acc.real();
    for (size_t j = 0; j < eps.size(); ++j)
        out(static_cast<Eigen::Index>(j)) += eps[j].sum();
    return out;
}

double DepartureDistribution::tail_mass_beyond(int n) const {
    double partial = 0.0;
    for (int k = 0; k <= n; ++k)
        partial += pi_plus[static_cast<size_t>(k)].back().sum();
    return pi_b_total().sum() - partial;
}

StationarySolver::StationarySolver(const KernelFamily& kernel,
                                   const StationaryArrivalSummary& summary)
    : kernel_(&kernel),
      summary_(summary),
      rec_(idle_recursions(kernel.model(), kernel.policy().a, kernel.policy().b)) {}

std::vector<Eigen::MatrixXcd> StationarySolver::numerator_matrices(Complex z) const {
    const auto& model = kernel_->model();
    const int a = kernel_->policy().a;
    const int b = kernel_->policy().b;
    const int m = model.phases();
    const Complex zb = std::pow(z, b);
    std::vector<Eigen::MatrixXcd> av;
    av.reserve(static_cast<size_t>(b - a + 1));
    for (int r = a; r <= b; ++r) av.push_back(kernel_->eval(r, z));
    const Eigen::MatrixXcd& ab = av.back();
    const auto id = Eigen::MatrixXcd::Identity(m, m);

    std::vector<Eigen::MatrixXcd> out;
    out.reserve(static_cast<size_t>(b));
    for (int n = 0; n < a; ++n) {
        Eigen::MatrixXcd term = Eigen::MatrixXcd::Zero(m, m);
        for (int j = a; j <= b; ++j)
            term += rec_.c(j, n).cast<Complex>() * av[static_cast<size_t>(j - a)];
        term *= zb;
        Eigen::MatrixXcd tq = Eigen::MatrixXcd::Zero(m, m);
        for (int i = b - a + 2; i <= b + 1 - n; ++i)
            tq += model.tau(i, z) * rec_.q(b + 1 - n - i).cast<Complex>() *
                  std::pow(z, b + 1 - i);
        term -= (std::pow(z, n) * id - tq) * ab;
        out.push_back(term);
    }
    for (int n = a; n < b; ++n)
        out.push_back(zb * av[static_cast<size_t>(n - a)] - std::pow(z, n) * ab);
    return out;
}

Eigen::RowVectorXcd StationarySolver::w_vector(const std::vector<Eigen::RowVectorXd>& psi,
                                               Complex z) const {
    const auto& model = kernel_->model();
    const int a = kernel_->policy().a;
    const int b = kernel_->policy().b;
    const int m = model.phases();
    const Complex zb = std::pow(z, b);
    const auto id = Eigen::MatrixXcd::Identity(m, m);
    std::vector<Eigen::MatrixXcd> av;
    av.reserve(static_cast<size_t>(b - a));
    for (int r = a; r < b; ++r) av.push_back(kernel_->eval(r, z));

    Eigen::RowVectorXcd acc = Eigen::RowVectorXcd::Zero(m);
    for (int j = 0; j < a; ++j) {
        Eigen::MatrixXcd term = Eigen::MatrixXcd::Zero(m, m);
        for (int l = a; l < b; ++l)
            term += rec_.c(l, j).cast<Complex>() * av[static_cast<size_t>(l - a)];
        term += rec_.c(b, j).cast<Complex>() * zb;
        for (int i = b - a + 2; i <= b + 1 - j; ++i)
            term += model.tau(i, z) * rec_.q(b + 1 - j - i).cast<Complex>() *
                    std::pow(z, b + 1 - i);
        term -= std::pow(z, j) * id;
        acc += psi[static_cast<size_t>(j)].cast<Complex>() * term;
    }
    for (int j = a; j < b; ++j)
        acc += psi[static_cast<size_t>(j)].cast<Complex>() *
               (av[static_cast<size_t>(j - a)] - std::pow(z, j) * id);
    return acc;
}

Eigen::RowVectorXcd StationarySolver::f_plus(const std::vector<Eigen::RowVectorXd>& psi,
                                             Complex z) const {
    // division-free kernel form: A^(b) (z^b I - A^(b))^{-1} = f (z^b d I - f)^{-1}
    // with f = P(-D) adj(Q(-D)) and d = det Q(-D); stays evaluable where the
    // A^(b) pole part cancels (zeros of d^(b))
    const int b = kernel_->policy().b;
    const int m = kernel_->model().phases();
    const auto& law = kernel_->policy().law(b);
    const Eigen::MatrixXcd neg_dz = -kernel_->model().d_of_z(z);
    const Eigen::MatrixXcd id = Eigen::MatrixXcd::Identity(m, m);
    Eigen::MatrixXcd q = Eigen::MatrixXcd::Zero(m, m);
    for (auto it = law.lst_den().rbegin(); it != law.lst_den().rend(); ++it)
        q = q * neg_dz + *it * id;
    Eigen::MatrixXcd p = Eigen::MatrixXcd::Zero(m, m);
    for (auto it = law.lst_num().rbegin(); it != law.lst_num().rend(); ++it)
        p = p * neg_dz + *it * id;
    const Eigen::MatrixXcd adj_q = adjugate(q);
    Complex d(0.0, 0.0);
    if (m == 1) {
        d = q(0, 0);
    } else {
        for (Eigen::Index j = 0; j < m; ++j) d += q(0, j) * adj_q(j, 0);
    }
    const Eigen::MatrixXcd f = p * adj_q;
    Eigen::MatrixXcd h = std::pow(z, b) * d * id - f;
    const double scale = std::max(h.cwiseAbs().maxCoeff(), 1e-300);
    h /= scale;
    const Eigen::RowVectorXcd w = w_vector(psi, z);
    // F h = W f  =>  h^T F^T = (W f)^T
    return Eigen::PartialPivLU<Eigen::MatrixXcd>(h.transpose())
        .solve((w * f / scale).transpose())
        .transpose();
}

BoundaryVectors StationarySolver::solve_boundary() {
    const int a = kernel_->policy().a;
    const int b = kernel_->policy().b;
    const int m = kernel_->model().phases();
    const int mb = m * b;
    char_poly_ = classify_char_roots(*kernel_, summary_);

    // one scalar condition per interior root != 1; conjugate pairs give the
    // real and imaginary parts of one member
    std::vector<Eigen::RowVectorXd> rows;
    for (const Complex& zi : char_poly_.inside_roots) {
        if (zi == Complex(1.0, 0.0)) continue;
        if (zi.imag() < -1e-9) continue;  // conjugate partner supplies these rows
        const Eigen::MatrixXcd n_mat =
            std::pow(zi, b) * Eigen::MatrixXcd::Identity(m, m) - kernel_->eval(b, zi);
        Eigen::JacobiSVD<Eigen::MatrixXcd> svd(n_mat, Eigen::ComputeFullV);
        const Eigen::VectorXcd u = svd.matrixV().col(m - 1);
        const auto rn = numerator_matrices(zi);
        Eigen::RowVectorXcd row(mb);
        for (int n = 0; n < b; ++n)
            row.segment(n * m, m) = (rn[static_cast<size_t>(n)] * u).transpose();
        if (std::abs(zi.imag()) <= 1e-9) {
            rows.push_back(row.real());
        } else {
            rows.push_back(row.real());
            rows.push_back(row.imag());
        }
    }
    if (static_cast<int>(rows.size()) != mb - 1)
        throw NullSpaceDimensionError(
            "boundary system row count mismatch (conjugate pairing failed)");

    BoundaryVectors out;
    Eigen::VectorXd direction(mb);
    if (mb == 1) {
        direction(0) = 1.0;
    } else {
        Eigen::MatrixXd sys(mb - 1, mb);
        for (int i = 0; i < mb - 1; ++i) {
            const double norm = rows[static_cast<size_t>(i)].norm();
            sys.row(i) = rows[static_cast<size_t>(i)] / (norm > 0.0 ? norm : 1.0);
        }
        Eigen::JacobiSVD<Eigen::MatrixXd> svd(sys, Eigen::ComputeFullV);
        const auto& sv = svd.singularValues();
        if (sv(mb - 2) < 1e-8 * sv(0))
            throw NullSpaceDimensionError(
                "boundary root conditions are rank deficient; the stationary "
                "direction is not unique");
        direction = svd.matrixV().col(mb - 1);
    }
    if (direction.sum() < 0.0) direction = -direction;

    std::vector<Eigen::RowVectorXd> psi(static_cast<size_t>(b));
    for (int n = 0; n < b; ++n) psi[static_cast<size_t>(n)] = direction.segment(n * m, m).transpose();

    // scale so that total departure-epoch mass (exact column sums) is one
    const ExtractionParts parts = extract_parts(psi);
    double mass = 0.0;
    for (int r = a; r < b; ++r) {
        const Eigen::MatrixXcd a1 = kernel_->eval(r, Complex(1.0, 0.0));
        mass += (parts.v[static_cast<size_t>(r - a)].cast<Complex>() * a1).real().sum();
    }
    {
        DepartureDistribution probe;
        probe.a = a;
        probe.b = b;
        probe.tail = parts.tail;
        probe.eps = parts.eps;
        probe.phi_plus.assign(1, Eigen::RowVectorXd::Zero(m));
        mass += probe.pi_b_total().sum();
    }
    if (mass < 0.0) {
        mass = -mass;
        for (auto& row : psi) row = -row;
    }
    for (auto& row : psi) {
        row /= mass;
        for (int j = 0; j < m; ++j) {
            if (row(j) < -1e-8)
                throw NegativeSolutionError("boundary vector has a negative entry");
            if (std::abs(row(j)) < 1e-12) row(j) = 0.0;
        }
    }
    out.psi_plus = std::move(psi);
    out.total_mass = 1.0;
    return out;
}

StationarySolver::ExtractionParts StationarySolver::extract_parts(
    const std::vector<Eigen::RowVectorXd>& psi) const {
    const auto& model = kernel_->model();
    const int a = kernel_->policy().a;
    const int b = kernel_->policy().b;
    const int m = model.phases();
    ExtractionParts parts;

    for (int r = a; r < b; ++r) {
        Eigen::RowVectorXd vec = psi[static_cast<size_t>(r)];
        for (int i = 0; i < a; ++i)
            vec += psi[static_cast<size_t>(i)] * rec_.c(r, i);
        parts.v.push_back(vec);
    }

    // pool polished roots of Upsilon (outside part) and of every d^(t); the
    // d^(b) zeros are near-singular evaluation points of F+ (their pole part
    // may cancel, but contours must still keep their distance), so they join
    // the cluster set too
    std::vector<Complex> roots = char_poly_.outside_roots;
    for (int t = a; t <= b; ++t) {
        for (Complex z : poly_roots(kernel_->denominator_poly(t))) {
            if (std::abs(z) <= 100.0) {
                const Complex start = z;
                const double travel_cap = 0.05 * std::max(1.0, std::abs(start));
                for (int it = 0; it < 48; ++it) {
                    const Complex step = kernel_->newton_step_denominator(t, z);
                    if (!std::isfinite(step.real()) || !std::isfinite(step.imag())) break;
                    z -= step;
                    if (std::abs(z - start) > travel_cap) {
                        z = start;
                        break;
                    }
                    if (std::abs(step) < 1e-14 * std::max(1.0, std::abs(z))) break;
                }
            }
            if (std::abs(z) <= 1.0 + 1e-8) {
                std::ostringstream os;
                os << "service-law denominator root inside the unit disk at " << z;
                throw ResidueInstability(os.str());
            }
            roots.push_back(z);
        }
    }

    // split near/far at the widest multiplicative radius gap: everything below
    // gets its own pole contour, everything beyond is folded into the analytic
    // residual (an exact Taylor correction sampled between the two groups)
    double far_cut = std::numeric_limits<double>::infinity();
    double sample_radius = 0.0;
    bool residual_correction = true;
    {
        std::vector<double> radii;
        for (const Complex& z : roots) radii.push_back(std::abs(z));
        std::sort(radii.begin(), radii.end());
        // first clear multiplicative gap whose lower edge is far enough out
        // that the truncated residual Taylor series converges on the disk
        for (size_t i = 0; i + 1 < radii.size(); ++i) {
            if (radii[i] < 8.0) continue;
            if (radii[i + 1] / radii[i] >= 8.0) {
                far_cut = 2.0 * radii[i];
                sample_radius = std::min(std::sqrt(radii[i] * radii[i + 1]),
                                         std::max(2.0 * radii[i], 1e4));
                break;
            }
        }
        if (!(sample_radius > 0.0)) {
            const double top = radii.empty() ? 1.0 : radii.back();
            sample_radius = 4.0 * std::max(top, 2.0);
            if (sample_radius > 1e4) residual_correction = false;  // nothing beyond
        }
        if (std::getenv("BULKQ_DEBUG_CLUSTERS"))
            std::fprintf(stderr, "far_cut=%.3e sample_radius=%.3e nroots=%zu\n",
                         far_cut, sample_radius, radii.size());
    }

    auto clusters = cluster_points(roots, kClusterTolAbs, kClusterTolRel);
    // agglomerate crowded groups: a single contour around a packed region lets
    // the quadrature cancel huge opposing residues analytically, which a sum of
    // tight per-pole contours cannot do at full precision
    {
        auto center_of = [](const std::vector<Complex>& c) {
            return std::accumulate(c.begin(), c.end(), Complex(0, 0)) /
                   static_cast<double>(c.size());
        };
        bool merged = true;
        while (merged) {
            merged = false;
            for (size_t i = 0; i < clusters.size() && !merged; ++i) {
                const Complex gi = center_of(clusters[i]);
                const double si = spread_of(clusters[i], gi);
                const double di = std::max(std::abs(gi) - 1.0, 0.05);
                for (size_t j = i + 1; j < clusters.size(); ++j) {
                    const Complex gj = center_of(clusters[j]);
                    const double sj = spread_of(clusters[j], gj);
                    const double dj = std::max(std::abs(gj) - 1.0, 0.05);
                    const double gap = std::abs(gi - gj);
                    if (gap < 1.6 * (si + sj) + 0.3 * std::min(di, dj)) {
                        std::vector<Complex> combined = clusters[i];
                        combined.insert(combined.end(), clusters[j].begin(),
                                        clusters[j].end());
                        const Complex gu = std::accumulate(combined.begin(),
                                                           combined.end(),
                                                           Complex(0, 0)) /
                                           static_cast<double>(combined.size());
                        const double du = std::max(std::abs(gu) - 1.0, 0.05);
                        if (spread_of(combined, gu) > 0.45 * du) continue;
                        clusters[i] = std::move(combined);
                        clusters.erase(clusters.begin() + static_cast<long>(j));
                        merged = true;
                        break;
                    }
                }
            }
        }
    }
    std::vector<Complex> centers;
    centers.reserve(clusters.size());
    for (const auto& c : clusters)
        centers.push_back(std::accumulate(c.begin(), c.end(), Complex(0, 0)) /
                          static_cast<double>(c.size()));

    for (size_t ci = 0; ci < clusters.size(); ++ci) {
        const Complex gc = centers[ci];
        if (std::abs(gc) > far_cut) continue;  // folded into the residual below
        double sep = std::numeric_limits<double>::infinity();
        for (size_t cj = 0; cj < clusters.size(); ++cj) {
            if (cj == ci) continue;
            for (const Complex& x : clusters[cj]) sep = std::min(sep, std::abs(gc - x));
        }
        for (const Complex& zi : char_poly_.inside_roots)
            sep = std::min(sep, std::abs(gc - zi));
        const double spread = spread_of(clusters[ci], gc);
        const double dist_disk_c = std::max(std::abs(gc) - 1.0, 0.05);
        double rho = std::min({1.4 * spread + 0.15 * dist_disk_c, 0.45 * sep,
                               0.8 * dist_disk_c});
        rho = std::max(rho, 1.05 * spread + 1e-9);
        if (std::getenv("BULKQ_DEBUG_CLUSTERS"))
            std::fprintf(stderr,
                         "cluster (%.6f,%.6f) members=%zu spread=%.2e sep=%.2e rho=%.2e\n",
                         gc.real(), gc.imag(), clusters[ci].size(), spread, sep, rho);

        // adaptive trapezoidal Laurent moments about gc
        auto moments = [&](int npt) {
            std::vector<Eigen::RowVectorXcd> h(kMaxDepth, Eigen::RowVectorXcd::Zero(m));
            for (int s = 0; s < npt; ++s) {
                const double ang = 2.0 * M_PI * (s + 0.5) / npt;
                const Complex dz = rho * Complex(std::cos(ang), std::sin(ang));
                const Eigen::RowVectorXcd fv = f_plus(psi, gc + dz);
                Complex w = dz;
                for (int i = 0; i < kMaxDepth; ++i) {
                    h[static_cast<size_t>(i)] += fv * w;
                    w *= dz;
                }
            }
            for (auto& hi : h) hi /= static_cast<double>(npt);
            return h;
        };
        int npt = 256;
        std::vector<Eigen::RowVectorXcd> h;
        for (int attempt = 0;; ++attempt) {
            try {
                h = moments(npt);
                break;
            } catch (const SolverError&) {
                if (attempt >= 5) throw;
                rho *= 1.0371;  // nudge off a singular evaluation point
            }
        }
        const int members = static_cast<int>(clusters[ci].size());
        while (npt < kMaxContourPoints) {
            std::vector<Eigen::RowVectorXcd> h2;
            try {
                h2 = moments(2 * npt);
            } catch (const SolverError&) {
                rho *= 1.0371;
                continue;
            }
            double err = 0.0;
            const int check_orders = std::min(kMaxDepth, std::max(members, 8));
            for (int i = 0; i < check_orders; ++i) {
                const double scale =
                    std::max(1.0, h2[static_cast<size_t>(i)].cwiseAbs().maxCoeff());
                err = std::max(err,
                               (h[static_cast<size_t>(i)] - h2[static_cast<size_t>(i)])
                                       .cwiseAbs()
                                       .maxCoeff() /
                                   scale);
            }
            h = std::move(h2);
            npt *= 2;
            if (err < 1e-13) break;
        }
        // keep Laurent orders that still matter on the unit disk
        const double dist_disk = std::max(std::abs(gc) - 1.0, 0.05);
        double scale = 0.0;
        double pw = dist_disk;
        for (int i = 0; i < kMaxDepth; ++i) {
            scale = std::max(scale, h[static_cast<size_t>(i)].cwiseAbs().maxCoeff() / pw);
            pw *= dist_disk;
        }
        int depth = 1;
        for (int i = 0; i < kMaxDepth; ++i) {
            const double contrib = h[static_cast<size_t>(i)].cwiseAbs().maxCoeff() /
                                   std::pow(dist_disk, i + 1);
            if (contrib > 1e-16 * std::max(scale, 1e-12)) depth = i + 1;
        }
        if (std::getenv("BULKQ_DEBUG_CLUSTERS"))
            std::fprintf(stderr,
                         "   -> depth=%d npt=%d |H1|=%.3e |H_last|=%.3e\n",
                         depth, npt, h[0].cwiseAbs().maxCoeff(),
                         h[static_cast<size_t>(depth - 1)].cwiseAbs().maxCoeff());
        PoleClusterTerm term;
        term.center = gc;
        term.depth = depth;
        term.coeff.assign(h.begin(), h.begin() + depth);
        parts.tail.push_back(std::move(term));
    }

    // polynomial part: nonzero only when the size-b law has an atom at zero
    const double alpha_b = kernel_->policy().law(b).atom_at_zero();
    parts.eps.assign(static_cast<size_t>(m), Eigen::VectorXd());
    if (alpha_b != 0.0) {
        const int k_max = model.max_batch();
        const int deg_wp = b + std::max(k_max - 1, 0);
        Eigen::MatrixXd wp = Eigen::MatrixXd::Zero(deg_wp + 1, m);  // row p = coeff of z^p
        for (int j = 0; j < a; ++j) {
            wp.row(b) += psi[static_cast<size_t>(j)] * rec_.c(b, j);
            for (int i = b - a + 2; i <= b + 1 - j; ++i)
                for (int kk = i; kk <= k_max; ++kk)
                    wp.row(kk + b + 1 - i) += psi[static_cast<size_t>(j)] *
                                              (model.dbar(kk) * rec_.q(b + 1 - j - i));
            wp.row(j) -= psi[static_cast<size_t>(j)];
        }
        for (int j = a; j < b; ++j) wp.row(j) -= psi[static_cast<size_t>(j)];
        const int eps_len = std::max(deg_wp - b + 1, 1);
        Eigen::MatrixXd eps_m = Eigen::MatrixXd::Zero(eps_len, m);
        double alpha_pow = alpha_b;
        for (int nu = 1; nu * b <= deg_wp; ++nu) {
            for (int p = nu * b; p <= deg_wp; ++p) eps_m.row(p - nu * b) += alpha_pow * wp.row(p);
            alpha_pow *= alpha_b;
        }
        for (int j = 0; j < m; ++j) parts.eps[static_cast<size_t>(j)] = eps_m.col(j);
    }

    // analytic residual: poles beyond the gap (and any atom remainder) enter
    // F+ as a smooth term on the disk; recover its Taylor coefficients by a
    // Cauchy integral on the sampling circle between the two root groups
    if (residual_correction) {
        constexpr int kResidualPoints = 512;
        constexpr int kResidualOrders = 24;
        std::vector<Eigen::RowVectorXcd> fr(kResidualPoints);
        for (int s = 0; s < kResidualPoints; ++s) {
            const double ang = 2.0 * M_PI * (s + 0.5) / kResidualPoints;
            const Complex z =
                sample_radius * Complex(std::cos(ang), std::sin(ang));
            Eigen::RowVectorXcd resid = f_plus(psi, z);
            for (const auto& t : parts.tail) {
                const Complex w = 1.0 / (z - t.center);
                Complex wp = w;
                for (int i = 1; i <= t.depth; ++i) {
                    resid -= t.coeff[static_cast<size_t>(i - 1)] * wp;
                    wp *= w;
                }
            }
            for (int j = 0; j < m; ++j) {
                Complex acc(0.0, 0.0);
                Complex zp(1.0, 0.0);
                for (Eigen::Index k = 0; k < parts.eps[static_cast<size_t>(j)].size(); ++k) {
                    acc += parts.eps[static_cast<size_t>(j)](k) * zp;
                    zp *= z;
                }
                resid(j) -= acc;
            }
            fr[static_cast<size_t>(s)] = resid;
        }
        Eigen::MatrixXd corr = Eigen::MatrixXd::Zero(kResidualOrders, m);
        double largest = 0.0;
        for (int n = 0; n < kResidualOrders; ++n) {
            Eigen::RowVectorXcd cn = Eigen::RowVectorXcd::Zero(m);
            for (int s = 0; s < kResidualPoints; ++s) {
                const double ang = 2.0 * M_PI * (s + 0.5) / kResidualPoints;
                const Complex z =
                    sample_radius * Complex(std::cos(ang), std::sin(ang));
                cn += fr[static_cast<size_t>(s)] / std::pow(z, n);
            }
            cn /= static_cast<double>(kResidualPoints);
            corr.row(n) = cn.real();
            largest = std::max(largest, cn.cwiseAbs().maxCoeff());
        }
        int keep = kResidualOrders;
        while (keep > 0 && corr.row(keep - 1).cwiseAbs().maxCoeff() < 1e-18) --keep;
        if (largest > 1e-18 && keep > 0) {
            for (int j = 0; j < m; ++j) {
                Eigen::VectorXd merged = Eigen::VectorXd::Zero(
                    std::max<Eigen::Index>(keep, parts.eps[static_cast<size_t>(j)].size()));
                merged.head(parts.eps[static_cast<size_t>(j)].size()) +=
                    parts.eps[static_cast<size_t>(j)];
                merged.head(keep) += corr.col(j).head(keep);
                parts.eps[static_cast<size_t>(j)] = merged;
            }
        }
    }
    return parts;
}

DepartureDistribution StationarySolver::extract(const BoundaryVectors& boundary,
                                                int n_max) const {
    const int a = kernel_->policy().a;
    const int b = kernel_->policy().b;
    const int m = kernel_->model().phases();
    const ExtractionParts parts = extract_parts(boundary.psi_plus);

    DepartureDistribution dist;
    dist.a = a;
    dist.b = b;
    dist.tail = parts.tail;
    dist.eps = parts.eps;
    dist.phi_plus.assign(static_cast<size_t>(b - a + 1), Eigen::RowVectorXd::Zero(m));
    for (int r = a; r < b; ++r)
        dist.phi_plus[static_cast<size_t>(r - a)] =
            (parts.v[static_cast<size_t>(r - a)].cast<Complex>() *
             kernel_->eval(r, Complex(1.0, 0.0)))
                .real();
    dist.phi_plus.back() = dist.pi_b_total();

    if (n_max < 0) {
        // smallest n with modeled r=b tail below 1e-10, capped per the default
        const double s_b = kernel_->policy().law(b).mean();
        const double rho = summary_.lambda_star * s_b / static_cast<double>(b);
        const int cap = static_cast<int>(
            std::ceil(10.0 * b / std::max(1.0 - rho, 1e-6)));
        const double total_b = dist.pi_b_total().sum();
        double partial = 0.0;
        n_max = cap;
        for (int n = 0; n <= cap; ++n) {
            partial += dist.pi_b(n).sum();
            if (total_b - partial < 1e-10) {
                n_max = n;
                break;
            }
        }
        n_max = std::max(n_max, 2 * b);
    }
    dist.n_max = n_max;

    std::vector<KernelFamily::Series> series;
    for (int r = a; r < b; ++r) series.push_back(kernel_->series(r, n_max));

    dist.pi_plus.assign(static_cast<size_t>(n_max) + 1,
                        std::vector<Eigen::RowVectorXd>(
                            static_cast<size_t>(b - a + 1), Eigen::RowVectorXd::Zero(m)));
    dist.psi_marginal.assign(static_cast<size_t>(n_max) + 1, Eigen::RowVectorXd::Zero(m));
    for (int n = 0; n <= n_max; ++n) {
        Eigen::RowVectorXd marg = Eigen::RowVectorXd::Zero(m);
        for (int r = a; r < b; ++r) {
            dist.pi_plus[static_cast<size_t>(n)][static_cast<size_t>(r - a)] =
                parts.v[static_cast<size_t>(r - a)] *
                series[static_cast<size_t>(r - a)].coeff[static_cast<size_t>(n)];
            marg += dist.pi_plus[static_cast<size_t>(n)][static_cast<size_t>(r - a)];
        }
        dist.pi_plus[static_cast<size_t>(n)].back() = dist.pi_b(n);
        marg += dist.pi_plus[static_cast<size_t>(n)].back();
        dist.psi_marginal[static_cast<size_t>(n)] = marg;
    }
    return dist;
}

double StationarySolver::boundary_residual(
    const std::vector<Eigen::RowVectorXd>& psi) const {
    const int b = kernel_->policy().b;
    const int m = kernel_->model().phases();
    double worst = 0.0;
    for (const Complex& zi : char_poly_.inside_roots) {
        if (zi == Complex(1.0, 0.0)) continue;
        const Eigen::MatrixXcd n_mat =
            std::pow(zi, b) * Eigen::MatrixXcd::Identity(m, m) - kernel_->eval(b, zi);
        Eigen::JacobiSVD<Eigen::MatrixXcd> svd(n_mat, Eigen::ComputeFullV);
        const Eigen::VectorXcd u = svd.matrixV().col(m - 1);
        const auto rn = numerator_matrices(zi);
        Complex val(0.0, 0.0);
        for (int n = 0; n < b; ++n)
            val += (psi[static_cast<size_t>(n)].cast<Complex>() *
                    (rn[static_cast<size_t>(n)] * u))
                       .value();
        worst = std::max(worst, std::abs(val));
    }
    return worst;
}

double StationarySolver::reconstruction_error(
    const std::vector<Eigen::RowVectorXd>& psi,
    const DepartureDistribution& dist) const {
    const int m = kernel_->model().phases();
    const Complex probes[] = {{0.3, 0.2}, {-0.5, 0.1}, {0.9, 0.0}, {-0.2, -0.7}};
    double worst = 0.0;
    for (const Complex& z : probes) {
        Eigen::RowVectorXcd pf = Eigen::RowVectorXcd::Zero(m);
        for (const auto& t : dist.tail) {
            Complex w = 1.0 / (z - t.center);
            Complex wp = w;
            for (int i = 1; i <= t.depth; ++i) {
                pf += t.coeff[static_cast<size_t>(i - 1)] * wp;
                wp *= w;
            }
        }
        for (size_t j = 0; j < dist.eps.size(); ++j) {
            Complex acc(0.0, 0.0);
            Complex zp(1.0, 0.0);
            for (Eigen::Index k = 0; k < dist.eps[j].size(); ++k) {
                acc += dist.eps[j](k) * zp;
                zp *= z;
            }
            pf(static_cast<Eigen::Index>(j)) += acc;
        }
        worst = std::max(worst, (f_plus(psi, z) - pf).cwiseAbs().maxCoeff());
    }
    return worst;
}

}  // namespace bulkq
