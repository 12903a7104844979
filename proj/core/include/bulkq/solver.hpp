#pragma once

#include <Eigen/Dense>
#include <vector>

#include "bulkq/kernel.hpp"

namespace bulkq {

// The mb departure-epoch boundary unknowns psi+(0..b-1), phase-indexed rows.
struct BoundaryVectors {
    std::vector<Eigen::RowVectorXd> psi_plus;  // b rows of width m
    double total_mass = 0.0;                   // certificate: 1 after scaling
};

// Laurent data of one pole cluster of F+(z) = sum_n pi+(n,b) z^n:
// contribution sum_i coeff[i-1] / (z - center)^i per phase column.
struct PoleClusterTerm {
    Complex center;
    int depth = 0;
    std::vector<Eigen::RowVectorXcd> coeff;  // depth rows of width m
};

struct DepartureDistribution {
    int a = 0;
    int b = 0;
    int n_max = 0;
    // pi_plus[n][r - a] row vectors, 0 <= n <= n_max, a <= r <= b
    std::vector<std::vector<Eigen::RowVectorXd>> pi_plus;
    // exact generating-function column sums phi+(r), a <= r <= b
    std::vector<Eigen::RowVectorXd> phi_plus;
    // queue marginals psi+(n) = sum_r pi+(n, r)
    std::vector<Eigen::RowVectorXd> psi_marginal;
    // tail model for the r = b column
    std::vector<PoleClusterTerm> tail;
    std::vector<Eigen::VectorXd> eps;  // polynomial part per phase (often empty)

    Eigen::RowVectorXd pi_b(int n) const;        // r = b row from the tail model
    Eigen::RowVectorXd pi_b_total() const;       // F+(1)
    double tail_mass_beyond(int n) const;        // sum over r=b rows past n
    const Eigen::RowVectorXd& pi(int n, int r) const {
        return pi_plus[static_cast<size_t>(n)][static_cast<size_t>(r - a)];
    }
};

class StationarySolver {
public:
    StationarySolver(const KernelFamily& kernel, const StationaryArrivalSummary& summary);

    // The linear map behind the queue-length VGF numerator: V(z) = sum_n psi+(n) R_n(z).
    std::vector<Eigen::MatrixXcd> numerator_matrices(Complex z) const;

    // Direct evaluation of F+(z) = W(z) A^(b)(z) [z^b I - A^(b)(z)]^{-1}.
    Eigen::RowVectorXcd f_plus(const std::vector<Eigen::RowVectorXd>& psi, Complex z) const;

    // Root conditions + mass scaling; also populates the char-poly data.
    BoundaryVectors solve_boundary();

    // Full departure-epoch distribution; n_max < 0 picks the spec default.
    DepartureDistribution extract(const BoundaryVectors& boundary, int n_max = -1) const;

    const CharPoly& char_poly() const { return char_poly_; }
    const IdleRecursions& recursions() const { return rec_; }

    // Residual diagnostics: max |V(z_i) u_i| over interior roots and the worst
    // partial-fraction reconstruction error at probe points.
    double boundary_residual(const std::vector<Eigen::RowVectorXd>& psi) const;
    double reconstruction_error(const std::vector<Eigen::RowVectorXd>& psi,
                                const DepartureDistribution& dist) const;

private:
    struct ExtractionParts {
        std::vector<Eigen::RowVectorXd> v;  // coefficient vectors for r < b
        std::vector<PoleClusterTerm> tail;
        std::vector<Eigen::VectorXd> eps;
    };
    ExtractionParts extract_parts(const std::vector<Eigen::RowVectorXd>& psi) const;
    Eigen::RowVectorXcd w_vector(const std::vector<Eigen::RowVectorXd>& psi, Complex z) const;

    const KernelFamily* kernel_;
    StationaryArrivalSummary summary_;
    IdleRecursions rec_;
    CharPoly char_poly_;
};

}  // namespace bulkq
