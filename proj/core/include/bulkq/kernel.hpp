#pragma once

#include <Eigen/Dense>
#include <vector>

#include "bulkq/bmap.hpp"
#include "bulkq/service.hpp"

namespace bulkq {

// Service-period kernels A^(r)(z) = S_r applied to -D(z), their power-series
// coefficients, and the characteristic polynomial of z^b I - A^(b)(z).
class KernelFamily {
public:
    KernelFamily(const BmapModel& model, const ServicePolicy& policy);

    const BmapModel& model() const { return *model_; }
    const ServicePolicy& policy() const { return *policy_; }

    // A^(r)(z) = P_r(-D(z)) [Q_r(-D(z))]^{-1} by LU solve.
    Eigen::MatrixXcd eval(int r, Complex z) const;
    // d^(r)(z) = det Q_r(-D(z)) evaluated directly.
    Complex denominator_value(int r, Complex z) const;
    // Exact coefficients of d^(r)(z), assembled by matrix-polynomial arithmetic.
    const Poly& denominator_poly(int r) const;
    // Exact coefficients of Upsilon(z) = det(z^b d(z) I - f(z)).
    const Poly& char_poly_coefficients() const;

    struct Series {
        std::vector<Eigen::MatrixXd> coeff;  // A_0 .. A_N
        double tail_mass = 0.0;              // max row mass beyond N
    };
    // Uniformization with mixing weights taken from the law's rational LST so
    // that the series and point evaluations describe the same kernel.
    Series series(int r, int n_max) const;

    // Scale-free Newton corrections p(z)/p'(z) for root polishing.
    Complex newton_step_char(Complex z) const;
    Complex newton_step_denominator(int r, Complex z) const;

private:
    const BmapModel* model_;
    const ServicePolicy* policy_;
    std::vector<Poly> den_polys_;  // indexed r - a
    Poly upsilon_;
};

struct RootCluster {
    Complex center;
    int multiplicity = 1;
};

struct CharPoly {
    Poly coefficients;                        // Upsilon(z)
    std::vector<Complex> inside_roots;        // exactly m*b, contains 1.0
    std::vector<Complex> outside_roots;       // polished, unclustered
    std::vector<RootCluster> outside_groups;  // clustered at the tight tolerance
};

// Companion roots of Upsilon, polished at function level; asserts the m*b
// census (diagnosing instability via rho when the count is off) and snaps the
// root nearest 1 to exactly 1.
CharPoly classify_char_roots(const KernelFamily& kernel,
                             const StationaryArrivalSummary& summary,
                             double cluster_tol = 1e-6);

}  // namespace bulkq
