#pragma once

#include <Eigen/Dense>
#include <complex>
#include <vector>

namespace bulkq {

using Complex = std::complex<double>;

// Real polynomial, ascending coefficients: p(z) = c[0] + c[1] z + ...
using Poly = std::vector<double>;

Complex poly_eval(const Poly& c, Complex z);
double poly_eval(const Poly& c, double z);
Poly poly_derivative(const Poly& c);
Poly poly_mul(const Poly& a, const Poly& b);
Poly poly_add(const Poly& a, const Poly& b);

// All complex roots via a balanced companion matrix. Leading coefficients
// smaller than `strip` in absolute value are stripped (their roots lie far
// outside any region of interest).
std::vector<Complex> poly_roots(const Poly& c, double strip = 1e-290);

// Matrix polynomial (ascending coefficients of m x m matrices).
using MatPoly = std::vector<Eigen::MatrixXd>;

MatPoly matpoly_mul(const MatPoly& a, const MatPoly& b);
MatPoly matpoly_add(const MatPoly& a, const MatPoly& b);
// coeffs(M(z)) by Horner over the matrix polynomial M.
MatPoly matpoly_of_scalar(const Poly& coeffs, const MatPoly& m);
// Determinant / adjugate by cofactor recursion; fine for the small m used here.
Poly matpoly_det(const MatPoly& a);
MatPoly matpoly_adjugate(const MatPoly& a);

// Adjugate of an ordinary complex matrix by cofactors (valid at singular points).
Eigen::MatrixXcd adjugate(const Eigen::MatrixXcd& m);

// Greedy single-linkage clustering of complex points.
std::vector<std::vector<Complex>> cluster_points(const std::vector<Complex>& pts,
                                                 double tol_abs, double tol_rel);

}  // namespace bulkq
