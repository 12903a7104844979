#pragma once

#include <Eigen/Dense>
#include <complex>
#include <map>
#include <vector>

#include "bulkq/polynomial.hpp"

namespace bulkq {

// Batch Markovian arrival process with finite batch support:
// D[0] governs phase changes without arrivals, D[k] arrivals of batch size k.
class BmapModel {
public:
    BmapModel() = default;  // empty; build real models through validate()

    // Validates sign pattern, generator row sums and irreducibility.
    static BmapModel validate(std::vector<Eigen::MatrixXd> d_matrices);

    int phases() const { return m_; }
    int max_batch() const { return k_; }
    const Eigen::MatrixXd& d(int k) const { return d_[static_cast<size_t>(k)]; }
    const Eigen::MatrixXd& d_sum() const { return d_total_; }
    const Eigen::MatrixXd& minus_d0_inverse() const { return d0inv_neg_; }

    // D(z) = sum_k D_k z^k and its z-derivative.
    Eigen::MatrixXcd d_of_z(Complex z) const;
    Eigen::MatrixXcd d_of_z_derivative(Complex z) const;

    // Dbar_k = (-D_0)^{-1} D_k (zero matrix outside 1..K).
    Eigen::MatrixXd dbar(int k) const;
    // D'_n = sum_{k=n}^{K} D_k (zero matrix for n > K).
    Eigen::MatrixXd tail_dprime(int n) const;
    // tau_j(z) = sum_{k=j}^{K} Dbar_k z^k.
    Eigen::MatrixXcd tau(int j, Complex z) const;

private:
    int m_ = 0;
    int k_ = 0;
    std::vector<Eigen::MatrixXd> d_;
    Eigen::MatrixXd d_total_;
    Eigen::MatrixXd d0inv_neg_;  // (-D_0)^{-1}
};

struct StationaryArrivalSummary {
    Eigen::RowVectorXd pi_bar;
    double lambda_star = 0.0;  // mean customer arrival rate
    double lambda_g = 0.0;     // mean batch arrival rate
};

StationaryArrivalSummary stationary_summary(const BmapModel& model);

// Idle-period accumulation matrices of the (a,b) analysis.
// C_{l,n}: first passage from queue n (< a) into a service of exactly l in [a,b].
// M_{n,i}: climb from i to n while staying below a.  Q_n: same with Q_0 = I.
struct IdleRecursions {
    int a = 0;
    int b = 0;
    // c_table[l - a][n], a <= l <= b, 0 <= n <= a-1
    std::vector<std::vector<Eigen::MatrixXd>> c_table;
    // m_table[n][i], 0 <= i <= n <= a-1
    std::vector<std::vector<Eigen::MatrixXd>> m_table;
    // q_table[n], 0 <= n <= a-1
    std::vector<Eigen::MatrixXd> q_table;

    const Eigen::MatrixXd& c(int l, int n) const {
        return c_table[static_cast<size_t>(l - a)][static_cast<size_t>(n)];
    }
    const Eigen::MatrixXd& m(int n, int i) const {
        return m_table[static_cast<size_t>(n)][static_cast<size_t>(i)];
    }
    const Eigen::MatrixXd& q(int n) const { return q_table[static_cast<size_t>(n)]; }
};

IdleRecursions idle_recursions(const BmapModel& model, int a, int b);

}  // namespace bulkq
