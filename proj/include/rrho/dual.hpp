#pragma once

#include <cstddef>
#include <utility>
#include <vector>

#include "rrho/params.hpp"
#include "rrho/preprocess.hpp"

namespace rrho {

// Dense nonnegative matrix with row sums mu and column sums nu. Only used at
// oracle scale.
struct Coupling {
    std::size_t n = 0, m = 0;
    std::vector<double> a;  // row-major n x m

    Coupling() = default;
    Coupling(std::size_t n_, std::size_t m_) : n(n_), m(m_), a(n_ * m_, 0.0) {}

    double& at(std::size_t i, std::size_t j) { return a[i * m + j]; }
    double at(std::size_t i, std::size_t j) const { return a[i * m + j]; }

    std::vector<double> row_sums() const;
    std::vector<double> col_sums() const;

    // max absolute marginal violation against the given distributions
    double marginal_violation(const std::vector<double>& mu, const std::vector<double>& nu) const;
};

// Dual iterate (alpha, beta); entries carry units of r^rho.
struct DualState {
    std::vector<double> alpha, beta;
    long iteration = 0;

    static DualState zeros(std::size_t n, std::size_t m) {
        DualState st;
        st.alpha.assign(n, 0.0);
        st.beta.assign(m, 0.0);
        return st;
    }
};

// (sum_ij mu_i nu_j (gamma_ij/(mu_i nu_j) * ||x_i-y_j||)^rho)^(1/rho), with
// 0/0 = 0. Throws CouplingMarginalViolation beyond 1e-6.
double primal_cost(const ProblemInstance& inst, const Coupling& gamma, double rho);

// g(alpha,beta) by direct double loop. Returns -inf if a zero-distance pair
// has alpha_i > beta_j (infeasible for the constrained dual on overlapping
// supports).
double dual_objective(const ProblemInstance& inst, const DualState& st, const HolderPair& hp);

// eta_i = s C_s sum_j nu_j ((alpha_i - beta_j)^+)^(s-1) / ||x_i - y_j||^s;
// the partial derivative is dg/dalpha_i = mu_i (1 - eta_i).
std::vector<double> grad_alpha_exact(const ProblemInstance& inst, const DualState& st,
                                     const HolderPair& hp);

// xi_j = s C_s sum_i mu_i ((alpha_i - beta_j)^+)^(s-1) / ||x_i - y_j||^s;
// dg/dbeta_j = -nu_j (1 - xi_j).
std::vector<double> grad_beta_exact(const ProblemInstance& inst, const DualState& st,
                                    const HolderPair& hp);

// C_s sum_ij mu_i nu_j ((alpha_i - beta_j)^+ / ||x_i - y_j||)^s
double penalty_exact(const ProblemInstance& inst, const DualState& st, const HolderPair& hp);

// gamma_ij = s C_s mu_i nu_j ((alpha_i - beta_j)^+)^(s-1) / ||x_i - y_j||^s
double coupling_entry(const ProblemInstance& inst, const DualState& st, const HolderPair& hp,
                      std::size_t i, std::size_t j);

// Dense form of the above; throws DenseTooLarge when n*m > 10^6.
Coupling coupling_from_dual(const ProblemInstance& inst, const DualState& st,
                            const HolderPair& hp);

// (lower, upper) = (emd, sup_ij (1/(mu_i nu_j))^((rho-1)/rho) * emd)
std::pair<double, double> sandwich_bounds(double emd, const std::vector<double>& mu_masses,
                                          const std::vector<double>& nu_masses, double rho);

}  // namespace rrho
