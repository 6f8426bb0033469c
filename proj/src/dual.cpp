#include "rrho/dual.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace rrho {

std::vector<double> Coupling::row_sums() const {
    std::vector<double> out(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < m; ++j) out[i] += at(i, j);
    }
    return out;
}

std::vector<double> Coupling::col_sums() const {
    std::vector<double> out(m, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < m; ++j) out[j] += at(i, j);
    }
    return out;
}

double Coupling::marginal_violation(const std::vector<double>& mu,
                                    const std::vector<double>& nu) const {
    double worst = 0.0;
    auto rs = row_sums();
    auto cs = col_sums();
    for (std::size_t i = 0; i < n; ++i) worst = std::max(worst, std::abs(rs[i] - mu[i]));
    for (std::size_t j = 0; j < m; ++j) worst = std::max(worst, std::abs(cs[j] - nu[j]));
    return worst;
}

double primal_cost(const ProblemInstance& inst, const Coupling& gamma, double rho) {
    if (gamma.n != inst.n() || gamma.m != inst.m()) {
        throw CouplingMarginalViolation("coupling shape does not match instance");
    }
    if (gamma.marginal_violation(inst.mu.masses, inst.nu.masses) > 1e-6) {
        throw CouplingMarginalViolation("coupling marginals violate mu/nu beyond 1e-6");
    }
    double acc = 0.0;
    for (std::size_t i = 0; i < gamma.n; ++i) {
        auto x = inst.mu.point(i);
        double mi = inst.mu.masses[i];
        for (std::size_t j = 0; j < gamma.m; ++j) {
            double g = gamma.at(i, j);
            if (g == 0.0) continue;  // 0/0 = 0
            double w = mi * inst.nu.masses[j];
            double d = dist(x, inst.nu.point(j));
            acc += w * std::pow(g / w * d, rho);
        }
    }
    return std::pow(acc, 1.0 / rho);
}

double dual_objective(const ProblemInstance& inst, const DualState& st, const HolderPair& hp) {
    double linear = 0.0;
    for (std::size_t i = 0; i < inst.n(); ++i) linear += inst.mu.masses[i] * st.alpha[i];
    for (std::size_t j = 0; j < inst.m(); ++j) linear -= inst.nu.masses[j] * st.beta[j];

    PosPow pw(hp.s);
    double pen = 0.0;
    for (std::size_t i = 0; i < inst.n(); ++i) {
        auto x = inst.mu.point(i);
        double mi = inst.mu.masses[i];
        double ai = st.alpha[i];
        for (std::size_t j = 0; j < inst.m(); ++j) {
            double gap = ai - st.beta[j];
            if (gap <= 0.0) continue;
            double d = dist(x, inst.nu.point(j));
            if (d == 0.0) return -std::numeric_limits<double>::infinity();
            pen += mi * inst.nu.masses[j] * pw(gap / d);
        }
    }
    return linear - hp.c_s * pen;
}

std::vector<double> grad_alpha_exact(const ProblemInstance& inst, const DualState& st,
                                     const HolderPair& hp) {
    PosPow pw(hp.s - 1.0);
    std::vector<double> eta(inst.n(), 0.0);
    for (std::size_t i = 0; i < inst.n(); ++i) {
        auto x = inst.mu.point(i);
        double ai = st.alpha[i];
        double acc = 0.0;
        for (std::size_t j = 0; j < inst.m(); ++j) {
            double gap = ai - st.beta[j];
            if (gap <= 0.0) continue;
            double d2 = dist2(x, inst.nu.point(j));
            if (d2 == 0.0) continue;  // zero-distance pairs are constraint-handled
            acc += inst.nu.masses[j] * pw(gap) / std::pow(d2, hp.s / 2.0);
        }
        eta[i] = hp.s_cs() * acc;
    }
    return eta;
}

std::vector<double> grad_beta_exact(const ProblemInstance& inst, const DualState& st,
                                    const HolderPair& hp) {
    PosPow pw(hp.s - 1.0);
    std::vector<double> xi(inst.m(), 0.0);
    for (std::size_t j = 0; j < inst.m(); ++j) {
        auto y = inst.nu.point(j);
        double bj = st.beta[j];
        double acc = 0.0;
        for (std::size_t i = 0; i < inst.n(); ++i) {
            double gap = st.alpha[i] - bj;
            if (gap <= 0.0) continue;
            double d2 = dist2(inst.mu.point(i), y);
            if (d2 == 0.0) continue;
            acc += inst.mu.masses[i] * pw(gap) / std::pow(d2, hp.s / 2.0);
        }
        xi[j] = hp.s_cs() * acc;
    }
    return xi;
}

double penalty_exact(const ProblemInstance& inst, const DualState& st, const HolderPair& hp) {
    PosPow pw(hp.s);
    double pen = 0.0;
    for (std::size_t i = 0; i < inst.n(); ++i) {
        auto x = inst.mu.point(i);
        double mi = inst.mu.masses[i];
        double ai = st.alpha[i];
        for (std::size_t j = 0; j < inst.m(); ++j) {
            double gap = ai - st.beta[j];
            if (gap <= 0.0) continue;
            double d = dist(x, inst.nu.point(j));
            if (d == 0.0) continue;
            pen += mi * inst.nu.masses[j] * pw(gap / d);
        }
    }
    return hp.c_s * pen;
}

double coupling_entry(const ProblemInstance& inst, const DualState& st, const HolderPair& hp,
                      std::size_t i, std::size_t j) {
    double gap = st.alpha[i] - st.beta[j];
    if (gap <= 0.0) return 0.0;
    double d2 = dist2(inst.mu.point(i), inst.nu.point(j));
    if (d2 == 0.0) return 0.0;
    PosPow pw(hp.s - 1.0);
    return hp.s_cs() * inst.mu.masses[i] * inst.nu.masses[j] * pw(gap) /
           std::pow(d2, hp.s / 2.0);
}

Coupling coupling_from_dual(const ProblemInstance& inst, const DualState& st,
                            const HolderPair& hp) {
    if (inst.n() * inst.m() > 1000000) {
        throw DenseTooLarge("dense coupling limited to n*m <= 10^6");
    }
    Coupling g(inst.n(), inst.m());
    for (std::size_t i = 0; i < g.n; ++i) {
        for (std::size_t j = 0; j < g.m; ++j) g.at(i, j) = coupling_entry(inst, st, hp, i, j);
    }
    return g;
}

std::pair<double, double> sandwich_bounds(double emd, const std::vector<double>& mu_masses,
                                          const std::vector<double>& nu_masses, double rho) {
    double mu_min = *std::min_element(mu_masses.begin(), mu_masses.end());
    double nu_min = *std::min_element(nu_masses.begin(), nu_masses.end());
    double factor = std::pow(1.0 / (mu_min * nu_min), (rho - 1.0) / rho);
    return {emd, factor * emd};
}

}  // namespace rrho
