#include "rrho/params.hpp"

#include <cmath>

namespace rrho {

HolderPair holder_pair(double rho) {
    if (!(rho > 1.0) || !(rho <= 2.0)) {
        throw RhoOutOfRange("rho must lie in (1, 2]");
    }
    HolderPair hp;
    hp.rho = rho;
    hp.s = rho / (rho - 1.0);
    hp.c_s = (1.0 / hp.s) * std::pow(1.0 - 1.0 / hp.s, hp.s - 1.0);
    return hp;
}

const char* to_string(ParamMode mode) {
    return mode == ParamMode::paper ? "paper" : "practical";
}

namespace {

double take(const Overrides& o, const std::string& key, double fallback) {
    auto it = o.find(key);
    if (it == o.end()) return fallback;
    if (!(it->second > 0.0)) {
        throw OverrideNonPositive("override '" + key + "' must be positive");
    }
    return it->second;
}

// Fills eps2..max_iters from the schedule formulas, honoring overrides.
// mass_product_base is sigma_mu*sigma_nu/(mn) in paper mode and the measured
// inf_ij mu_i nu_j in practical mode.
void finish(SolverParams& p, const HolderPair& hp, double mass_product_base,
            const Overrides& o) {
    double exponent = (hp.rho - 1.0) / hp.rho;
    p.eps2 = take(o, "eps2", p.c0 * p.eps * std::pow(mass_product_base, exponent));
    p.eps1 = take(o, "eps1", p.c1 * p.eps2 / hp.s);
    p.tau = take(o, "tau", p.c2 * p.eps2);
    p.lambda = take(o, "lambda", p.c3 * p.eps2 * (p.sigma / hp.s) * (p.sigma / hp.s));
    p.delta = take(o, "delta", p.delta);
    if (!(p.delta < 1.0)) throw OverrideNonPositive("delta must lie in (0, 1)");

    p.max_iters = static_cast<long>(std::ceil(p.c4 / (p.lambda * p.eps2)));
    if (auto it = o.find("max_iters"); it != o.end()) {
        if (!(it->second >= 1.0)) throw OverrideNonPositive("max_iters override must be >= 1");
        p.max_iters = static_cast<long>(it->second);
    }
}

}  // namespace

SolverParams derive_params(double rho, double eps, int n, int m, ParamMode mode,
                           const Overrides& overrides) {
    if (!(eps > 0.0) || !(eps <= 0.25)) {
        throw EpsOutOfRange("eps must lie in (0, 1/4]");
    }
    if (n < 1 || m < 1) throw Error("support sizes must be at least 1");
    HolderPair hp = holder_pair(rho);

    SolverParams p;
    p.eps = eps;
    p.mode = mode;
    p.c0 = take(overrides, "c0", p.c0);
    p.c1 = take(overrides, "c1", p.c1);
    p.c2 = take(overrides, "c2", p.c2);
    p.c3 = take(overrides, "c3", p.c3);
    p.c4 = take(overrides, "c4", p.c4);

    double eps_rho = std::pow(eps, rho);
    p.sigma = take(overrides, "sigma", eps_rho);
    p.sigma_mu = take(overrides, "sigma_mu", eps_rho / n);
    p.sigma_nu = take(overrides, "sigma_nu", eps_rho);

    double base;
    if (mode == ParamMode::practical && overrides.count("min_mass_product")) {
        base = take(overrides, "min_mass_product", 0.0);
    } else {
        base = p.sigma_mu * p.sigma_nu / (static_cast<double>(m) * static_cast<double>(n));
    }
    finish(p, hp, base, overrides);
    return p;
}

SolverParams refine_practical(const SolverParams& base, const HolderPair& hp,
                              double sigma_actual, double min_mass_product,
                              const Overrides& overrides) {
    SolverParams p = base;
    if (!(sigma_actual > 0.0) || !(min_mass_product > 0.0)) {
        throw Error("practical refinement needs positive separation and mass product");
    }
    p.sigma = take(overrides, "sigma", sigma_actual);
    finish(p, hp, min_mass_product, overrides);
    return p;
}

}  // namespace rrho
