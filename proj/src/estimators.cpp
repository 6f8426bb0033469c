#include "rrho/estimators.hpp"

#include <cmath>

#include "rrho/parallel.hpp"
#include "rrho/rng.hpp"

namespace rrho {

const char* to_string(Engine engine) {
    return engine == Engine::exact ? "exact" : "sampling";
}

Estimator::Estimator(const ProblemInstance& inst, const HolderPair& hp, double eps1, double tau,
                     double delta_call, Engine engine, std::uint64_t seed)
    : inst_(&inst),
      hp_(hp),
      eps1_(eps1),
      tau_(tau),
      delta_call_(delta_call),
      engine_(engine),
      seed_(seed) {
    sigma_r_ = inst.sigma_actual * inst.r;
    phi_ = inst.sigma_actual > 0.0 ? 1.0 / inst.sigma_actual : 1.0;
    kernel_ = SmoothKernel::make(hp.s, eps1 / 2.0, sigma_r_);
    if (engine_ == Engine::exact) {
        std::size_t n = inst.n(), m = inst.m();
        if (n * m > 4000000) throw DenseTooLarge("exact engine limited to n*m <= 4*10^6");
        kmat_.resize(n * m);
        for (std::size_t i = 0; i < n; ++i) {
            auto x = inst.mu.point(i);
            for (std::size_t j = 0; j < m; ++j) {
                kmat_[i * m + j] = kernel_.eval_dist2(dist2(x, inst.nu.point(j)));
            }
        }
    }
}

AugKdeConfig Estimator::tree_config(double s2, std::uint64_t build_seed) const {
    AugKdeConfig cfg;
    cfg.s2 = s2;
    cfg.kernel = kernel_;
    cfg.eps0 = eps1_ / 2.0;
    cfg.sigma_r = sigma_r_;
    cfg.phi = phi_;
    cfg.eps = eps1_;
    cfg.delta = delta_call_;
    cfg.backend = BackendKind::sampling;
    cfg.seed = build_seed;
    return cfg;
}

std::vector<double> Estimator::est_alpha(const std::vector<double>& alpha,
                                         const std::vector<double>& beta, long iteration) const {
    const ProblemInstance& inst = *inst_;
    std::size_t n = inst.n(), m = inst.m();
    std::vector<double> eta(n, 0.0);
    if (engine_ == Engine::exact) {
        PosPow pw(hp_.s - 1.0);
        parallel_for(n, [&](std::size_t i) {
            double acc = 0.0;
            const double* krow = kmat_.data() + i * m;
            double ai = alpha[i];
            for (std::size_t j = 0; j < m; ++j) {
                double gap = ai - beta[j];
                if (gap > 0.0) acc += inst.nu.masses[j] * pw(gap) * krow[j];
            }
            double v = hp_.s_cs() * acc;
            eta[i] = v < tau_ ? 0.0 : v;
        }, 8);
        return eta;
    }

    // sign flip: stored weights -beta over {y_j}, queried at (x_i, -alpha_i)
    std::vector<double> neg_beta(m);
    for (std::size_t j = 0; j < m; ++j) neg_beta[j] = -beta[j];
    std::uint64_t call_key = rng::combine(rng::combine(seed_, 0xa1fau),
                                          static_cast<std::uint64_t>(iteration));
    auto tree = AugmentedKdeTree::build(inst.nu.dim, inst.nu.coords, neg_beta, inst.nu.masses,
                                        tree_config(hp_.s - 1.0, call_key));
    parallel_for(n, [&](std::size_t i) {
        double v = hp_.s_cs() *
                   tree.query(inst.mu.point(i), -alpha[i], rng::combine(call_key, i));
        eta[i] = v < tau_ ? 0.0 : v;
    });
    return eta;
}

std::vector<double> Estimator::est_beta(const std::vector<double>& alpha,
                                        const std::vector<double>& beta, long iteration) const {
    const ProblemInstance& inst = *inst_;
    std::size_t n = inst.n(), m = inst.m();
    std::vector<double> xi(m, 0.0);
    if (engine_ == Engine::exact) {
        PosPow pw(hp_.s - 1.0);
        parallel_for(m, [&](std::size_t j) {
            double acc = 0.0;
            double bj = beta[j];
            for (std::size_t i = 0; i < n; ++i) {
                double gap = alpha[i] - bj;
                if (gap > 0.0) acc += inst.mu.masses[i] * pw(gap) * kmat_[i * m + j];
            }
            double v = hp_.s_cs() * acc;
            xi[j] = v < tau_ ? 0.0 : v;
        }, 8);
        return xi;
    }

    std::uint64_t call_key = rng::combine(rng::combine(seed_, 0xbe7au),
                                          static_cast<std::uint64_t>(iteration));
    auto tree = AugmentedKdeTree::build(inst.mu.dim, inst.mu.coords, alpha, inst.mu.masses,
                                        tree_config(hp_.s - 1.0, call_key));
    parallel_for(m, [&](std::size_t j) {
        double v = hp_.s_cs() * tree.query(inst.nu.point(j), beta[j], rng::combine(call_key, j));
        xi[j] = v < tau_ ? 0.0 : v;
    });
    return xi;
}

double Estimator::est_penalty(const std::vector<double>& alpha, const std::vector<double>& beta,
                              long iteration, double tau_pen) const {
    (void)tau_pen;  // the estimators below have no downward additive error
    const ProblemInstance& inst = *inst_;
    std::size_t n = inst.n(), m = inst.m();
    if (engine_ == Engine::exact) {
        PosPow pw(hp_.s);
        double acc = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            double ai = alpha[i];
            double mi = inst.mu.masses[i];
            const double* krow = kmat_.data() + i * m;
            for (std::size_t j = 0; j < m; ++j) {
                double gap = ai - beta[j];
                if (gap > 0.0) acc += mi * inst.nu.masses[j] * pw(gap) * krow[j];
            }
        }
        return hp_.c_s * acc;
    }

    std::uint64_t call_key = rng::combine(rng::combine(seed_, 0x3e7au),
                                          static_cast<std::uint64_t>(iteration));
    auto tree = AugmentedKdeTree::build(inst.mu.dim, inst.mu.coords, alpha, inst.mu.masses,
                                        tree_config(hp_.s, call_key));
    std::vector<double> per_j(m, 0.0);
    parallel_for(m, [&](std::size_t j) {
        per_j[j] = inst.nu.masses[j] *
                   tree.query(inst.nu.point(j), beta[j], rng::combine(call_key, j));
    });
    double acc = 0.0;
    for (double v : per_j) acc += v;
    return hp_.c_s * acc;
}

std::vector<double> est_alpha(const ProblemInstance& inst, const DualState& st,
                              const HolderPair& hp, double eps1, double tau, Engine engine,
                              std::uint64_t seed) {
    Estimator e(inst, hp, eps1, tau, 0.05, engine, seed);
    return e.est_alpha(st.alpha, st.beta, st.iteration);
}

std::vector<double> est_beta(const ProblemInstance& inst, const DualState& st,
                             const HolderPair& hp, double eps1, double tau, Engine engine,
                             std::uint64_t seed) {
    Estimator e(inst, hp, eps1, tau, 0.05, engine, seed);
    return e.est_beta(st.alpha, st.beta, st.iteration);
}

double est_penalty(const ProblemInstance& inst, const DualState& st, const HolderPair& hp,
                   double eps1, double tau, Engine engine, std::uint64_t seed) {
    Estimator e(inst, hp, eps1, tau, 0.05, engine, seed);
    return e.est_penalty(st.alpha, st.beta, st.iteration, tau);
}

}  // namespace rrho
