#include "rrho/solver.hpp"

#include <chrono>
#include <cmath>
#include <limits>

namespace rrho {

const char* to_string(Termination t) {
    return t == Termination::converged ? "converged" : "max_iters";
}

SolverReport solve(const ProblemInstance& inst, const HolderPair& hp, const SolverParams& params,
                   Engine engine, std::uint64_t seed, const ProgressFn& progress) {
    auto t0 = std::chrono::steady_clock::now();
    const std::size_t n = inst.n(), m = inst.m();
    const double r_rho = std::pow(inst.r, hp.rho);
    const double lambda = params.lambda * r_rho;

    // paper mode spreads the failure budget over every estimate call; in
    // practical mode the budget is applied per call
    double delta_call = params.delta;
    if (params.mode == ParamMode::paper) {
        delta_call = params.delta /
                     (static_cast<double>(params.max_iters) * static_cast<double>(n + m + 1));
    }
    Estimator est(inst, hp, params.eps1, params.tau, delta_call, engine, seed);

    // alpha/beta are integer multiples of lambda; keeping the counts makes
    // that exact and drift-free
    std::vector<long> cnt_a(n, 0), cnt_b(m, 0);
    std::vector<double> alpha(n, 0.0), beta(m, 0.0);

    SolverReport rep;
    rep.params = params;
    rep.rho = hp.rho;
    rep.r = inst.r;
    rep.seed = seed;
    rep.engine = engine;

    auto finish = [&](long t, Termination cause) {
        double omega = est.est_penalty(alpha, beta, t, params.eps * r_rho);
        double dual = 0.0;
        for (std::size_t i = 0; i < n; ++i) dual += inst.mu.masses[i] * alpha[i];
        for (std::size_t j = 0; j < m; ++j) dual -= inst.nu.masses[j] * beta[j];
        dual -= omega;
        rep.dual_value = dual;
        rep.estimate = std::pow(std::max(dual, 0.0), 1.0 / hp.rho);
        rep.iterations = t;
        rep.termination = cause;
        rep.wall_time_ms = std::chrono::duration<double, std::milli>(
                               std::chrono::steady_clock::now() - t0)
                               .count();
        return rep;
    };

    for (long t = 1; t <= params.max_iters; ++t) {
        std::vector<double> eta = est.est_alpha(alpha, beta, t);
        double sum_a = 0.0;
        for (std::size_t i = 0; i < n; ++i) sum_a += inst.mu.masses[i] * std::abs(1.0 - eta[i]);

        if (sum_a >= params.eps2) {
            for (std::size_t i = 0; i < n; ++i) {
                double d = 1.0 - eta[i];
                if (d > 0.0) {
                    ++cnt_a[i];
                } else if (d < 0.0) {
                    --cnt_a[i];
                }
                alpha[i] = lambda * static_cast<double>(cnt_a[i]);
            }
            ++rep.alpha_updates;
            if (progress) {
                ProgressInfo info{t, StepKind::alpha_update, sum_a,
                                  std::numeric_limits<double>::quiet_NaN(), &alpha, &beta};
                progress(info);
            }
            continue;
        }

        std::vector<double> xi = est.est_beta(alpha, beta, t);
        double sum_b = 0.0;
        for (std::size_t j = 0; j < m; ++j) sum_b += inst.nu.masses[j] * std::abs(xi[j] - 1.0);

        if (sum_b >= params.eps2) {
            // ascent direction: dg/dbeta_j = nu_j (xi_j - 1)
            for (std::size_t j = 0; j < m; ++j) {
                double d = xi[j] - 1.0;
                if (d > 0.0) {
                    ++cnt_b[j];
                } else if (d < 0.0) {
                    --cnt_b[j];
                }
                beta[j] = lambda * static_cast<double>(cnt_b[j]);
            }
            ++rep.beta_updates;
            if (progress) {
                ProgressInfo info{t, StepKind::beta_update, sum_a, sum_b, &alpha, &beta};
                progress(info);
            }
            continue;
        }

        if (progress) {
            ProgressInfo info{t, StepKind::terminal, sum_a, sum_b, &alpha, &beta};
            progress(info);
        }
        return finish(t, Termination::converged);
    }
    return finish(params.max_iters, Termination::max_iters);
}

RunResult run_solver(const WeightedPointSet& mu, const WeightedPointSet& nu, double rho,
                     double eps, ParamMode mode, Engine engine, std::uint64_t seed,
                     const Overrides& overrides, const ProgressFn& progress) {
    RunResult out;
    out.hp = holder_pair(rho);
    SolverParams base = derive_params(rho, eps, static_cast<int>(mu.size()),
                                      static_cast<int>(nu.size()), mode, overrides);
    out.inst = preprocess(mu, nu, base, seed);
    out.params = base;
    if (mode == ParamMode::practical) {
        out.params = refine_practical(base, out.hp, out.inst.sigma_actual,
                                      out.inst.min_mass_product(), overrides);
    }
    out.report = solve(out.inst, out.hp, out.params, engine, seed, progress);
    return out;
}

}  // namespace rrho
