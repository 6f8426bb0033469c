#pragma once

#include <cstdint>
#include <functional>

#include "rrho/estimators.hpp"

namespace rrho {

enum class Termination { converged, max_iters };

const char* to_string(Termination t);

struct SolverReport {
    double estimate = 0.0;    // max(dual_value, 0)^(1/rho), units of r
    double dual_value = 0.0;  // raw terminal dual value, units r^rho
    long iterations = 0;
    Termination termination = Termination::converged;
    long alpha_updates = 0, beta_updates = 0;
    SolverParams params;  // echo
    double rho = 0.0;
    double r = 0.0;
    double wall_time_ms = 0.0;
    std::uint64_t seed = 0;
    Engine engine = Engine::exact;
};

enum class StepKind { alpha_update, beta_update, terminal };

struct ProgressInfo {
    long iteration = 0;
    StepKind step = StepKind::terminal;
    double sum_alpha_gap = 0.0;  // sum_i mu_i |1 - eta_hat_i|
    double sum_beta_gap = 0.0;   // sum_j nu_j |xi_hat_j - 1|; NaN if not evaluated
    const std::vector<double>* alpha = nullptr;
    const std::vector<double>* beta = nullptr;
};

using ProgressFn = std::function<void(const ProgressInfo&)>;

// Main loop: sign-based lambda-step dual ascent with estimated gradient
// sums, strict alpha-before-beta update priority, and a terminal penalty
// estimate. alpha/beta entries are maintained as integer multiples of
// lambda. Identical (instance, params, seed) produce identical reports for
// any thread count.
SolverReport solve(const ProblemInstance& inst, const HolderPair& hp, const SolverParams& params,
                   Engine engine, std::uint64_t seed, const ProgressFn& progress = nullptr);

// Convenience pipeline: derive params, preprocess, refine (practical mode),
// solve. overrides win over derived values.
struct RunResult {
    ProblemInstance inst;
    HolderPair hp;
    SolverParams params;
    SolverReport report;
};

RunResult run_solver(const WeightedPointSet& mu, const WeightedPointSet& nu, double rho,
                     double eps, ParamMode mode, Engine engine, std::uint64_t seed,
                     const Overrides& overrides = {}, const ProgressFn& progress = nullptr);

}  // namespace rrho
