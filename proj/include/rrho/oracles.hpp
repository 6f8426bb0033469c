#pragma once

#include "rrho/dual.hpp"
#include "rrho/preprocess.hpp"

namespace rrho {

struct OracleResult {
    double value = 0.0;
    Coupling coupling;      // feasibility re-verified on return
    double solver_tol = 0.0;
};

// High-precision R_rho via full-gradient ascent on the dual with Armijo
// backtracking; terminates when the concavity gap bound drops below
// tol * r^rho. Zero-distance cross pairs (overlapping supports) are handled
// as hard constraints alpha_i <= beta_j via pairwise projection.
OracleResult exact_rrho(const ProblemInstance& inst, const HolderPair& hp,
                        double tol = 1e-8, long max_iters = 500000);

// Independent 1-D oracle for 2x2 instances: the couplings form a
// one-parameter family; minimizes the primal objective by ternary search.
double ternary_2x2(const ProblemInstance& inst, const HolderPair& hp);

// Exact EMD by successive shortest augmenting paths with potentials on the
// complete bipartite graph.
OracleResult exact_emd(const ProblemInstance& inst);

// Entropy-regularized transport value SNK_eta = E[d] - eta*H(gamma) at the
// scaled (and marginal-rounded) coupling. Runs in log domain when
// eta < 0.05 * r.
double sinkhorn(const ProblemInstance& inst, double eta, double tol = 1e-9,
                long max_iter = 200000);

}  // namespace rrho
