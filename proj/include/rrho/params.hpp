#pragma once

#include <cstdint>
#include <map>
#include <string>

#include "rrho/errors.hpp"

namespace rrho {

// rho in (1, 2] with its Hölder conjugate s = rho/(rho-1) >= 2 and the dual
// penalty constant C_s = (1/s)(1 - 1/s)^(s-1).
struct HolderPair {
    double rho = 2.0;
    double s = 2.0;
    double c_s = 0.25;

    double s_cs() const { return s * c_s; }  // = (1 - 1/s)^(s-1), the gradient prefactor
};

HolderPair holder_pair(double rho);

enum class ParamMode { paper, practical };

const char* to_string(ParamMode mode);

// Parameter bundle of the main solver. lambda is stored as a fraction of
// r^rho; eps1/eps2/tau are unitless (they bound the dimensionless gradient
// sums eta, xi).
struct SolverParams {
    double eps = 0.1;        // target additive accuracy, units of r
    double sigma = 0.0;      // separation, fraction of r
    double sigma_mu = 0.0;   // mass floor parameter for mu
    double sigma_nu = 0.0;   // mass floor parameter for nu
    double eps1 = 0.0;       // multiplicative estimation error
    double eps2 = 0.0;       // termination threshold
    double tau = 0.0;        // additive estimation error (gradient units)
    double lambda = 0.0;     // step size as a fraction of r^rho
    double delta = 0.1;      // total failure budget
    long max_iters = 0;
    ParamMode mode = ParamMode::practical;

    // unspecified constants, exposed for configuration
    double c0 = 0.1, c1 = 0.1, c2 = 0.1, c3 = 0.1, c4 = 2.0;
};

// Named per-field overrides; keys are field names plus "c0".."c4".
using Overrides = std::map<std::string, double>;

// Derives the parameter schedule from (rho, eps, n, m). In paper mode the
// fields follow the worst-case formulas exactly:
//   sigma = eps^rho, sigma_mu = eps^rho/n, sigma_nu = eps^rho,
//   eps2 = c0*eps*(sigma_mu*sigma_nu/(m n))^((rho-1)/rho),
//   eps1 = c1*eps2/s, tau = c2*eps2, lambda = c3*eps2*(sigma/s)^2,
//   max_iters = ceil(c4/(lambda*eps2)).
// Practical mode keeps the same structure; eps2 anchors to the actual
// smallest mass product when the "min_mass_product" override is supplied
// (see refine_practical), and any field may be overridden.
SolverParams derive_params(double rho, double eps, int n, int m, ParamMode mode,
                           const Overrides& overrides = {});

// Re-anchors a practical-mode bundle to measured instance quantities:
// sigma := actual separation, eps2 := c0*eps*(min_ij mu_i nu_j)^((rho-1)/rho),
// then recomputes eps1, tau, lambda, max_iters and re-applies overrides.
SolverParams refine_practical(const SolverParams& base, const HolderPair& hp,
                              double sigma_actual, double min_mass_product,
                              const Overrides& overrides = {});

}  // namespace rrho
