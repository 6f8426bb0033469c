#pragma once

#include <cstdint>
#include <vector>

#include "rrho/augkde.hpp"
#include "rrho/dual.hpp"

namespace rrho {

enum class Engine { exact, sampling };

const char* to_string(Engine engine);

// Gradient-sum and penalty estimators of the main loop. Each eta_hat_i /
// xi_hat_j satisfies true - tau <= hat <= (1+eps1) * true with probability
// >= 1 - delta_call per call; omega satisfies the same bracket with the
// tau supplied per call.
//
// exact engine: direct summation with the floored kernel (eps0 = eps1/2);
//   O(nm) per call, kernel values cached across calls.
// sampling engine: one augmented-KDE structure per call (weights change
//   every iteration), s2 = s-1 for gradients and s2 = s for the penalty.
//   Est-Alpha flips signs, building over {y_j} with stored weights -beta_j
//   and querying at (x_i, -alpha_i).
class Estimator {
public:
    Estimator(const ProblemInstance& inst, const HolderPair& hp, double eps1, double tau,
              double delta_call, Engine engine, std::uint64_t seed);

    std::vector<double> est_alpha(const std::vector<double>& alpha,
                                  const std::vector<double>& beta, long iteration) const;
    std::vector<double> est_beta(const std::vector<double>& alpha,
                                 const std::vector<double>& beta, long iteration) const;
    double est_penalty(const std::vector<double>& alpha, const std::vector<double>& beta,
                       long iteration, double tau_pen) const;

private:
    const ProblemInstance* inst_;
    HolderPair hp_;
    double eps1_, tau_, delta_call_;
    Engine engine_;
    std::uint64_t seed_;
    SmoothKernel kernel_;
    double sigma_r_, phi_;
    std::vector<double> kmat_;  // exact engine: K(x_i, y_j), row-major

    AugKdeConfig tree_config(double s2, std::uint64_t build_seed) const;
};

// Free-function forms matching the operation signatures.
std::vector<double> est_alpha(const ProblemInstance& inst, const DualState& st,
                              const HolderPair& hp, double eps1, double tau, Engine engine,
                              std::uint64_t seed = 0);
std::vector<double> est_beta(const ProblemInstance& inst, const DualState& st,
                             const HolderPair& hp, double eps1, double tau, Engine engine,
                             std::uint64_t seed = 0);
double est_penalty(const ProblemInstance& inst, const DualState& st, const HolderPair& hp,
                   double eps1, double tau, Engine engine, std::uint64_t seed = 0);

}  // namespace rrho
