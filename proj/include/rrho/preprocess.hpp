#pragma once

#include <cstdint>
#include <utility>

#include "rrho/params.hpp"
#include "rrho/point_set.hpp"

namespace rrho {

// A preprocessed problem: perturbed distributions with disjoint supports,
// the distance scale r (max cross distance of the stored sets), and the
// achieved separation sigma_actual = min cross distance / r.
struct ProblemInstance {
    WeightedPointSet mu, nu;
    double r = 0.0;             // max_{ij} ||x_i - y_j||
    double sigma_actual = 0.0;  // min_{ij} ||x_i - y_j|| / r
    bool lifted = false;
    bool dim_reduced = false;
    double pruned_mass_mu = 0.0;  // zeta_mu
    double pruned_mass_nu = 0.0;  // zeta_nu
    double r_raw = 0.0;           // max cross distance before the lift
    bool degenerate_radius = false;  // all raw points coincided; r_raw forced to 1

    std::size_t n() const { return mu.size(); }
    std::size_t m() const { return nu.size(); }

    double cross_distance(std::size_t i, std::size_t j) const {
        return dist(mu.point(i), nu.point(j));
    }

    double min_mass_product() const { return mu.min_mass() * nu.min_mass(); }
};

// Appends coordinate sigma*r to every x and 0 to every y, forcing every
// cross distance into [sigma*r, r*sqrt(1+sigma^2)].
std::pair<WeightedPointSet, WeightedPointSet> lift(const WeightedPointSet& mu,
                                                   const WeightedPointSet& nu,
                                                   double sigma, double r);

// Removes points with mass < floor/k (k = support size) and renormalizes the
// survivors. Returns the pruned set and the total removed mass zeta <= floor.
std::pair<WeightedPointSet, double> prune_low_mass(const WeightedPointSet& w, double floor);

// One shared dense Gaussian projection scaled by 1/sqrt(target_dim), applied
// to both point lists; identity when d <= target_dim.
void jl_project(WeightedPointSet& mu, WeightedPointSet& nu, int target_dim, std::uint64_t seed);

// Default JL target dimension, ceil(8 ln(n+m) / eps^2).
int jl_target_dim(std::size_t n_plus_m, double eps);

// Full pipeline: optional JL, low-mass pruning with (sigma_mu, sigma_nu),
// lift with sigma, and recomputation of r and sigma_actual.
ProblemInstance preprocess(const WeightedPointSet& mu, const WeightedPointSet& nu,
                           const SolverParams& params, std::uint64_t seed = 0);

// Oracle-scale instance without perturbation: supports may overlap and
// sigma_actual may be zero. Used by the ground-truth solvers and tests.
ProblemInstance make_raw_instance(const WeightedPointSet& mu, const WeightedPointSet& nu);

}  // namespace rrho
