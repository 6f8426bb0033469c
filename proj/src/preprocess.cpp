#include "rrho/preprocess.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "rrho/rng.hpp"

namespace rrho {

namespace {

struct CrossRange {
    double dmin = std::numeric_limits<double>::infinity();
    double dmax = 0.0;
};

CrossRange cross_range(const WeightedPointSet& mu, const WeightedPointSet& nu) {
    CrossRange cr;
    for (std::size_t i = 0; i < mu.size(); ++i) {
        auto x = mu.point(i);
        for (std::size_t j = 0; j < nu.size(); ++j) {
            double d = dist(x, nu.point(j));
            cr.dmin = std::min(cr.dmin, d);
            cr.dmax = std::max(cr.dmax, d);
        }
    }
    return cr;
}

}  // namespace

std::pair<WeightedPointSet, WeightedPointSet> lift(const WeightedPointSet& mu,
                                                   const WeightedPointSet& nu,
                                                   double sigma, double r) {
    auto append = [](const WeightedPointSet& w, double extra) {
        WeightedPointSet out;
        out.dim = w.dim + 1;
        out.masses = w.masses;
        out.coords.reserve(w.size() * static_cast<std::size_t>(out.dim));
        for (std::size_t i = 0; i < w.size(); ++i) {
            auto p = w.point(i);
            out.coords.insert(out.coords.end(), p.begin(), p.end());
            out.coords.push_back(extra);
        }
        return out;
    };
    return {append(mu, sigma * r), append(nu, 0.0)};
}

std::pair<WeightedPointSet, double> prune_low_mass(const WeightedPointSet& w, double floor) {
    if (!(floor >= 0.0) || !(floor < 1.0)) throw Error("prune floor must lie in [0, 1)");
    double cutoff = floor / static_cast<double>(w.size());
    WeightedPointSet out;
    out.dim = w.dim;
    double zeta = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) {
        if (w.masses[i] < cutoff) {
            zeta += w.masses[i];
            continue;
        }
        out.masses.push_back(w.masses[i]);
        auto p = w.point(i);
        out.coords.insert(out.coords.end(), p.begin(), p.end());
    }
    if (out.masses.empty()) throw AllMassPruned("every point fell below the mass floor");
    for (double& m : out.masses) m /= (1.0 - zeta);
    out.normalize();
    return {std::move(out), zeta};
}

int jl_target_dim(std::size_t n_plus_m, double eps) {
    double t = 8.0 * std::log(static_cast<double>(std::max<std::size_t>(n_plus_m, 2))) / (eps * eps);
    return std::max(1, static_cast<int>(std::ceil(t)));
}

void jl_project(WeightedPointSet& mu, WeightedPointSet& nu, int target_dim, std::uint64_t seed) {
    if (target_dim < 1) throw Error("JL target dimension must be >= 1");
    int d = mu.dim;
    if (d <= target_dim) return;

    // shared projection matrix, row-major target_dim x d
    std::vector<double> proj(static_cast<std::size_t>(target_dim) * static_cast<std::size_t>(d));
    rng::Stream gen({seed, 0x6a6cu});
    double scale = 1.0 / std::sqrt(static_cast<double>(target_dim));
    for (double& v : proj) v = gen.next_normal() * scale;

    auto apply = [&](WeightedPointSet& w) {
        std::vector<double> out(w.size() * static_cast<std::size_t>(target_dim));
        for (std::size_t i = 0; i < w.size(); ++i) {
            auto p = w.point(i);
            for (int t = 0; t < target_dim; ++t) {
                const double* row = proj.data() + static_cast<std::size_t>(t) * static_cast<std::size_t>(d);
                double acc = 0.0;
                for (int k = 0; k < d; ++k) acc += row[k] * p[static_cast<std::size_t>(k)];
                out[i * static_cast<std::size_t>(target_dim) + static_cast<std::size_t>(t)] = acc;
            }
        }
        w.coords = std::move(out);
        w.dim = target_dim;
    };
    apply(mu);
    apply(nu);
}

ProblemInstance preprocess(const WeightedPointSet& mu, const WeightedPointSet& nu,
                           const SolverParams& params, std::uint64_t seed) {
    if (mu.size() == 0 || nu.size() == 0) throw EmptyInput("empty support");

    ProblemInstance inst;
    WeightedPointSet a = mu, b = nu;

    int target = jl_target_dim(a.size() + b.size(), params.eps);
    if (a.dim > target) {
        jl_project(a, b, target, seed);
        inst.dim_reduced = true;
    }

    auto [pa, zeta_mu] = prune_low_mass(a, params.sigma_mu);
    auto [pb, zeta_nu] = prune_low_mass(b, params.sigma_nu);
    inst.pruned_mass_mu = zeta_mu;
    inst.pruned_mass_nu = zeta_nu;

    CrossRange raw = cross_range(pa, pb);
    inst.r_raw = raw.dmax;
    if (!(inst.r_raw > 0.0)) {
        // all points coincide; pick one length unit so the lift is well-defined
        inst.r_raw = 1.0;
        inst.degenerate_radius = true;
    }

    auto [la, lb] = lift(pa, pb, params.sigma, inst.r_raw);
    inst.mu = std::move(la);
    inst.nu = std::move(lb);
    inst.lifted = true;

    CrossRange lifted_range = cross_range(inst.mu, inst.nu);
    inst.r = lifted_range.dmax;
    inst.sigma_actual = lifted_range.dmin / lifted_range.dmax;
    return inst;
}

ProblemInstance make_raw_instance(const WeightedPointSet& mu, const WeightedPointSet& nu) {
    if (mu.size() == 0 || nu.size() == 0) throw EmptyInput("empty support");
    ProblemInstance inst;
    inst.mu = mu;
    inst.nu = nu;
    CrossRange cr = cross_range(inst.mu, inst.nu);
    inst.r_raw = cr.dmax;
    inst.r = cr.dmax;
    if (!(inst.r > 0.0)) {
        inst.r = 1.0;
        inst.r_raw = 1.0;
        inst.degenerate_radius = true;
        inst.sigma_actual = 0.0;
    } else {
        inst.sigma_actual = cr.dmin / cr.dmax;
    }
    return inst;
}

}  // namespace rrho
