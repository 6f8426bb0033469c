#include "rrho/validate.hpp"

#include <algorithm>
#include <cmath>

#include "rrho/augkde.hpp"
#include "rrho/dual.hpp"
#include "rrho/errors.hpp"
#include "rrho/oracles.hpp"
#include "rrho/solver.hpp"

namespace rrho::validate {

WeightedPointSet random_point_set(rng::Stream& gen, std::size_t n, int d, double mass_lo,
                                  double mass_hi) {
    std::vector<double> coords(n * static_cast<std::size_t>(d));
    for (double& c : coords) c = gen.next_double();
    std::vector<double> masses = random_masses(gen, n, mass_lo, mass_hi);
    return WeightedPointSet::make(d, std::move(coords), std::move(masses));
}

std::vector<double> random_masses(rng::Stream& gen, std::size_t n, double lo, double hi) {
    std::vector<double> masses(n);
    double sum = 0.0;
    for (double& w : masses) {
        w = gen.next_uniform(lo, hi);
        sum += w;
    }
    for (double& w : masses) w /= sum;
    return masses;
}

namespace {

const double kRhoCycle[3] = {1.25, 1.5, 2.0};

SuiteResult sandwich_suite(std::uint64_t seed) {
    SuiteResult res;
    res.name = "sandwich";
    rng::Stream gen({seed, 0x5a5du});
    for (int trial = 0; trial < 200; ++trial) {
        double rho = kRhoCycle[trial % 3];
        std::size_t n = 2 + gen.next_index(5), m = 2 + gen.next_index(5);
        int d = 1 + static_cast<int>(gen.next_index(3));
        auto mu = random_point_set(gen, n, d);
        auto nu = random_point_set(gen, m, d);
        auto inst = make_raw_instance(mu, nu);
        auto hp = holder_pair(rho);

        double emd = exact_emd(inst).value;
        double rr = exact_rrho(inst, hp, 1e-9).value;
        auto [lower, upper] = sandwich_bounds(emd, inst.mu.masses, inst.nu.masses, rho);
        double slack = 1e-7 * inst.r;
        ++res.total;
        if (lower <= rr + slack && rr <= upper + slack) {
            ++res.passed;
        } else {
            res.detail = "trial " + std::to_string(trial);
        }
    }
    return res;
}

SuiteResult triangle_suite(std::uint64_t seed) {
    SuiteResult res;
    res.name = "triangle";
    rng::Stream gen({seed, 0x7217u});
    for (int trial = 0; trial < 100; ++trial) {
        double rho = kRhoCycle[trial % 3];
        std::size_t n = 2 + gen.next_index(5);
        int d = 1 + static_cast<int>(gen.next_index(3));
        std::vector<double> coords(n * static_cast<std::size_t>(d));
        for (double& c : coords) c = gen.next_double();
        auto wa = random_masses(gen, n);
        auto wb = random_masses(gen, n);
        auto wc = random_masses(gen, n);
        auto mk = [&](const std::vector<double>& w) {
            return WeightedPointSet::make(d, coords, w);
        };
        auto hp = holder_pair(rho);
        auto a = mk(wa), b = mk(wb), c = mk(wc);
        double rab = exact_rrho(make_raw_instance(a, b), hp, 1e-9).value;
        double rbc = exact_rrho(make_raw_instance(b, c), hp, 1e-9).value;
        auto inst_ac = make_raw_instance(a, c);
        double rac = exact_rrho(inst_ac, hp, 1e-9).value;
        ++res.total;
        if (rac <= rab + rbc + 1e-7 * inst_ac.r) {
            ++res.passed;
        } else {
            res.detail = "trial " + std::to_string(trial);
        }
    }
    return res;
}

SuiteResult gradcheck_suite(std::uint64_t seed) {
    SuiteResult res;
    res.name = "gradcheck";
    rng::Stream gen({seed, 0x9badu});
    double worst = 0.0;
    for (int instance = 0; instance < 20; ++instance) {
        double rho = kRhoCycle[instance % 3];
        std::size_t n = 2 + gen.next_index(5), m = 2 + gen.next_index(5);
        int d = 1 + static_cast<int>(gen.next_index(3));
        auto mu = random_point_set(gen, n, d);
        auto nu = random_point_set(gen, m, d);
        auto inst = make_raw_instance(mu, nu);
        auto hp = holder_pair(rho);
        double r_rho = std::pow(inst.r, hp.rho);
        double h = 1e-6 * r_rho;

        for (int pt = 0; pt < 5; ++pt) {
            // draw a point with every |alpha_i - beta_j| >= 1e-3 r^rho so the
            // finite difference stays away from the (x^+)^(s-1) kink
            DualState st = DualState::zeros(n, m);
            bool smooth = false;
            for (int attempt = 0; attempt < 1000 && !smooth; ++attempt) {
                for (double& a : st.alpha) a = gen.next_uniform(-r_rho, r_rho);
                for (double& b : st.beta) b = gen.next_uniform(-r_rho, r_rho);
                smooth = true;
                for (std::size_t i = 0; i < n && smooth; ++i) {
                    for (std::size_t j = 0; j < m; ++j) {
                        if (std::abs(st.alpha[i] - st.beta[j]) < 1e-3 * r_rho) {
                            smooth = false;
                            break;
                        }
                    }
                }
            }
            auto eta = grad_alpha_exact(inst, st, hp);
            auto xi = grad_beta_exact(inst, st, hp);
            auto rel_err = [](double analytic, double fd) {
                double den = std::max({std::abs(analytic), std::abs(fd), 1e-4});
                return std::abs(analytic - fd) / den;
            };
            ++res.total;
            double point_worst = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                DualState up = st, dn = st;
                up.alpha[i] += h;
                dn.alpha[i] -= h;
                double fd = (dual_objective(inst, up, hp) - dual_objective(inst, dn, hp)) / (2 * h);
                double analytic = inst.mu.masses[i] * (1.0 - eta[i]);
                point_worst = std::max(point_worst, rel_err(analytic, fd));
            }
            for (std::size_t j = 0; j < m; ++j) {
                DualState up = st, dn = st;
                up.beta[j] += h;
                dn.beta[j] -= h;
                double fd = (dual_objective(inst, up, hp) - dual_objective(inst, dn, hp)) / (2 * h);
                double analytic = -inst.nu.masses[j] * (1.0 - xi[j]);
                point_worst = std::max(point_worst, rel_err(analytic, fd));
            }
            worst = std::max(worst, point_worst);
            if (point_worst <= 1e-5) ++res.passed;
        }
    }
    res.stat = worst;
    res.detail = "max relative gradient error";
    return res;
}

// Annulus instance for the KDE statistics suites: query at the origin,
// points at distances within [0.5, 1], so phi = 2 keeps sampling honest.
struct KdeFixture {
    int dim = 3;
    std::vector<double> coords;
    std::vector<double> weights;  // alpha_i
    std::vector<double> mult;
    std::vector<double> query_y;
    double beta = 0.0;
    SmoothKernel kernel;

    KdeFixture(rng::Stream& gen, std::size_t n, double s, double s2_unused) {
        (void)s2_unused;
        query_y.assign(static_cast<std::size_t>(dim), 0.0);
        kernel = SmoothKernel::make(s, 0.1, 0.5);
        coords.resize(n * static_cast<std::size_t>(dim));
        weights.resize(n);
        mult.resize(n);
        for (std::size_t i = 0; i < n; ++i) {
            // random direction, radius in [0.5, 1]
            double v[3];
            double norm = 0.0;
            for (double& x : v) {
                x = gen.next_normal();
                norm += x * x;
            }
            norm = std::sqrt(norm);
            double rad = gen.next_uniform(0.5, 1.0);
            for (int k = 0; k < dim; ++k) {
                coords[i * static_cast<std::size_t>(dim) + static_cast<std::size_t>(k)] =
                    v[k] / norm * rad;
            }
            weights[i] = gen.next_uniform(-1.0, 1.0);
            mult[i] = gen.next_uniform(0.25, 1.0);
        }
        beta = -0.1;
    }

    double exact_sum(double s2) const {
        PosPow pw(s2);
        double acc = 0.0;
        for (std::size_t i = 0; i < weights.size(); ++i) {
            std::span<const double> x{coords.data() + i * static_cast<std::size_t>(dim),
                                      static_cast<std::size_t>(dim)};
            acc += mult[i] * pw(weights[i] - beta) *
                   kernel_eval(kernel, x, std::span<const double>{query_y});
        }
        return acc;
    }
};

SuiteResult kde_unbiased_suite(std::uint64_t seed) {
    SuiteResult res;
    res.name = "kde-unbiased";
    rng::Stream gen({seed, 0xdbe5u});
    for (double s2 : {1.0, 2.0}) {
        KdeFixture fx(gen, 200, 3.0, s2);
        AugKdeConfig cfg;
        cfg.s2 = s2;
        cfg.kernel = fx.kernel;
        cfg.eps0 = 0.1;
        cfg.sigma_r = 0.5;
        cfg.phi = 2.0;
        cfg.eps = 0.25;
        cfg.delta = 0.9;  // single estimate, no median bias
        cfg.backend = BackendKind::exact;
        cfg.seed = seed;
        auto tree = AugmentedKdeTree::build(fx.dim, fx.coords, fx.weights, fx.mult, cfg);

        double truth = fx.exact_sum(s2);
        const long reps = 20000;
        double sum = 0.0, sum2 = 0.0;
        for (long t = 0; t < reps; ++t) {
            double v = tree.query(fx.query_y, fx.beta, rng::combine(seed, static_cast<std::uint64_t>(t)));
            sum += v;
            sum2 += v * v;
        }
        double mean = sum / reps;
        double var = std::max(0.0, sum2 / reps - mean * mean);
        double se = std::sqrt(var / reps);
        ++res.total;
        if (std::abs(mean - truth) <= 3.0 * se + 1e-12 * std::abs(truth)) ++res.passed;
        res.stat = std::max(res.stat, se > 0.0 ? std::abs(mean - truth) / se : 0.0);
    }
    res.detail = "worst |mean-truth|/se";
    return res;
}

SuiteResult kde_variance_suite(std::uint64_t seed) {
    SuiteResult res;
    res.name = "kde-variance";
    rng::Stream gen({seed, 0xf00du});
    const double eps = 0.25;
    for (double s2 : {1.0, 2.0}) {
        KdeFixture fx(gen, 200, 3.0, s2);
        AugKdeConfig cfg;
        cfg.s2 = s2;
        cfg.kernel = fx.kernel;
        cfg.eps0 = 0.1;
        cfg.sigma_r = 0.5;
        cfg.phi = 2.0;
        cfg.eps = eps;
        cfg.delta = 0.9;
        cfg.backend = BackendKind::exact;
        cfg.seed = seed;
        auto tree = AugmentedKdeTree::build(fx.dim, fx.coords, fx.weights, fx.mult, cfg);

        double truth = fx.exact_sum(s2);
        const long reps = 400;
        double sum = 0.0, sum2 = 0.0;
        for (long t = 0; t < reps; ++t) {
            double v = tree.query(fx.query_y, fx.beta,
                                  rng::combine(seed ^ 0x77u, static_cast<std::uint64_t>(t)));
            sum += v;
            sum2 += v * v;
        }
        double mean = sum / reps;
        double var = std::max(0.0, sum2 / reps - mean * mean);
        ++res.total;
        if (var <= eps * truth * truth) ++res.passed;
        res.stat = std::max(res.stat, var / (truth * truth));
    }
    res.detail = "worst Var/E^2 (bound 0.25)";
    return res;
}

SuiteResult convergence_suite(std::uint64_t seed) {
    SuiteResult res;
    res.name = "convergence";
    rng::Stream gen({seed, 0xc0feu});
    for (int trial = 0; trial < 20; ++trial) {
        double rho = kRhoCycle[trial % 3];
        std::size_t n = 2 + gen.next_index(5), m = 2 + gen.next_index(5);
        int d = 1 + static_cast<int>(gen.next_index(3));
        auto mu = random_point_set(gen, n, d);
        auto nu = random_point_set(gen, m, d);
        Overrides ov{{"max_iters", 20000000.0}};
        auto run = run_solver(mu, nu, rho, 0.1, ParamMode::practical, Engine::exact,
                              seed + static_cast<std::uint64_t>(trial), ov);
        double oracle = exact_rrho(run.inst, run.hp, 1e-8).value;
        ++res.total;
        double err = std::abs(run.report.estimate - oracle);
        res.stat = std::max(res.stat, err / run.inst.r);
        if (err <= run.params.eps * run.inst.r) {
            ++res.passed;
        } else {
            res.detail = "trial " + std::to_string(trial);
        }
    }
    if (res.detail.empty()) res.detail = "max |est-oracle|/r";
    return res;
}

}  // namespace

const std::vector<std::string>& suite_names() {
    static const std::vector<std::string> names = {"sandwich",     "triangle",     "gradcheck",
                                                   "kde-unbiased", "kde-variance", "convergence"};
    return names;
}

SuiteResult run_suite(const std::string& name, std::uint64_t seed) {
    if (name == "sandwich") return sandwich_suite(seed);
    if (name == "triangle") return triangle_suite(seed);
    if (name == "gradcheck") return gradcheck_suite(seed);
    if (name == "kde-unbiased") return kde_unbiased_suite(seed);
    if (name == "kde-variance") return kde_variance_suite(seed);
    if (name == "convergence") return convergence_suite(seed);
    throw Error("unknown validation suite '" + name + "'");
}

}  // namespace rrho::validate
