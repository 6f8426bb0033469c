#include "rrho/oracles.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace rrho {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::vector<double> cross_distances(const ProblemInstance& inst) {
    std::vector<double> d(inst.n() * inst.m());
    for (std::size_t i = 0; i < inst.n(); ++i) {
        auto x = inst.mu.point(i);
        for (std::size_t j = 0; j < inst.m(); ++j) {
            d[i * inst.m() + j] = dist(x, inst.nu.point(j));
        }
    }
    return d;
}

// Altschuler-style rounding: scale rows and columns down to the marginals,
// then patch the residual with a rank-one term. Output has exact marginals.
void round_to_marginals(Coupling& g, const std::vector<double>& mu,
                        const std::vector<double>& nu) {
    auto rs = g.row_sums();
    for (std::size_t i = 0; i < g.n; ++i) {
        if (rs[i] > mu[i] && rs[i] > 0.0) {
            double f = mu[i] / rs[i];
            for (std::size_t j = 0; j < g.m; ++j) g.at(i, j) *= f;
        }
    }
    auto cs = g.col_sums();
    for (std::size_t j = 0; j < g.m; ++j) {
        if (cs[j] > nu[j] && cs[j] > 0.0) {
            double f = nu[j] / cs[j];
            for (std::size_t i = 0; i < g.n; ++i) g.at(i, j) *= f;
        }
    }
    rs = g.row_sums();
    cs = g.col_sums();
    double excess = 0.0;
    std::vector<double> er(g.n), ec(g.m);
    for (std::size_t i = 0; i < g.n; ++i) {
        er[i] = std::max(0.0, mu[i] - rs[i]);
        excess += er[i];
    }
    for (std::size_t j = 0; j < g.m; ++j) ec[j] = std::max(0.0, nu[j] - cs[j]);
    if (excess > 0.0) {
        for (std::size_t i = 0; i < g.n; ++i) {
            if (er[i] == 0.0) continue;
            for (std::size_t j = 0; j < g.m; ++j) g.at(i, j) += er[i] * ec[j] / excess;
        }
    }
}

void verify_certificate(const OracleResult& res, const ProblemInstance& inst) {
    if (res.coupling.marginal_violation(inst.mu.masses, inst.nu.masses) > 1e-8) {
        throw Error("oracle certificate marginals violated beyond 1e-8");
    }
}

struct ZeroPairs {
    // matching between coincident cross points: pair_of_mu[i] = j or -1
    std::vector<long> of_mu, of_nu;
    bool any = false;
};

ZeroPairs find_zero_pairs(const ProblemInstance& inst, const std::vector<double>& d) {
    ZeroPairs zp;
    zp.of_mu.assign(inst.n(), -1);
    zp.of_nu.assign(inst.m(), -1);
    double cut = 1e-12 * inst.r;
    for (std::size_t i = 0; i < inst.n(); ++i) {
        for (std::size_t j = 0; j < inst.m(); ++j) {
            if (d[i * inst.m() + j] <= cut) {
                if (zp.of_mu[i] != -1 || zp.of_nu[j] != -1) {
                    throw Error("coincident duplicate points within a support are not supported; "
                                "merge equal points first");
                }
                zp.of_mu[i] = static_cast<long>(j);
                zp.of_nu[j] = static_cast<long>(i);
                zp.any = true;
            }
        }
    }
    return zp;
}

}  // namespace

namespace {

// dense Cholesky solve of A x = b for symmetric positive definite A
bool cholesky_solve(std::vector<double>& a, std::vector<double>& b, std::size_t k) {
    for (std::size_t c = 0; c < k; ++c) {
        double diag = a[c * k + c];
        for (std::size_t r = 0; r < c; ++r) diag -= a[c * k + r] * a[c * k + r];
        if (!(diag > 0.0)) return false;
        diag = std::sqrt(diag);
        a[c * k + c] = diag;
        for (std::size_t r = c + 1; r < k; ++r) {
            double v = a[r * k + c];
            for (std::size_t q = 0; q < c; ++q) v -= a[r * k + q] * a[c * k + q];
            a[r * k + c] = v / diag;
        }
    }
    for (std::size_t r = 0; r < k; ++r) {
        double v = b[r];
        for (std::size_t q = 0; q < r; ++q) v -= a[r * k + q] * b[q];
        b[r] = v / a[r * k + r];
    }
    for (std::size_t r = k; r > 0; --r) {
        double v = b[r - 1];
        for (std::size_t q = r; q < k; ++q) v -= a[q * k + (r - 1)] * b[q];
        b[r - 1] = v / a[(r - 1) * k + (r - 1)];
    }
    return true;
}

}  // namespace

OracleResult exact_rrho(const ProblemInstance& inst, const HolderPair& hp, double tol,
                        long max_iters) {
    const std::size_t n = inst.n(), m = inst.m();
    if (n * m > 10000) throw Error("exact_rrho limited to n*m <= 10^4");
    const std::vector<double> d = cross_distances(inst);
    const ZeroPairs zp = find_zero_pairs(inst, d);
    const double r_rho = std::pow(inst.r, hp.rho);

    // inverse s-powers of distances, 0 for constrained pairs
    std::vector<double> invds(n * m, 0.0);
    double cut = 1e-12 * inst.r;
    for (std::size_t k = 0; k < n * m; ++k) {
        if (d[k] > cut) invds[k] = 1.0 / std::pow(d[k], hp.s);
    }

    const std::vector<double>& mu = inst.mu.masses;
    const std::vector<double>& nu = inst.nu.masses;
    PosPow pw_s(hp.s), pw_s1(hp.s - 1.0), pw_s2(hp.s - 2.0);

    auto project = [&](std::vector<double>& a, std::vector<double>& b) {
        if (!zp.any) return;
        for (std::size_t i = 0; i < n; ++i) {
            long j = zp.of_mu[i];
            if (j >= 0 && a[i] > b[static_cast<std::size_t>(j)]) {
                double mid = 0.5 * (a[i] + b[static_cast<std::size_t>(j)]);
                a[i] = mid;
                b[static_cast<std::size_t>(j)] = mid;
            }
        }
    };

    auto eval_g = [&](const std::vector<double>& a, const std::vector<double>& b) {
        double lin = 0.0;
        for (std::size_t i = 0; i < n; ++i) lin += mu[i] * a[i];
        for (std::size_t j = 0; j < m; ++j) lin -= nu[j] * b[j];
        double pen = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < m; ++j) {
                double gap = a[i] - b[j];
                if (gap > 0.0) pen += mu[i] * nu[j] * pw_s(gap) * invds[i * m + j];
            }
        }
        return lin - hp.c_s * pen;
    };

    auto eval_grad = [&](const std::vector<double>& a, const std::vector<double>& b,
                         std::vector<double>& ga, std::vector<double>& gb) {
        // dg/da_i = mu_i (1 - eta_i), dg/db_j = nu_j (xi_j - 1)
        for (std::size_t i = 0; i < n; ++i) {
            double acc = 0.0;
            for (std::size_t j = 0; j < m; ++j) {
                double gap = a[i] - b[j];
                if (gap > 0.0) acc += nu[j] * pw_s1(gap) * invds[i * m + j];
            }
            ga[i] = mu[i] * (1.0 - hp.s_cs() * acc);
        }
        for (std::size_t j = 0; j < m; ++j) {
            double acc = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                double gap = a[i] - b[j];
                if (gap > 0.0) acc += mu[i] * pw_s1(gap) * invds[i * m + j];
            }
            gb[j] = nu[j] * (hp.s_cs() * acc - 1.0);
        }
    };

    std::vector<double> alpha(n, 0.0), beta(m, 0.0);
    std::vector<double> ga(n), gb(m), ta(n), tb(m);
    double g = 0.0;

    double mu_min = *std::min_element(mu.begin(), mu.end());
    double nu_min = *std::min_element(nu.begin(), nu.end());
    double a_inf = 0.5 * std::pow(4.0, 1.0 / hp.s) *
                   std::pow(1.0 / (mu_min * nu_min), (hp.rho - 1.0) / hp.rho) * r_rho;

    auto gap_estimate = [&]() {
        double gap_bound = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            if (zp.of_mu[i] >= 0) continue;
            gap_bound += std::abs(ga[i]) * a_inf - ga[i] * alpha[i];
        }
        for (std::size_t j = 0; j < m; ++j) {
            if (zp.of_nu[j] >= 0) continue;
            gap_bound += std::abs(gb[j]) * a_inf - gb[j] * beta[j];
        }
        if (zp.any) {
            for (std::size_t i = 0; i < n; ++i) {
                long j = zp.of_mu[i];
                if (j < 0) continue;
                double c1 = ga[i], c2 = gb[static_cast<std::size_t>(j)];
                double best;
                if (c1 > 0.0 && c2 < 0.0) {
                    best = std::abs(c1 + c2) * a_inf;  // forced onto the a = b edge
                } else {
                    best = (std::abs(c1) + std::abs(c2)) * a_inf;
                }
                gap_bound += best - c1 * alpha[i] - c2 * beta[static_cast<std::size_t>(j)];
            }
        }
        return gap_bound;
    };

    auto finish = [&](long it) {
        DualState st;
        st.alpha = alpha;
        st.beta = beta;
        st.iteration = it;
        OracleResult res;
        res.value = std::pow(std::max(g, 0.0), 1.0 / hp.rho);
        res.coupling = coupling_from_dual(inst, st, hp);
        round_to_marginals(res.coupling, mu, nu);
        res.solver_tol = tol;
        verify_certificate(res, inst);
        return res;
    };

    const std::size_t dim = n + m;
    std::vector<double> hess, rhs;
    double step = 0.5 * r_rho;
    const long newton_start = 20;

    for (long it = 0; it < max_iters; ++it) {
        eval_grad(alpha, beta, ga, gb);
        double gap_bound = gap_estimate();
        if (gap_bound <= tol * r_rho) return finish(it);

        // Newton steps take over once the warm-up strides are done; the
        // Hessian is cheap at oracle scale and the translation null direction
        // is absorbed by the damping term
        bool moved = false;
        if (it >= newton_start && dim <= 400) {
            hess.assign(dim * dim, 0.0);
            double curvature_scale = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                for (std::size_t j = 0; j < m; ++j) {
                    double gap = alpha[i] - beta[j];
                    if (gap <= 0.0) continue;
                    double w = hp.s * (hp.s - 1.0) * hp.c_s * mu[i] * nu[j] * pw_s2(gap) *
                               invds[i * m + j];
                    hess[i * dim + i] += w;
                    hess[(n + j) * dim + (n + j)] += w;
                    hess[i * dim + (n + j)] -= w;
                    hess[(n + j) * dim + i] -= w;
                    curvature_scale = std::max(curvature_scale, w);
                }
            }
            double damping = std::max(1e-12 * std::max(curvature_scale, 1.0), 1e-300);
            for (std::size_t k = 0; k < dim; ++k) hess[k * dim + k] += damping;
            rhs.resize(dim);
            for (std::size_t i = 0; i < n; ++i) rhs[i] = ga[i];
            for (std::size_t j = 0; j < m; ++j) rhs[n + j] = gb[j];
            std::vector<double> chol = hess;
            if (cholesky_solve(chol, rhs, dim)) {
                double t = 1.0;
                double grad_norm = 0.0;
                for (std::size_t i = 0; i < n; ++i) grad_norm += std::abs(ga[i]);
                for (std::size_t j = 0; j < m; ++j) grad_norm += std::abs(gb[j]);
                for (int bt = 0; bt < 30 && !moved; ++bt) {
                    for (std::size_t i = 0; i < n; ++i) ta[i] = alpha[i] + t * rhs[i];
                    for (std::size_t j = 0; j < m; ++j) tb[j] = beta[j] + t * rhs[n + j];
                    project(ta, tb);
                    double gt = eval_g(ta, tb);
                    if (std::isfinite(gt) && gt >= g - 1e-13 * (std::abs(g) + r_rho)) {
                        std::vector<double> nga(n), ngb(m);
                        eval_grad(ta, tb, nga, ngb);
                        double new_norm = 0.0;
                        for (double v : nga) new_norm += std::abs(v);
                        for (double v : ngb) new_norm += std::abs(v);
                        if (new_norm <= 0.9 * grad_norm || gt > g) {
                            alpha.swap(ta);
                            beta.swap(tb);
                            ga.swap(nga);
                            gb.swap(ngb);
                            g = std::max(g, gt);
                            moved = true;
                        }
                    }
                    t *= 0.5;
                }
            }
            if (moved) continue;
        }

        // Armijo backtracking on the projected full-gradient step
        double t = step;
        bool accepted = false;
        for (int bt = 0; bt < 60; ++bt) {
            for (std::size_t i = 0; i < n; ++i) ta[i] = alpha[i] + t * ga[i];
            for (std::size_t j = 0; j < m; ++j) tb[j] = beta[j] + t * gb[j];
            project(ta, tb);
            double dir = 0.0;
            for (std::size_t i = 0; i < n; ++i) dir += ga[i] * (ta[i] - alpha[i]);
            for (std::size_t j = 0; j < m; ++j) dir += gb[j] * (tb[j] - beta[j]);
            if (dir <= 0.0) break;  // projection killed the ascent direction
            double gt = eval_g(ta, tb);
            if (std::isfinite(gt) && gt >= g + 1e-4 * dir) {
                alpha.swap(ta);
                beta.swap(tb);
                g = gt;
                step = std::min(t * 2.0, 1e6 * r_rho);
                accepted = true;
                break;
            }
            t *= 0.5;
        }
        if (!accepted) {
            // neither direction can certify progress against float noise
            if (gap_bound <= 1000.0 * tol * r_rho) return finish(it);
            throw NonConvergence("exact_rrho cannot certify the requested gap");
        }
    }
    throw NonConvergence("exact_rrho exhausted its iteration budget");
}

double ternary_2x2(const ProblemInstance& inst, const HolderPair& hp) {
    if (inst.n() != 2 || inst.m() != 2) throw Error("ternary_2x2 needs n = m = 2");
    const std::vector<double> d = cross_distances(inst);
    double mu1 = inst.mu.masses[0], mu2 = inst.mu.masses[1];
    double nu1 = inst.nu.masses[0], nu2 = inst.nu.masses[1];
    (void)nu2;

    double lo = std::max(0.0, nu1 - mu2);
    double hi = std::min(mu1, nu1);

    auto objective = [&](double t) {
        double g11 = t, g12 = mu1 - t, g21 = nu1 - t, g22 = mu2 - (nu1 - t);
        double acc = 0.0;
        auto term = [&](double gij, double mi, double nj, double dij) {
            if (gij <= 0.0) return;
            double w = mi * nj;
            acc += w * std::pow(gij / w * dij, hp.rho);
        };
        term(g11, mu1, nu1, d[0]);
        term(g12, mu1, nu2, d[1]);
        term(g21, mu2, nu1, d[2]);
        term(g22, mu2, nu2, d[3]);
        return acc;
    };

    double a = lo, b = hi;
    for (int it = 0; it < 300 && (b - a) > 1e-14; ++it) {
        double m1 = a + (b - a) / 3.0, m2 = b - (b - a) / 3.0;
        if (objective(m1) <= objective(m2)) {
            b = m2;
        } else {
            a = m1;
        }
    }
    double t = 0.5 * (a + b);
    return std::pow(objective(t), 1.0 / hp.rho);
}

OracleResult exact_emd(const ProblemInstance& inst) {
    const std::size_t n = inst.n(), m = inst.m();
    if (n * m > 10000) throw Error("exact_emd limited to n*m <= 10^4");
    const std::vector<double> d = cross_distances(inst);

    std::vector<double> supply = inst.mu.masses;
    std::vector<double> demand = inst.nu.masses;
    Coupling flow(n, m);
    std::vector<double> pot_u(n, 0.0), pot_v(m, 0.0);

    const double mass_tol = 1e-15;
    const double rc_tol = 1e-12;

    // each augmentation exhausts a supply or a demand node, so the loop runs
    // at most n+m-1 times up to float residue
    for (std::size_t round = 0; round < 4 * (n + m) + 8; ++round) {
        std::size_t src = n;
        for (std::size_t i = 0; i < n; ++i) {
            if (supply[i] > mass_tol) {
                src = i;
                break;
            }
        }
        if (src == n) break;

        // Dijkstra over the residual bipartite graph with reduced costs
        std::vector<double> du(n, kInf), dv(m, kInf);
        std::vector<long> par_v(m, -1);  // mu-index feeding j
        std::vector<long> par_u(n, -1);  // nu-index feeding i (backward arc)
        std::vector<bool> done_u(n, false), done_v(m, false);
        du[src] = 0.0;
        while (true) {
            double best = kInf;
            bool is_u = true;
            std::size_t node = 0;
            for (std::size_t i = 0; i < n; ++i) {
                if (!done_u[i] && du[i] < best) {
                    best = du[i];
                    is_u = true;
                    node = i;
                }
            }
            for (std::size_t j = 0; j < m; ++j) {
                if (!done_v[j] && dv[j] < best) {
                    best = dv[j];
                    is_u = false;
                    node = j;
                }
            }
            if (best == kInf) break;
            if (is_u) {
                done_u[node] = true;
                for (std::size_t j = 0; j < m; ++j) {
                    if (done_v[j]) continue;
                    // reduced cost c - pot(u) + pot(v); tolerance per float drift
                    double rc = d[node * m + j] - pot_u[node] + pot_v[j];
                    if (rc < 0.0) rc = 0.0;
                    (void)rc_tol;
                    if (du[node] + rc < dv[j]) {
                        dv[j] = du[node] + rc;
                        par_v[j] = static_cast<long>(node);
                    }
                }
            } else {
                done_v[node] = true;
                for (std::size_t i = 0; i < n; ++i) {
                    if (done_u[i] || flow.at(i, node) <= 0.0) continue;
                    double rc = -d[i * m + node] - pot_v[node] + pot_u[i];
                    if (rc < 0.0) rc = 0.0;
                    if (dv[node] + rc < du[i]) {
                        du[i] = dv[node] + rc;
                        par_u[i] = static_cast<long>(node);
                    }
                }
            }
        }

        // cheapest reachable live demand
        std::size_t dst = m;
        double dist_t = kInf;
        for (std::size_t j = 0; j < m; ++j) {
            if (demand[j] > mass_tol && dv[j] < dist_t) {
                dist_t = dv[j];
                dst = j;
            }
        }
        if (dst == m) break;

        // bottleneck along src -> ... -> dst
        double delta = std::min(supply[src], demand[dst]);
        {
            std::size_t j = dst;
            while (true) {
                std::size_t i = static_cast<std::size_t>(par_v[j]);
                if (i == src) break;
                std::size_t jprev = static_cast<std::size_t>(par_u[i]);
                delta = std::min(delta, flow.at(i, jprev));
                j = jprev;
            }
        }
        {
            std::size_t j = dst;
            while (true) {
                std::size_t i = static_cast<std::size_t>(par_v[j]);
                flow.at(i, j) += delta;
                if (i == src) break;
                std::size_t jprev = static_cast<std::size_t>(par_u[i]);
                flow.at(i, jprev) -= delta;
                j = jprev;
            }
        }
        supply[src] -= delta;
        demand[dst] -= delta;

        // pot(x) -= min(dist(x), dist(target)) keeps every residual reduced
        // cost nonnegative; unreached nodes take the target distance
        for (std::size_t i = 0; i < n; ++i) pot_u[i] -= std::min(du[i], dist_t);
        for (std::size_t j = 0; j < m; ++j) pot_v[j] -= std::min(dv[j], dist_t);
    }

    OracleResult res;
    res.coupling = std::move(flow);
    res.solver_tol = 1e-10;
    double value = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < m; ++j) value += res.coupling.at(i, j) * d[i * m + j];
    }
    res.value = value;
    verify_certificate(res, inst);
    return res;
}

double sinkhorn(const ProblemInstance& inst, double eta, double tol, long max_iter) {
    if (!(eta > 0.0)) throw Error("sinkhorn needs eta > 0");
    const std::size_t n = inst.n(), m = inst.m();
    if (n * m > 10000) throw Error("sinkhorn limited to n*m <= 10^4");
    const std::vector<double> d = cross_distances(inst);
    const std::vector<double>& mu = inst.mu.masses;
    const std::vector<double>& nu = inst.nu.masses;

    Coupling g(n, m);
    bool log_domain = eta < 0.05 * inst.r;

    if (!log_domain) {
        std::vector<double> K(n * m);
        for (std::size_t k = 0; k < n * m; ++k) K[k] = std::exp(-d[k] / eta);
        for (std::size_t i = 0; i < n; ++i) {
            double row = 0.0;
            for (std::size_t j = 0; j < m; ++j) row += K[i * m + j];
            if (row == 0.0) {
                throw NumericalUnderflow("Gibbs kernel underflow; eta too small for plain domain");
            }
        }
        std::vector<double> u(n, 1.0), v(m, 1.0);
        for (long it = 0; it < max_iter; ++it) {
            for (std::size_t i = 0; i < n; ++i) {
                double acc = 0.0;
                for (std::size_t j = 0; j < m; ++j) acc += K[i * m + j] * v[j];
                u[i] = mu[i] / acc;
            }
            double worst = 0.0;
            for (std::size_t j = 0; j < m; ++j) {
                double acc = 0.0;
                for (std::size_t i = 0; i < n; ++i) acc += K[i * m + j] * u[i];
                v[j] = nu[j] / acc;
            }
            // row marginals are exact after the u-update; check columns
            for (std::size_t j = 0; j < m; ++j) {
                double col = 0.0;
                for (std::size_t i = 0; i < n; ++i) col += u[i] * K[i * m + j] * v[j];
                worst = std::max(worst, std::abs(col - nu[j]));
            }
            if (worst <= tol) break;
        }
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < m; ++j) g.at(i, j) = u[i] * K[i * m + j] * v[j];
        }
    } else {
        std::vector<double> f(n, 0.0), gv(m, 0.0);
        std::vector<double> lmu(n), lnu(m);
        for (std::size_t i = 0; i < n; ++i) lmu[i] = std::log(mu[i]);
        for (std::size_t j = 0; j < m; ++j) lnu[j] = std::log(nu[j]);
        auto lse = [](const std::vector<double>& t) {
            double mx = -kInf;
            for (double x : t) mx = std::max(mx, x);
            double acc = 0.0;
            for (double x : t) acc += std::exp(x - mx);
            return mx + std::log(acc);
        };
        std::vector<double> buf(std::max(n, m));
        for (long it = 0; it < max_iter; ++it) {
            for (std::size_t i = 0; i < n; ++i) {
                buf.resize(m);
                for (std::size_t j = 0; j < m; ++j) {
                    buf[j] = lnu[j] + (gv[j] - d[i * m + j]) / eta;
                }
                f[i] = -eta * lse(buf);
            }
            double worst = 0.0;
            for (std::size_t j = 0; j < m; ++j) {
                buf.resize(n);
                for (std::size_t i = 0; i < n; ++i) {
                    buf[i] = lmu[i] + (f[i] - d[i * m + j]) / eta;
                }
                gv[j] = -eta * lse(buf);
            }
            // column marginals are exact after the gv-update; check rows
            for (std::size_t i = 0; i < n; ++i) {
                double row = 0.0;
                for (std::size_t j = 0; j < m; ++j) {
                    row += mu[i] * nu[j] * std::exp((f[i] + gv[j] - d[i * m + j]) / eta);
                }
                worst = std::max(worst, std::abs(row - mu[i]));
            }
            if (worst <= tol) break;
        }
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < m; ++j) {
                g.at(i, j) = mu[i] * nu[j] * std::exp((f[i] + gv[j] - d[i * m + j]) / eta);
            }
        }
    }

    round_to_marginals(g, mu, nu);
    double cost = 0.0, entropy = 0.0;
    for (std::size_t k = 0; k < n * m; ++k) {
        double gij = g.a[k];
        if (gij <= 0.0) continue;
        cost += gij * d[k];
        entropy -= gij * std::log(gij);
    }
    return cost - eta * entropy;
}

}  // namespace rrho
