#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "rrho/oracles.hpp"
#include "rrho/validate.hpp"

using namespace rrho;

namespace {

ProblemInstance pair_instance(double x, double y) {
    return make_raw_instance(WeightedPointSet::make({{x}}, {1.0}),
                             WeightedPointSet::make({{y}}, {1.0}));
}

ProblemInstance grid_2x2() {
    auto mu = WeightedPointSet::make({{0.0}, {1.0}}, {0.5, 0.5});
    auto nu = WeightedPointSet::make({{0.5}, {2.0}}, {0.5, 0.5});
    return make_raw_instance(mu, nu);
}

// 1-D EMD has the closed form integral |F - G| over the line, an oracle
// independent of the flow solver
double emd_1d(const WeightedPointSet& mu, const WeightedPointSet& nu) {
    struct Ev {
        double x, dmu, dnu;
    };
    std::vector<Ev> ev;
    for (std::size_t i = 0; i < mu.size(); ++i) ev.push_back({mu.point(i)[0], mu.masses[i], 0.0});
    for (std::size_t j = 0; j < nu.size(); ++j) ev.push_back({nu.point(j)[0], 0.0, nu.masses[j]});
    std::sort(ev.begin(), ev.end(), [](const Ev& a, const Ev& b) { return a.x < b.x; });
    double acc = 0.0, diff = 0.0;
    for (std::size_t k = 0; k + 1 < ev.size(); ++k) {
        diff += ev[k].dmu - ev[k].dnu;
        acc += std::abs(diff) * (ev[k + 1].x - ev[k].x);
    }
    return acc;
}

}  // namespace

TEST_CASE("exact_emd basics") {
    CHECK(exact_emd(pair_instance(0.0, 3.0)).value == doctest::Approx(3.0).epsilon(1e-12));
    CHECK(exact_emd(grid_2x2()).value == doctest::Approx(0.75).epsilon(1e-12));

    auto mu = WeightedPointSet::make({{0.1}, {0.9}}, {0.3, 0.7});
    auto self = make_raw_instance(mu, mu);
    CHECK(exact_emd(self).value == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("exact_emd agrees with the 1-D CDF oracle") {
    rng::Stream gen(314);
    for (int trial = 0; trial < 60; ++trial) {
        std::size_t n = 1 + gen.next_index(8), m = 1 + gen.next_index(8);
        auto mu = validate::random_point_set(gen, n, 1);
        auto nu = validate::random_point_set(gen, m, 1);
        auto inst = make_raw_instance(mu, nu);
        auto res = exact_emd(inst);
        CHECK(res.value == doctest::Approx(emd_1d(mu, nu)).epsilon(1e-9));
        CHECK(res.coupling.marginal_violation(mu.masses, nu.masses) <= 1e-10);
    }
}

TEST_CASE("exact_emd equals the enumerated permutation value on 2x2 uniform") {
    rng::Stream gen(2718);
    for (int trial = 0; trial < 40; ++trial) {
        auto mu = validate::random_point_set(gen, 2, 2, 1.0, 1.0);
        auto nu = validate::random_point_set(gen, 2, 2, 1.0, 1.0);
        auto inst = make_raw_instance(mu, nu);
        double d00 = inst.cross_distance(0, 0), d01 = inst.cross_distance(0, 1);
        double d10 = inst.cross_distance(1, 0), d11 = inst.cross_distance(1, 1);
        double best = std::min(0.5 * (d00 + d11), 0.5 * (d01 + d10));
        CHECK(exact_emd(inst).value == doctest::Approx(best).epsilon(1e-10));
    }
}

TEST_CASE("ternary_2x2 oracle") {
    auto hp = holder_pair(2.0);

    // identical supports, uniform masses: zero transport
    auto mu = WeightedPointSet::make({{0.0}, {1.0}}, {0.5, 0.5});
    CHECK(ternary_2x2(make_raw_instance(mu, mu), hp) == doctest::Approx(0.0).epsilon(1e-9));

    // all four distances equal: cost D at the uniform coupling
    auto xs = WeightedPointSet::make({{1.0, 0.0}, {-1.0, 0.0}}, {0.5, 0.5});
    auto ys = WeightedPointSet::make({{0.0, 1.0}, {0.0, -1.0}}, {0.5, 0.5});
    CHECK(ternary_2x2(make_raw_instance(xs, ys), hp) ==
          doctest::Approx(std::sqrt(2.0)).epsilon(1e-9));

    // dense grid search cross-check on the running 2x2 instance
    auto inst = grid_2x2();
    double best = 1e300;
    for (double t = 0.0; t <= 0.5 + 1e-12; t += 1e-6) {
        double g11 = t, g12 = 0.5 - t, g21 = 0.5 - t, g22 = t;
        double acc = 0.0;
        auto add = [&](double gij, double dij) {
            if (gij > 0.0) acc += 0.25 * std::pow(gij / 0.25 * dij, 2.0);
        };
        add(g11, inst.cross_distance(0, 0));
        add(g12, inst.cross_distance(0, 1));
        add(g21, inst.cross_distance(1, 0));
        add(g22, inst.cross_distance(1, 1));
        best = std::min(best, acc);
    }
    CHECK(ternary_2x2(inst, hp) == doctest::Approx(std::pow(best, 0.5)).epsilon(1e-5));
}

TEST_CASE("exact_rrho on closed-form instances") {
    auto hp = holder_pair(1.5);
    auto res = exact_rrho(pair_instance(0.0, 2.0), hp, 1e-10);
    CHECK(res.value == doctest::Approx(2.0).epsilon(1e-7));

    auto h2 = holder_pair(2.0);
    CHECK(exact_rrho(grid_2x2(), h2, 1e-10).value ==
          doctest::Approx(ternary_2x2(grid_2x2(), h2)).epsilon(1e-6));
}

TEST_CASE("exact_rrho strong duality self-consistency") {
    rng::Stream gen(55);
    for (int trial = 0; trial < 10; ++trial) {
        double rho = (trial % 2 == 0) ? 1.5 : 2.0;
        auto hp = holder_pair(rho);
        auto mu = validate::random_point_set(gen, 3 + gen.next_index(3), 2);
        auto nu = validate::random_point_set(gen, 3 + gen.next_index(3), 2);
        auto inst = make_raw_instance(mu, nu);
        auto res = exact_rrho(inst, hp, 1e-9);
        double pc = primal_cost(inst, res.coupling, rho);
        double r_rho = std::pow(inst.r, rho);
        CHECK(std::abs(std::pow(pc, rho) - std::pow(res.value, rho)) <= 1e-6 * r_rho);
        // the primal value of any feasible coupling is an upper bound
        CHECK(std::pow(pc, rho) >= std::pow(res.value, rho) - 1e-8 * r_rho);
    }
}

TEST_CASE("exact_rrho is symmetric and monotone in rho") {
    rng::Stream gen(808);
    for (int trial = 0; trial < 6; ++trial) {
        auto mu = validate::random_point_set(gen, 4, 2);
        auto nu = validate::random_point_set(gen, 5, 2);
        auto ab = make_raw_instance(mu, nu);
        auto ba = make_raw_instance(nu, mu);
        auto hp = holder_pair(1.5);
        double f = exact_rrho(ab, hp, 1e-10).value;
        double b = exact_rrho(ba, hp, 1e-10).value;
        CHECK(std::abs(f - b) <= 1e-9 * ab.r);

        double prev = 0.0;
        for (double rho : {1.05, 1.1, 1.25, 1.5, 2.0}) {
            double v = exact_rrho(ab, holder_pair(rho), 1e-9).value;
            CHECK(v >= prev - 1e-7 * ab.r);
            prev = v;
        }
    }
}

TEST_CASE("sinkhorn closed forms and marginal quality") {
    // single pair: coupling is a point mass with zero entropy
    CHECK(sinkhorn(pair_instance(0.0, 1.5), 0.3) == doctest::Approx(1.5).epsilon(1e-8));

    // identical distributions at small eta: |SNK - 0| <= eta ln(nm)
    auto mu = WeightedPointSet::make({{0.0}, {1.0}, {2.5}}, {0.3, 0.4, 0.3});
    auto self = make_raw_instance(mu, mu);
    double eta = 1e-3 * self.r;
    double v = sinkhorn(self, eta);
    CHECK(std::abs(v) <= eta * std::log(9.0) + 1e-6);
}

TEST_CASE("sinkhorn tracks exact emd at small eta") {
    rng::Stream gen(616);
    for (int trial = 0; trial < 10; ++trial) {
        std::size_t n = 2 + gen.next_index(3), m = 2 + gen.next_index(3);
        auto mu = validate::random_point_set(gen, n, 2);
        auto nu = validate::random_point_set(gen, m, 2);
        auto inst = make_raw_instance(mu, nu);
        double eta = 1e-3 * inst.r;
        double snk = sinkhorn(inst, eta);
        double emd = exact_emd(inst).value;
        CHECK(std::abs(snk - emd) <=
              eta * std::log(static_cast<double>(n * m)) + 1e-6);
    }
}
