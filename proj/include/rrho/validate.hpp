#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "rrho/point_set.hpp"
#include "rrho/rng.hpp"

namespace rrho::validate {

// Random instances used by the validation suites and the test harness:
// uniform points in [0,1]^d, masses drawn in [lo, hi] then normalized (so
// min mass >= lo / (hi * k)).
WeightedPointSet random_point_set(rng::Stream& gen, std::size_t n, int d, double mass_lo = 0.5,
                                  double mass_hi = 1.5);

// Mass vector on a fixed support (for shared-support metric tests).
std::vector<double> random_masses(rng::Stream& gen, std::size_t n, double lo = 0.5,
                                  double hi = 1.5);

struct SuiteResult {
    std::string name;
    long passed = 0;
    long total = 0;
    double stat = 0.0;  // suite-specific scalar (max error, variance ratio, ...)
    std::string detail;

    bool ok() const { return passed == total; }
};

const std::vector<std::string>& suite_names();

// Runs one of: sandwich, triangle, gradcheck, kde-unbiased, kde-variance,
// convergence. Throws Error for unknown names.
SuiteResult run_suite(const std::string& name, std::uint64_t seed);

}  // namespace rrho::validate
