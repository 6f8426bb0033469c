#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "rrho/errors.hpp"

namespace rrho {

// Discrete distribution on points in R^d. Masses are strictly positive and
// sum to 1; zero-mass points are dropped on construction.
struct WeightedPointSet {
    int dim = 0;
    std::vector<double> coords;  // row-major, size() * dim entries
    std::vector<double> masses;

    std::size_t size() const { return masses.size(); }

    std::span<const double> point(std::size_t i) const {
        return {coords.data() + i * static_cast<std::size_t>(dim), static_cast<std::size_t>(dim)};
    }

    double min_mass() const;

    // Rescales masses to sum to 1 exactly. Throws WeightSumError if the sum
    // is not positive.
    void normalize();

    // Validates masses (>= 0, finite), drops zero-mass points, normalizes.
    static WeightedPointSet make(int dim, std::vector<double> coords, std::vector<double> masses);
    static WeightedPointSet make(const std::vector<std::vector<double>>& points,
                                 const std::vector<double>& masses);
};

inline double dist2(std::span<const double> a, std::span<const double> b) {
    double acc = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) {
        double d = a[k] - b[k];
        acc += d * d;
    }
    return acc;
}

inline double dist(std::span<const double> a, std::span<const double> b) {
    return std::sqrt(dist2(a, b));
}

// ((x)^+)^p with a fast path for small integer p.
struct PosPow {
    double p = 1.0;
    int ip = 1;
    bool is_int = false;

    explicit PosPow(double power) : p(power) {
        double r = std::round(power);
        if (std::abs(power - r) < 1e-12 && r >= 0.0 && r <= 64.0) {
            is_int = true;
            ip = static_cast<int>(r);
        }
    }

    double operator()(double x) const {
        if (x <= 0.0) return 0.0;
        if (is_int) {
            double acc = 1.0;
            double base = x;
            int e = ip;
            while (e > 0) {
                if (e & 1) acc *= base;
                base *= base;
                e >>= 1;
            }
            return acc;
        }
        return std::pow(x, p);
    }
};

}  // namespace rrho
