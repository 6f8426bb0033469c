#include "rrho/point_set.hpp"

#include <algorithm>
#include <cmath>

namespace rrho {

double WeightedPointSet::min_mass() const {
    double m = std::numeric_limits<double>::infinity();
    for (double w : masses) m = std::min(m, w);
    return m;
}

void WeightedPointSet::normalize() {
    double sum = 0.0;
    for (double w : masses) sum += w;
    if (!(sum > 0.0) || !std::isfinite(sum)) {
        throw WeightSumError("point set masses must have a positive finite sum");
    }
    for (double& w : masses) w /= sum;
}

WeightedPointSet WeightedPointSet::make(int dim, std::vector<double> coords,
                                        std::vector<double> masses) {
    if (dim <= 0) throw DimensionMismatch("point dimension must be positive");
    if (coords.size() != masses.size() * static_cast<std::size_t>(dim)) {
        throw DimensionMismatch("coordinate buffer does not match mass count times dim");
    }
    WeightedPointSet out;
    out.dim = dim;
    out.coords.reserve(coords.size());
    out.masses.reserve(masses.size());
    for (std::size_t i = 0; i < masses.size(); ++i) {
        double w = masses[i];
        if (!std::isfinite(w) || w < 0.0) {
            throw WeightSumError("masses must be finite and nonnegative");
        }
        if (w == 0.0) continue;  // zero-mass points are removed at load
        out.masses.push_back(w);
        for (int k = 0; k < dim; ++k) {
            out.coords.push_back(coords[i * static_cast<std::size_t>(dim) + static_cast<std::size_t>(k)]);
        }
    }
    if (out.masses.empty()) throw EmptyInput("point set has no positive-mass points");
    out.normalize();
    return out;
}

WeightedPointSet WeightedPointSet::make(const std::vector<std::vector<double>>& points,
                                        const std::vector<double>& masses) {
    if (points.empty()) throw EmptyInput("point set has no points");
    if (points.size() != masses.size()) {
        throw DimensionMismatch("point count does not match mass count");
    }
    int dim = static_cast<int>(points.front().size());
    std::vector<double> flat;
    flat.reserve(points.size() * static_cast<std::size_t>(dim));
    for (const auto& p : points) {
        if (static_cast<int>(p.size()) != dim) {
            throw DimensionMismatch("all points must share one dimension");
        }
        flat.insert(flat.end(), p.begin(), p.end());
    }
    return make(dim, std::move(flat), masses);
}

}  // namespace rrho
