#include "rrho/kde.hpp"

#include <algorithm>
#include <cmath>

#include "rrho/errors.hpp"
#include "rrho/rng.hpp"

namespace rrho {

SmoothKernel SmoothKernel::make(double s, double eps0, double sigma_r) {
    if (!(s >= 1.0)) throw Error("kernel power must be >= 1");
    if (eps0 < 0.0 || sigma_r < 0.0) throw Error("kernel floor parameters must be nonnegative");
    SmoothKernel k;
    k.s = s;
    k.floor = eps0 * std::pow(sigma_r, s);
    return k;
}

double kernel_eval(const SmoothKernel& k, std::span<const double> x, std::span<const double> y) {
    return k.eval_dist2(dist2(x, y));
}

ExactKdeBackend::ExactKdeBackend(int dim, std::vector<double> coords,
                                 std::vector<double> multipliers, SmoothKernel kernel)
    : dim_(dim), coords_(std::move(coords)), mult_(std::move(multipliers)), kernel_(kernel) {}

double ExactKdeBackend::query(std::span<const double> y, std::uint64_t) const {
    double acc = 0.0;
    for (std::size_t i = 0; i < mult_.size(); ++i) {
        std::span<const double> x{coords_.data() + i * static_cast<std::size_t>(dim_),
                                  static_cast<std::size_t>(dim_)};
        acc += mult_[i] * kernel_.eval_dist2(dist2(x, y));
    }
    return acc;
}

std::vector<std::vector<std::uint32_t>> bucketize_multipliers(const std::vector<double>& mult,
                                                              double eps) {
    if (mult.empty()) return {};
    double lo = *std::min_element(mult.begin(), mult.end());
    double ratio = std::log1p(eps);
    std::vector<std::vector<std::uint32_t>> buckets;
    for (std::uint32_t i = 0; i < mult.size(); ++i) {
        std::size_t b = 0;
        if (mult[i] > lo && ratio > 0.0) {
            b = static_cast<std::size_t>(std::floor(std::log(mult[i] / lo) / ratio));
        }
        if (buckets.size() <= b) buckets.resize(b + 1);
        buckets[b].push_back(i);
    }
    // drop empty geometric ranges
    std::vector<std::vector<std::uint32_t>> out;
    for (auto& b : buckets) {
        if (!b.empty()) out.push_back(std::move(b));
    }
    return out;
}

SamplingKdeBackend::SamplingKdeBackend(int dim, std::vector<double> coords,
                                       std::vector<double> multipliers, SmoothKernel kernel,
                                       double sigma_r, double phi, double eps, double delta,
                                       std::uint64_t seed)
    : dim_(dim),
      coords_(std::move(coords)),
      mult_(std::move(multipliers)),
      kernel_(kernel),
      seed_(seed) {
    if (mult_.empty()) throw EmptyInput("sampling backend needs points");
    if (!(phi >= 1.0) || !(sigma_r > 0.0)) throw Error("invalid distance promise");
    if (!(eps > 0.0) || !(delta > 0.0 && delta < 1.0)) throw Error("invalid (eps, delta)");
    d_lo_ = sigma_r;
    d_hi_ = phi * sigma_r;

    double r_k = (kernel_.floor + std::pow(d_hi_, kernel_.s)) /
                 (kernel_.floor + std::pow(d_lo_, kernel_.s));
    double raw = std::ceil(4.0 * r_k / (eps * eps));
    samples_per_bucket_ = raw > 1e9 ? 1000000000L : static_cast<long>(raw);
    reps_ = static_cast<long>(std::ceil(9.0 * std::log(1.0 / delta)));
    if (reps_ < 1) reps_ = 1;

    buckets_ = bucketize_multipliers(mult_, eps);
    for (const auto& b : buckets_) {
        if (static_cast<long>(b.size()) > samples_per_bucket_) {
            all_exhaustive_ = false;
            break;
        }
    }
}

double SamplingKdeBackend::point_value(std::size_t idx, std::span<const double> y, double& dmin,
                                       double& dmax) const {
    std::span<const double> x{coords_.data() + idx * static_cast<std::size_t>(dim_),
                              static_cast<std::size_t>(dim_)};
    double d2 = dist2(x, y);
    double d = std::sqrt(d2);
    dmin = std::min(dmin, d);
    dmax = std::max(dmax, d);
    return mult_[idx] * kernel_.eval_dist2(d2);
}

double SamplingKdeBackend::query(std::span<const double> y, std::uint64_t stream) const {
    double dmin = std::numeric_limits<double>::infinity();
    double dmax = 0.0;

    // exhaustive buckets contribute a fixed term shared by all repetitions
    double fixed = 0.0;
    for (const auto& b : buckets_) {
        if (static_cast<long>(b.size()) > samples_per_bucket_) continue;
        for (std::uint32_t idx : b) fixed += point_value(idx, y, dmin, dmax);
    }

    std::vector<double> reps;
    if (all_exhaustive_) {
        reps.assign(1, fixed);
    } else {
        reps.reserve(static_cast<std::size_t>(reps_));
        for (long rep = 0; rep < reps_; ++rep) {
            double est = fixed;
            for (std::size_t bi = 0; bi < buckets_.size(); ++bi) {
                const auto& b = buckets_[bi];
                if (static_cast<long>(b.size()) <= samples_per_bucket_) continue;
                rng::Stream gen({seed_, stream, static_cast<std::uint64_t>(rep),
                                 static_cast<std::uint64_t>(bi)});
                double acc = 0.0;
                for (long t = 0; t < samples_per_bucket_; ++t) {
                    std::uint32_t idx = b[gen.next_index(b.size())];
                    acc += point_value(idx, y, dmin, dmax);
                }
                est += static_cast<double>(b.size()) * acc / static_cast<double>(samples_per_bucket_);
            }
            reps.push_back(est);
        }
        std::sort(reps.begin(), reps.end());
    }

    // lazy distance-promise check over the distances actually evaluated
    if (dmax > 0.0 && dmin < std::numeric_limits<double>::infinity()) {
        if (dmin < d_lo_ * (1.0 - 1e-9) || dmax > d_hi_ * (1.0 + 1e-9)) {
            throw AspectRatioViolated("query distance outside the [sigma r, phi sigma r] promise");
        }
    }
    return reps[(reps.size() - 1) / 2];
}

}  // namespace rrho
