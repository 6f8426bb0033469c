#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "rrho/point_set.hpp"

namespace rrho {

// Floored inverse-power kernel K(x,y) = 1/(floor + ||x-y||^s) with
// floor = eps0*(sigma_r)^s. For distances in [sigma_r, r] it is sandwiched
// between (1-eps0)/d^s and 1/d^s.
struct SmoothKernel {
    double s = 2.0;
    double floor = 0.0;

    static SmoothKernel make(double s, double eps0, double sigma_r);

    double eval_dist(double d) const { return 1.0 / (floor + std::pow(d, s)); }
    double eval_dist2(double d2) const { return 1.0 / (floor + std::pow(d2, 0.5 * s)); }
};

double kernel_eval(const SmoothKernel& k, std::span<const double> x, std::span<const double> y);

// Query contract: an estimate of sum_i m_i K(x_i, y) within (1 +/- eps) with
// probability >= 1 - delta over the stream randomness. Queries are pure
// given (build, stream): fixing the stream pre-samples all randomness.
class KdeBackend {
public:
    virtual ~KdeBackend() = default;
    virtual double query(std::span<const double> y, std::uint64_t stream) const = 0;
    virtual bool exhaustive() const = 0;  // deterministic exact summation
    virtual std::size_t size() const = 0;
};

// Reference implementation of the contract with eps = delta = 0.
class ExactKdeBackend : public KdeBackend {
public:
    ExactKdeBackend(int dim, std::vector<double> coords, std::vector<double> multipliers,
                    SmoothKernel kernel);

    double query(std::span<const double> y, std::uint64_t stream) const override;
    bool exhaustive() const override { return true; }
    std::size_t size() const override { return mult_.size(); }

private:
    int dim_;
    std::vector<double> coords_;
    std::vector<double> mult_;
    SmoothKernel kernel_;
};

// Uniform-sampling backend: points are bucketed by multiplier into
// (1+eps)-geometric ranges; each bucket sum is estimated by
// |bucket| * mean(m_i K(x_i,y)) over ceil(4 R_K / eps^2) uniform draws,
// where R_K = (floor + (phi sigma_r)^s)/(floor + sigma_r^s) bounds the
// kernel-value spread under the aspect-ratio promise. The per-query output
// is the median of ceil(9 ln(1/delta)) repetitions. Buckets no larger than
// the sample count are summed exhaustively.
class SamplingKdeBackend : public KdeBackend {
public:
    SamplingKdeBackend(int dim, std::vector<double> coords, std::vector<double> multipliers,
                       SmoothKernel kernel, double sigma_r, double phi, double eps,
                       double delta, std::uint64_t seed);

    double query(std::span<const double> y, std::uint64_t stream) const override;
    bool exhaustive() const override { return all_exhaustive_; }
    std::size_t size() const override { return mult_.size(); }

    long sample_count() const { return samples_per_bucket_; }
    long repetitions() const { return reps_; }
    std::size_t bucket_count() const { return buckets_.size(); }

private:
    int dim_;
    std::vector<double> coords_;
    std::vector<double> mult_;
    SmoothKernel kernel_;
    double d_lo_ = 0.0, d_hi_ = 0.0;  // distance promise [sigma_r, phi*sigma_r]
    long samples_per_bucket_ = 0;
    long reps_ = 1;
    std::uint64_t seed_ = 0;
    std::vector<std::vector<std::uint32_t>> buckets_;
    bool all_exhaustive_ = true;

    double point_value(std::size_t idx, std::span<const double> y, double& dmin,
                       double& dmax) const;
};

// (1+eps)-geometric partition of the multiplier range [min, max]; returns
// per-bucket index lists, smallest multipliers first.
std::vector<std::vector<std::uint32_t>> bucketize_multipliers(const std::vector<double>& mult,
                                                              double eps);

}  // namespace rrho
