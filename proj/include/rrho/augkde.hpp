#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "rrho/kde.hpp"

namespace rrho {

enum class BackendKind { exact, sampling };

struct AugKdeConfig {
    double s2 = 1.0;        // weight power
    SmoothKernel kernel;    // distance kernel
    double eps0 = 0.0;      // kernel floor parameter, reused for the grid anchor
    double sigma_r = 0.0;   // min-distance promise
    double phi = 1.0;       // aspect-ratio bound
    double eps = 0.25;      // multiplicative accuracy
    double delta = 0.1;     // per-query failure budget
    BackendKind backend = BackendKind::exact;
    std::uint64_t seed = 0;
};

// Weight-sorted balanced tree with per-node KDE backends (one tree per
// multiplier bucket on the sampling path). query(y, beta) estimates
//   sum_i mult_i * ((w_i - beta)^+)^s2 * K(x_i, y)
// by threshold importance sampling over a geometric grid of weight cells:
// cell l draws w ~ U[sig_l^s2, sig_{l+1}^s2] and adds
// (sig_{l+1}^s2 - sig_l^s2) times the kernel sum over all points with
// w_i >= beta + w^(1/s2), resolved through O(log n) canonical nodes. The
// per-point inclusion probabilities telescope across cells, making the
// estimator exactly unbiased when the node backends are exact.
class AugmentedKdeTree {
public:
    struct Node {
        std::uint32_t begin = 0, end = 0;  // leaf interval [begin, end)
        double wmin = 0.0, wmax = 0.0, wmed = 0.0;
        int left = -1, right = -1;
        std::unique_ptr<KdeBackend> ds;
    };

    struct BucketTree {
        std::vector<std::uint32_t> ids;  // original indices in leaf (weight) order
        std::vector<double> w;           // nondecreasing leaf weights
        std::vector<double> coords;      // reordered, row-major
        std::vector<double> mult;        // reordered
        std::vector<Node> nodes;         // nodes[0] is the root
        bool exhaustive = true;          // every node backend sums exactly
    };

    static AugmentedKdeTree build(int dim, std::span<const double> coords,
                                  std::span<const double> weights,
                                  std::span<const double> multipliers, const AugKdeConfig& cfg);

    // median of median_count() independent grid estimates
    double query(std::span<const double> y, double beta, std::uint64_t stream) const;

    long grid_repetitions() const { return reps_t_; }   // T
    long median_count() const { return reps_l_; }       // L
    double grid_anchor() const { return anchor_; }      // default sigma_1 before lowering

    std::size_t bucket_count() const { return buckets_.size(); }
    const BucketTree& bucket_tree(std::size_t b) const { return buckets_[b]; }

    // Minimal node set whose leaf intervals partition
    // {i : w_i in (lo, hi] and w_i >= a_star}; node indices into bucket_tree(b).nodes.
    std::vector<int> canonical_nodes(std::size_t b, double a_star, double lo, double hi) const;
    std::vector<std::uint32_t> covered_ids(std::size_t b, const std::vector<int>& nodes) const;

private:
    int dim_ = 0;
    AugKdeConfig cfg_;
    long reps_t_ = 1, reps_l_ = 1;
    double anchor_ = 0.0;
    std::vector<BucketTree> buckets_;

    struct Scratch;
    double grid_pass(const BucketTree& bt, Scratch& sc, std::span<const double> y,
                     std::uint64_t stream) const;
};

}  // namespace rrho
