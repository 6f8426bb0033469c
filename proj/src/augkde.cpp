#include "rrho/augkde.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "rrho/errors.hpp"
#include "rrho/rng.hpp"

namespace rrho {

namespace {

constexpr int kMaxGridCells = 200;

std::uint64_t node_stream(std::uint64_t seed, std::size_t bucket, std::size_t node) {
    return rng::combine(rng::combine(seed, 0x6e6f6465ull + bucket), node);
}

}  // namespace

AugmentedKdeTree AugmentedKdeTree::build(int dim, std::span<const double> coords,
                                         std::span<const double> weights,
                                         std::span<const double> multipliers,
                                         const AugKdeConfig& cfg) {
    std::size_t n = weights.size();
    if (n == 0) throw EmptyInput("augmented KDE needs at least one point");
    if (multipliers.size() != n || coords.size() != n * static_cast<std::size_t>(dim)) {
        throw DimensionMismatch("augmented KDE input sizes disagree");
    }
    if (!(cfg.s2 >= 1.0)) throw Error("weight power s2 must be >= 1");

    AugmentedKdeTree tree;
    tree.dim_ = dim;
    tree.cfg_ = cfg;
    tree.reps_t_ = static_cast<long>(std::ceil(16.0 * std::exp2(cfg.s2) / (cfg.eps * cfg.eps)));
    tree.reps_l_ = std::max(1L, static_cast<long>(std::ceil(9.0 * std::log(1.0 / cfg.delta))));
    {
        double m_poly = static_cast<double>(n) * cfg.phi * std::exp2(cfg.kernel.s) / cfg.eps;
        tree.anchor_ = (cfg.eps0 > 0.0 && m_poly >= 1.0) ? cfg.eps0 * cfg.sigma_r / m_poly : 0.0;
    }

    std::vector<std::vector<std::uint32_t>> groups;
    if (cfg.backend == BackendKind::sampling) {
        std::vector<double> mult_copy(multipliers.begin(), multipliers.end());
        groups = bucketize_multipliers(mult_copy, cfg.eps);
    } else {
        groups.emplace_back(n);
        std::iota(groups.back().begin(), groups.back().end(), 0u);
    }

    // accuracy split between the node estimates and the threshold sampling;
    // node failure budget is a union bound over the 2n-1 nodes per bucket
    double node_eps = cfg.eps / 2.0;
    double node_delta = cfg.delta / (4.0 * static_cast<double>(n));

    for (std::size_t bi = 0; bi < groups.size(); ++bi) {
        auto& ids = groups[bi];
        BucketTree bt;
        bt.ids = ids;
        std::sort(bt.ids.begin(), bt.ids.end(), [&](std::uint32_t a, std::uint32_t b) {
            if (weights[a] != weights[b]) return weights[a] < weights[b];
            return a < b;
        });
        std::size_t cnt = bt.ids.size();
        bt.w.resize(cnt);
        bt.mult.resize(cnt);
        bt.coords.resize(cnt * static_cast<std::size_t>(dim));
        for (std::size_t i = 0; i < cnt; ++i) {
            std::uint32_t id = bt.ids[i];
            bt.w[i] = weights[id];
            bt.mult[i] = multipliers[id];
            for (int k = 0; k < dim; ++k) {
                bt.coords[i * static_cast<std::size_t>(dim) + static_cast<std::size_t>(k)] =
                    coords[id * static_cast<std::size_t>(dim) + static_cast<std::size_t>(k)];
            }
        }

        // balanced tree over [0, cnt) by recursive halving of the sorted order
        struct Frame {
            std::uint32_t b, e;
            int slot;
        };
        std::vector<Frame> stack;
        bt.nodes.reserve(2 * cnt);
        bt.nodes.emplace_back();
        stack.push_back({0, static_cast<std::uint32_t>(cnt), 0});
        while (!stack.empty()) {
            Frame f = stack.back();
            stack.pop_back();
            Node& nd = bt.nodes[static_cast<std::size_t>(f.slot)];
            nd.begin = f.b;
            nd.end = f.e;
            nd.wmin = bt.w[f.b];
            nd.wmax = bt.w[f.e - 1];
            std::uint32_t mid = f.b + (f.e - f.b + 1) / 2;
            nd.wmed = bt.w[mid - 1];
            std::size_t cnt_node = f.e - f.b;
            std::vector<double> c(bt.coords.begin() + f.b * static_cast<std::size_t>(dim),
                                  bt.coords.begin() + f.e * static_cast<std::size_t>(dim));
            std::vector<double> mlt(bt.mult.begin() + f.b, bt.mult.begin() + f.e);
            if (cfg.backend == BackendKind::exact) {
                nd.ds = std::make_unique<ExactKdeBackend>(dim, std::move(c), std::move(mlt),
                                                          cfg.kernel);
            } else {
                nd.ds = std::make_unique<SamplingKdeBackend>(
                    dim, std::move(c), std::move(mlt), cfg.kernel, cfg.sigma_r, cfg.phi, node_eps,
                    node_delta, node_stream(cfg.seed, bi, static_cast<std::size_t>(f.slot)));
            }
            if (!nd.ds->exhaustive()) bt.exhaustive = false;
            if (cnt_node > 1) {
                int lslot = static_cast<int>(bt.nodes.size());
                bt.nodes.emplace_back();
                bt.nodes.emplace_back();
                bt.nodes[static_cast<std::size_t>(f.slot)].left = lslot;
                bt.nodes[static_cast<std::size_t>(f.slot)].right = lslot + 1;
                stack.push_back({f.b, mid, lslot});
                stack.push_back({mid, f.e, lslot + 1});
            }
        }
        tree.buckets_.push_back(std::move(bt));
    }
    return tree;
}

std::vector<int> AugmentedKdeTree::canonical_nodes(std::size_t b, double a_star, double lo,
                                                   double hi) const {
    const BucketTree& bt = buckets_[b];
    double cut = std::max(a_star, std::nextafter(lo, std::numeric_limits<double>::infinity()));
    std::size_t first =
        static_cast<std::size_t>(std::lower_bound(bt.w.begin(), bt.w.end(), cut) - bt.w.begin());
    std::size_t last =
        static_cast<std::size_t>(std::upper_bound(bt.w.begin(), bt.w.end(), hi) - bt.w.begin());
    std::vector<int> out;
    if (first >= last) return out;
    std::vector<int> stack{0};
    while (!stack.empty()) {
        int idx = stack.back();
        stack.pop_back();
        const Node& nd = bt.nodes[static_cast<std::size_t>(idx)];
        if (nd.begin >= first && nd.end <= last) {
            out.push_back(idx);
            continue;
        }
        if (nd.end <= first || nd.begin >= last) continue;
        if (nd.left >= 0) {
            stack.push_back(nd.right);
            stack.push_back(nd.left);
        }
    }
    return out;
}

std::vector<std::uint32_t> AugmentedKdeTree::covered_ids(std::size_t b,
                                                         const std::vector<int>& nodes) const {
    const BucketTree& bt = buckets_[b];
    std::vector<std::uint32_t> out;
    for (int idx : nodes) {
        const Node& nd = bt.nodes[static_cast<std::size_t>(idx)];
        for (std::uint32_t i = nd.begin; i < nd.end; ++i) out.push_back(bt.ids[i]);
    }
    return out;
}

struct AugmentedKdeTree::Scratch {
    std::size_t idx0 = 0;            // first leaf with w > beta
    std::vector<double> tw;          // ((w_i - beta)^+)^s2 for i >= idx0 (dense from idx0)
    std::vector<double> suffix;      // exhaustive path: suffix kernel sums
    std::vector<double> node_value;  // sampled path: per-node cache
    std::vector<char> node_known;
    std::vector<double> grid;        // sigma_0 .. sigma_{k+1}
};

double AugmentedKdeTree::grid_pass(const BucketTree& bt, Scratch& sc, std::span<const double> y,
                                   std::uint64_t stream) const {
    PosPow pws2(cfg_.s2);
    double total = 0.0;
    for (std::size_t l = 0; l + 1 < sc.grid.size(); ++l) {
        double wlo = pws2(sc.grid[l]);
        double whi = pws2(sc.grid[l + 1]);
        double width = whi - wlo;
        if (!(width > 0.0)) continue;
        double cell_acc = 0.0;
        rng::Stream gen({stream, static_cast<std::uint64_t>(l)});
        for (long t = 0; t < reps_t_; ++t) {
            double wdraw = wlo + width * gen.next_double();
            // first leaf with ((w - beta)^+)^s2 >= wdraw
            std::size_t pos =
                static_cast<std::size_t>(std::lower_bound(sc.tw.begin() + static_cast<long>(sc.idx0),
                                                          sc.tw.end(), wdraw) -
                                         sc.tw.begin());
            double cover;
            if (bt.exhaustive) {
                cover = sc.suffix[pos];
            } else {
                cover = 0.0;
                // canonical decomposition of the leaf interval [pos, cnt)
                std::vector<int> stack{0};
                while (!stack.empty()) {
                    int idx = stack.back();
                    stack.pop_back();
                    const Node& nd = bt.nodes[static_cast<std::size_t>(idx)];
                    if (nd.begin >= pos) {
                        double& slot = sc.node_value[static_cast<std::size_t>(idx)];
                        if (!sc.node_known[static_cast<std::size_t>(idx)]) {
                            // backend randomness was fixed at build time, so
                            // the node value is a constant of (node, y)
                            slot = nd.ds->query(y, 0);
                            sc.node_known[static_cast<std::size_t>(idx)] = 1;
                        }
                        cover += slot;
                        continue;
                    }
                    if (nd.end <= pos) continue;
                    if (nd.left >= 0) {
                        stack.push_back(nd.right);
                        stack.push_back(nd.left);
                    }
                }
            }
            cell_acc += cover;
        }
        total += width * cell_acc;
    }
    return total / static_cast<double>(reps_t_);
}

double AugmentedKdeTree::query(std::span<const double> y, double beta,
                               std::uint64_t stream) const {
    PosPow pws2(cfg_.s2);
    std::vector<Scratch> scratch(buckets_.size());

    // per-bucket preparation shared by all repetitions
    for (std::size_t b = 0; b < buckets_.size(); ++b) {
        const BucketTree& bt = buckets_[b];
        Scratch& sc = scratch[b];
        const std::size_t cnt = bt.w.size();
        if (bt.w.back() <= beta) {
            sc.grid.clear();  // empty grid marks a zero bucket
            continue;
        }
        sc.idx0 = static_cast<std::size_t>(
            std::upper_bound(bt.w.begin(), bt.w.end(), beta) - bt.w.begin());
        double span = bt.w.back() - beta;
        double a_min = bt.w[sc.idx0] - beta;
        double sigma1 = a_min;
        if (anchor_ > 0.0) sigma1 = std::min(sigma1, anchor_);

        int k = 0;
        if (span > sigma1) {
            k = static_cast<int>(std::ceil(std::log2(span / sigma1)));
            if (k > kMaxGridCells) {
                throw WeightPromiseViolated("weight spread exceeds the grid budget");
            }
        }
        sc.grid.resize(static_cast<std::size_t>(k) + 2);
        sc.grid[0] = 0.0;
        for (int l = 1; l <= k; ++l) sc.grid[static_cast<std::size_t>(l)] = sigma1 * std::exp2(l - 1);
        sc.grid[static_cast<std::size_t>(k) + 1] = span;

        sc.tw.assign(cnt, 0.0);
        for (std::size_t i = sc.idx0; i < cnt; ++i) sc.tw[i] = pws2(bt.w[i] - beta);
        // leaves below idx0 must never match a positive threshold draw
        for (std::size_t i = 0; i < sc.idx0; ++i) sc.tw[i] = -1.0;

        if (bt.exhaustive) {
            sc.suffix.assign(cnt + 1, 0.0);
            for (std::size_t i = cnt; i > sc.idx0; --i) {
                std::span<const double> x{bt.coords.data() + (i - 1) * static_cast<std::size_t>(dim_),
                                          static_cast<std::size_t>(dim_)};
                sc.suffix[i - 1] = sc.suffix[i] + bt.mult[i - 1] * kernel_eval(cfg_.kernel, x, y);
            }
        } else {
            sc.node_value.assign(bt.nodes.size(), 0.0);
            sc.node_known.assign(bt.nodes.size(), 0);
        }
    }

    std::vector<double> reps(static_cast<std::size_t>(reps_l_), 0.0);
    for (long rep = 0; rep < reps_l_; ++rep) {
        double total = 0.0;
        for (std::size_t b = 0; b < buckets_.size(); ++b) {
            if (scratch[b].grid.empty()) continue;
            total += grid_pass(buckets_[b], scratch[b], y,
                               rng::combine(rng::combine(stream, static_cast<std::uint64_t>(rep)),
                                            static_cast<std::uint64_t>(b)));
        }
        reps[static_cast<std::size_t>(rep)] = total;
    }
    std::sort(reps.begin(), reps.end());
    return reps[(reps.size() - 1) / 2];
}

}  // namespace rrho
