#ifndef POOLMAPS_POOLING_HPP
#define POOLMAPS_POOLING_HPP

#include <cstdint>
#include <vector>

#include "poolmaps/codebook.hpp"

namespace poolmaps {

// p trainable P x P weight maps. One matrix per pool, shared across all k
// codeword channels. Weights are unconstrained in sign.
struct PoolMapSet {
    int p = 0;
    int P = 0;
    std::vector<double> weights;  // p x P x P, index = (i*P + m)*P + n

    double at(int i, int m, int n) const {
        return weights[(static_cast<std::size_t>(i) * P + m) * P + n];
    }
    double& at(int i, int m, int n) {
        return weights[(static_cast<std::size_t>(i) * P + m) * P + n];
    }
    const double* map(int i) const { return &weights[static_cast<std::size_t>(i) * P * P]; }
};

// Pooled vectors are flat (p*k)-vectors in pool-major order:
// index (i,c) = i*k + c for pool i, codeword c.
using PooledVec = std::vector<double>;

inline std::size_t pooled_index(int i, int c, int k) {
    return static_cast<std::size_t>(i) * k + c;
}

// Post-pooling normalization statistics. Once frozen the values never change;
// apply_norm refuses unfrozen stats and fitting refuses frozen ones.
struct NormStats {
    std::vector<double> mu;
    std::vector<double> sigma;
    bool frozen = false;

    void fit(const std::vector<PooledVec>& pooled, double sigma_floor);
};

std::uint64_t checksum(const NormStats& stats);
std::uint64_t checksum(const PoolMapSet& maps);

// Four maps replicating quadrant average pooling: rows/cols split at
// ceil(P/2) (the top-left gets the larger half when P is odd), weight
// 1/(quadrant area) inside the hot zone and zero elsewhere.
// Map order: top-left, top-right, bottom-left, bottom-right.
PoolMapSet init_quadrant_maps(int P);

// h[(i,c)] = sum_{m,n} W^i_{m,n} * g_{m,n,c}
PooledVec pool_forward(const PoolMapSet& maps, const EncodedGrid& g);

NormStats fit_norm_stats(const std::vector<PooledVec>& pooled, double sigma_floor);

// Elementwise (h - mu) / sigma.
PooledVec apply_norm(const NormStats& stats, const PooledVec& h);

// Gradient update, averaged over the mini-batch; every codeword channel
// contributes as a sum:
//   W^i_{m,n} += eta * (1/B) * sum_batch sum_c delta0[(i,c)] * g_{m,n,c} / sigma[(i,c)]
// delta0 is the negative loss gradient at the normalized pooled features, so
// adding the update descends the loss.
struct PoolBatchItem {
    const EncodedGrid* grid;
    const PooledVec* delta0;  // length p*k
};

void pool_update(PoolMapSet& maps, const std::vector<PoolBatchItem>& batch,
                 const NormStats& stats, double eta);

}  // namespace poolmaps

#endif
