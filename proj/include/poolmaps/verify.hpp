#ifndef POOLMAPS_VERIFY_HPP
#define POOLMAPS_VERIFY_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "poolmaps/classifier.hpp"
#include "poolmaps/pooling.hpp"

namespace poolmaps {

// Independent oracles for the pooling forward pass and the pool-weight
// gradient chain. These deliberately re-derive everything by brute force or
// finite differences and share no code with the implementations they check.

// Loss of the full chain pool_forward -> apply_norm -> classifier -> MSE for
// the given maps; used by the finite-difference oracle.
double pipeline_loss(const PoolMapSet& maps, const EncodedGrid& g, const NormStats& stats,
                     const ClassifierState& classifier, const std::vector<double>& target);

// Central differences (J(W + step e) - J(W - step e)) / (2 step) for every
// (pool, m, n); returns a p x P x P array matching PoolMapSet layout.
std::vector<double> fd_pool_gradient(const PoolMapSet& maps, const EncodedGrid& g,
                                     const NormStats& stats, const ClassifierState& classifier,
                                     const std::vector<double>& target, double step = 1e-6);

// Naive quadruple loop over (i, c, m, n); must match pool_forward within
// floating tolerance.
PooledVec brute_pool(const PoolMapSet& maps, const EncodedGrid& g);

// True iff pool_forward under init_quadrant_maps equals per-quadrant channel
// means computed directly, within tol.
bool check_quadrant_equivalence(int P, const EncodedGrid& g, double tol = 1e-12);

// |a-b| / max(|a|, |b|, 1e-12)
double rel_error(double a, double b);

struct BlockError {
    std::string name;
    double max_rel_error = 0.0;
};

struct GradCheckReport {
    double max_rel_error = 0.0;
    int worst_pool = -1, worst_m = -1, worst_n = -1;  // coordinate of the worst W entry
    std::vector<BlockError> blocks;                   // v1, b1, v2, b2, delta0, W

    std::string table() const;
    std::string summary_line(double threshold) const;
    bool passed(double threshold) const { return max_rel_error <= threshold; }
};

struct GradCheckDims {
    int P = 4;
    int k = 2;
    int p = 4;
    int hidden = 3;
    int t = 3;
    double step = 1e-6;
    // Test hook: scales the analytic pool update so the check must fail.
    double corrupt_update = 1.0;
};

// Builds a random instance (grid, stats, classifier, target) at the given
// dimensions and compares every analytic gradient block against central
// finite differences.
GradCheckReport run_gradcheck(const GradCheckDims& dims, std::uint64_t seed);

}  // namespace poolmaps

#endif
