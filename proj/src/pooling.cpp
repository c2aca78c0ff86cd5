#include "poolmaps/pooling.hpp"

#include <cmath>

#include "poolmaps/common.hpp"

namespace poolmaps {

void NormStats::fit(const std::vector<PooledVec>& pooled, double sigma_floor) {
    if (frozen) throw StateError("NormStats::fit: statistics are frozen");
    if (pooled.size() < 2) throw ArgumentError("fit_norm_stats: need at least 2 vectors");
    if (sigma_floor <= 0.0) throw ArgumentError("fit_norm_stats: sigma_floor must be > 0");
    const std::size_t len = pooled.front().size();
    const double N = double(pooled.size());

    mu.assign(len, 0.0);
    sigma.assign(len, 0.0);
    for (const auto& v : pooled) {
        if (v.size() != len) throw ArgumentError("fit_norm_stats: inconsistent vector lengths");
        for (std::size_t j = 0; j < len; ++j) mu[j] += v[j];
    }
    for (std::size_t j = 0; j < len; ++j) mu[j] /= N;
    for (const auto& v : pooled)
        for (std::size_t j = 0; j < len; ++j) sigma[j] += (v[j] - mu[j]) * (v[j] - mu[j]);
    for (std::size_t j = 0; j < len; ++j) sigma[j] = std::max(std::sqrt(sigma[j] / N), sigma_floor);
    frozen = true;
}

NormStats fit_norm_stats(const std::vector<PooledVec>& pooled, double sigma_floor) {
    NormStats stats;
    stats.fit(pooled, sigma_floor);
    return stats;
}

std::uint64_t checksum(const NormStats& stats) {
    std::uint64_t h = checksum_doubles(stats.mu);
    h = checksum_doubles(stats.sigma, h);
    unsigned char f = stats.frozen ? 1 : 0;
    return fnv1a(&f, 1, h);
}

std::uint64_t checksum(const PoolMapSet& maps) { return checksum_doubles(maps.weights); }

PoolMapSet init_quadrant_maps(int P) {
    if (P < 2) throw ArgumentError("init_quadrant_maps: P must be >= 2");
    const int s = (P + 1) / 2;
    PoolMapSet maps;
    maps.p = 4;
    maps.P = P;
    maps.weights.assign(4 * static_cast<std::size_t>(P) * P, 0.0);
    const int row0[4] = {0, 0, s, s};
    const int col0[4] = {0, s, 0, s};
    const int row1[4] = {s, s, P, P};
    const int col1[4] = {s, P, s, P};
    for (int i = 0; i < 4; ++i) {
        const double area = double(row1[i] - row0[i]) * double(col1[i] - col0[i]);
        for (int m = row0[i]; m < row1[i]; ++m)
            for (int n = col0[i]; n < col1[i]; ++n) maps.at(i, m, n) = 1.0 / area;
    }
    return maps;
}

PooledVec pool_forward(const PoolMapSet& maps, const EncodedGrid& g) {
    if (maps.P != g.P) throw ArgumentError("pool_forward: map side does not match grid side");
    const int P = maps.P;
    const int k = g.k;
    PooledVec h(static_cast<std::size_t>(maps.p) * k, 0.0);
    for (int i = 0; i < maps.p; ++i) {
        double* hi = &h[pooled_index(i, 0, k)];
        for (int m = 0; m < P; ++m) {
            for (int n = 0; n < P; ++n) {
                const double w = maps.at(i, m, n);
                if (w == 0.0) continue;
                const double* cell = g.cell(m, n);
                for (int c = 0; c < k; ++c) hi[c] += w * cell[c];
            }
        }
    }
    return h;
}

PooledVec apply_norm(const NormStats& stats, const PooledVec& h) {
    if (!stats.frozen) throw StateError("apply_norm: statistics are not frozen");
    if (h.size() != stats.mu.size()) throw ArgumentError("apply_norm: length mismatch");
    PooledVec out(h.size());
    for (std::size_t j = 0; j < h.size(); ++j) out[j] = (h[j] - stats.mu[j]) / stats.sigma[j];
    return out;
}

void pool_update(PoolMapSet& maps, const std::vector<PoolBatchItem>& batch,
                 const NormStats& stats, double eta) {
    if (batch.empty()) throw ArgumentError("pool_update: empty batch");
    if (!(eta > 0.0)) throw ArgumentError("pool_update: eta must be > 0");
    const int P = maps.P;
    const int p = maps.p;
    if (stats.mu.size() % static_cast<std::size_t>(p) != 0)
        throw ArgumentError("pool_update: stats length is not a multiple of the pool count");
    const int k = static_cast<int>(stats.mu.size()) / p;

    std::vector<double> acc(maps.weights.size(), 0.0);
    std::vector<double> coef(k);
    for (const auto& item : batch) {
        if (item.grid->P != P || item.grid->k != k)
            throw ArgumentError("pool_update: grid dimensions do not match maps/stats");
        if (item.delta0->size() != stats.mu.size())
            throw ArgumentError("pool_update: delta0 length does not match p*k");
        for (int i = 0; i < p; ++i) {
            for (int c = 0; c < k; ++c) {
                std::size_t j = pooled_index(i, c, k);
                coef[c] = (*item.delta0)[j] / stats.sigma[j];
            }
            double* ai = &acc[static_cast<std::size_t>(i) * P * P];
            for (int m = 0; m < P; ++m) {
                for (int n = 0; n < P; ++n) {
                    const double* cell = item.grid->cell(m, n);
                    double s = 0.0;
                    for (int c = 0; c < k; ++c) s += coef[c] * cell[c];
                    ai[static_cast<std::size_t>(m) * P + n] += s;
                }
            }
        }
    }
    const double scale = eta / double(batch.size());
    for (std::size_t j = 0; j < maps.weights.size(); ++j) maps.weights[j] += scale * acc[j];
}

}  // namespace poolmaps
