#include "poolmaps/codebook.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <unordered_set>

#include "poolmaps/common.hpp"

namespace poolmaps {

namespace {

double sq_dist(const double* a, const double* b, int d) {
    double acc = 0.0;
    for (int i = 0; i < d; ++i) {
        double diff = a[i] - b[i];
        acc += diff * diff;
    }
    return acc;
}

struct VecHash {
    std::size_t operator()(const std::vector<double>& v) const {
        return fnv1a(v.data(), v.size() * sizeof(double));
    }
};

}  // namespace

Codebook train_kmeans(const std::vector<Patch>& patches, int k, int iters, std::uint64_t seed,
                      KMeansStats* stats) {
    if (k < 1) throw ArgumentError("train_kmeans: k must be >= 1");
    if (iters < 1) throw ArgumentError("train_kmeans: iters must be >= 1");
    if (static_cast<int>(patches.size()) < k)
        throw ArgumentError("train_kmeans: fewer patches (" + std::to_string(patches.size()) +
                            ") than centroids (" + std::to_string(k) + ")");
    const int d = static_cast<int>(patches.front().size());
    const std::size_t N = patches.size();

    // Init: walk a shuffled index order, taking each patch whose value has not
    // been taken yet, until k distinct centroids are collected.
    std::vector<std::size_t> order(N);
    std::iota(order.begin(), order.end(), 0);
    std::mt19937_64 rng(substream(seed, SeedRole::kmeans_init));
    std::shuffle(order.begin(), order.end(), rng);

    Codebook cb;
    cb.k = k;
    cb.d = d;
    cb.centroids.reserve(static_cast<std::size_t>(k) * d);
    {
        std::unordered_set<std::vector<double>, VecHash> taken;
        for (std::size_t idx : order) {
            if (static_cast<int>(taken.size()) == k) break;
            if (static_cast<int>(patches[idx].size()) != d)
                throw ArgumentError("train_kmeans: inconsistent patch dimensions");
            if (taken.insert(patches[idx]).second)
                cb.centroids.insert(cb.centroids.end(), patches[idx].begin(), patches[idx].end());
        }
        if (static_cast<int>(taken.size()) < k)
            throw ArgumentError("train_kmeans: fewer than k distinct patches");
    }

    std::vector<int> assign(N, 0);
    std::vector<double> dist(N, 0.0);
    double prev_objective = std::numeric_limits<double>::infinity();
    if (stats) {
        stats->objective.clear();
        stats->reseeded_clusters = 0;
    }

    for (int it = 0; it < iters; ++it) {
        // Assignment, parallel across patches; ties go to the lowest index.
        parallel_for(N, [&](std::size_t i) {
            const double* x = patches[i].data();
            int best = 0;
            double best_d = sq_dist(x, cb.centroid(0), d);
            for (int j = 1; j < k; ++j) {
                double dj = sq_dist(x, cb.centroid(j), d);
                if (dj < best_d) {
                    best_d = dj;
                    best = j;
                }
            }
            assign[i] = best;
            dist[i] = best_d;
        });

        double objective = 0.0;
        for (std::size_t i = 0; i < N; ++i) objective += dist[i];
        if (objective > prev_objective * (1.0 + 1e-12) + 1e-12)
            throw StateError("train_kmeans: objective increased");
        prev_objective = objective;
        if (stats) stats->objective.push_back(objective);

        std::vector<std::size_t> counts(k, 0);
        for (std::size_t i = 0; i < N; ++i) counts[assign[i]]++;

        // Reseed empty clusters from the patch farthest from its centroid.
        for (int j = 0; j < k; ++j) {
            if (counts[j] != 0) continue;
            std::size_t far = 0;
            double far_d = -1.0;
            for (std::size_t i = 0; i < N; ++i) {
                if (counts[assign[i]] <= 1) continue;  // do not empty another cluster
                if (dist[i] > far_d) {
                    far_d = dist[i];
                    far = i;
                }
            }
            if (far_d < 0.0) continue;
            counts[assign[far]]--;
            assign[far] = j;
            counts[j] = 1;
            dist[far] = 0.0;
            std::copy(patches[far].begin(), patches[far].end(),
                      cb.centroids.begin() + static_cast<std::size_t>(j) * d);
            if (stats) stats->reseeded_clusters++;
        }

        // Update step: centroid = mean of its members, accumulated in patch
        // index order.
        std::vector<double> sums(static_cast<std::size_t>(k) * d, 0.0);
        for (std::size_t i = 0; i < N; ++i) {
            double* s = &sums[static_cast<std::size_t>(assign[i]) * d];
            const double* x = patches[i].data();
            for (int c = 0; c < d; ++c) s[c] += x[c];
        }
        for (int j = 0; j < k; ++j) {
            if (counts[j] == 0) continue;
            double* cj = &cb.centroids[static_cast<std::size_t>(j) * d];
            const double* s = &sums[static_cast<std::size_t>(j) * d];
            for (int c = 0; c < d; ++c) cj[c] = s[c] / double(counts[j]);
        }
    }
    return cb;
}

std::vector<double> triangle_encode(const Codebook& cb, const Patch& patch) {
    const int k = cb.k;
    std::vector<double> z(k);
    double mu = 0.0;
    for (int j = 0; j < k; ++j) {
        z[j] = std::sqrt(sq_dist(patch.data(), cb.centroid(j), cb.d));
        mu += z[j];
    }
    mu /= double(k);
    for (int j = 0; j < k; ++j) z[j] = std::max(0.0, mu - z[j]);
    return z;
}

EncodedGrid encode_image(const Codebook& cb, const ImageSample& image, int w, int stride,
                         double eps_norm) {
    PatchGrid grid = extract_patches(image, w, stride);
    EncodedGrid enc;
    enc.P = grid.P;
    enc.k = cb.k;
    enc.g.resize(static_cast<std::size_t>(grid.P) * grid.P * cb.k);
    for (int m = 0; m < grid.P; ++m) {
        for (int n = 0; n < grid.P; ++n) {
            Patch p = apply_whitening(cb.whitening, normalize_patch(grid.at(m, n), eps_norm));
            std::vector<double> code = triangle_encode(cb, p);
            std::copy(code.begin(), code.end(),
                      enc.g.begin() + (static_cast<std::size_t>(m) * grid.P + n) * cb.k);
        }
    }
    return enc;
}

}  // namespace poolmaps
