#ifndef POOLMAPS_CODEBOOK_HPP
#define POOLMAPS_CODEBOOK_HPP

#include <cstdint>
#include <vector>

#include "poolmaps/preprocess.hpp"

namespace poolmaps {

struct Codebook {
    int k = 0;
    int d = 0;
    std::vector<double> centroids;  // k x d, row-major
    WhiteningTransform whitening;

    const double* centroid(int j) const { return &centroids[static_cast<std::size_t>(j) * d]; }
};

// P x P x k grid of triangle codes; entry (m,n,c) at index (m*P + n)*k + c so
// the k codes of one cell are contiguous.
struct EncodedGrid {
    int P = 0;
    int k = 0;
    std::vector<double> g;

    double at(int m, int n, int c) const {
        return g[(static_cast<std::size_t>(m) * P + n) * k + c];
    }
    const double* cell(int m, int n) const {
        return &g[(static_cast<std::size_t>(m) * P + n) * k];
    }
};

// Per-iteration diagnostics; the objective is the sum of squared distances of
// every patch to its assigned centroid, measured right after the assignment
// step of that iteration.
struct KMeansStats {
    std::vector<double> objective;  // one entry per iteration
    int reseeded_clusters = 0;
};

// Lloyd iterations. Initial centroids are k pairwise-distinct patch values
// drawn uniformly without replacement; clusters that lose all members are
// reseeded from the patch currently farthest from its centroid.
Codebook train_kmeans(const std::vector<Patch>& patches, int k, int iters, std::uint64_t seed,
                      KMeansStats* stats = nullptr);

// z_j = ||patch - centroid_j||, mu = mean(z); output_j = max(0, mu - z_j).
std::vector<double> triangle_encode(const Codebook& cb, const Patch& patch);

// extract_patches -> normalize_patch -> apply_whitening -> triangle_encode
// at every grid cell.
EncodedGrid encode_image(const Codebook& cb, const ImageSample& image, int w, int stride,
                         double eps_norm);

}  // namespace poolmaps

#endif
