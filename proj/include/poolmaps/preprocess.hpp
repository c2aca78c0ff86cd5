#ifndef POOLMAPS_PREPROCESS_HPP
#define POOLMAPS_PREPROCESS_HPP

#include <vector>

#include "poolmaps/dataset.hpp"

namespace poolmaps {

// A flattened w x w x 3 pixel window: all red rows, then green, then blue
// (index = c*w*w + row*w + col), matching the CIFAR record layout.
using Patch = std::vector<double>;

// Dense patch grid. Grid cell (m,n) holds the patch whose top-left pixel is
// (m*stride, n*stride); cells are stored row-major.
struct PatchGrid {
    int P = 0;
    std::vector<Patch> patches;  // size P*P, index = m*P + n

    const Patch& at(int m, int n) const { return patches[static_cast<std::size_t>(m) * P + n]; }
};

// ZCA transform U (L + eps I)^(-1/2) U^T fitted to a patch population,
// together with the population mean it subtracts.
struct WhiteningTransform {
    int d = 0;
    std::vector<double> mean;    // size d
    std::vector<double> matrix;  // size d*d, row-major, symmetric
    double epsilon = 0.0;
};

int patch_grid_side(int n, int w, int stride);

PatchGrid extract_patches(const ImageSample& image, int w, int stride);

// Per-patch brightness/contrast normalization:
// (x - mean(x)) / sqrt(var(x) + eps_norm), variance with 1/d normalization.
Patch normalize_patch(const Patch& patch, double eps_norm);

// Fits the ZCA transform on the sample covariance (1/N normalization) of the
// given patches. Eigenvalues are clamped at zero before the eps_zca
// regularizer is added.
WhiteningTransform fit_whitening(const std::vector<Patch>& patches, double eps_zca);

// matrix * (patch - mean)
Patch apply_whitening(const WhiteningTransform& t, const Patch& patch);

}  // namespace poolmaps

#endif
