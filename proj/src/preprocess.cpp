#include "poolmaps/preprocess.hpp"

#include <Eigen/Dense>
#include <cmath>

#include "poolmaps/common.hpp"

namespace poolmaps {

int patch_grid_side(int n, int w, int stride) {
    if (w > n) throw ArgumentError("extract_patches: patch size w exceeds image side n");
    if (stride < 1) throw ArgumentError("extract_patches: stride must be >= 1");
    return (n - w) / stride + 1;
}

PatchGrid extract_patches(const ImageSample& image, int w, int stride) {
    const int n = image.n;
    const int P = patch_grid_side(n, w, stride);
    PatchGrid grid;
    grid.P = P;
    grid.patches.resize(static_cast<std::size_t>(P) * P);
    for (int m = 0; m < P; ++m) {
        for (int gn = 0; gn < P; ++gn) {
            Patch& p = grid.patches[static_cast<std::size_t>(m) * P + gn];
            p.resize(3 * static_cast<std::size_t>(w) * w);
            const int r0 = m * stride;
            const int c0 = gn * stride;
            std::size_t i = 0;
            for (int c = 0; c < 3; ++c)
                for (int r = 0; r < w; ++r)
                    for (int col = 0; col < w; ++col) p[i++] = image.at(c, r0 + r, c0 + col);
        }
    }
    return grid;
}

Patch normalize_patch(const Patch& patch, double eps_norm) {
    if (eps_norm < 0.0) throw ArgumentError("normalize_patch: eps_norm must be >= 0");
    const std::size_t d = patch.size();
    double mean = 0.0;
    for (double v : patch) mean += v;
    mean /= double(d);
    double var = 0.0;
    for (double v : patch) var += (v - mean) * (v - mean);
    var /= double(d);
    const double denom = std::sqrt(var + eps_norm);
    Patch out(d);
    for (std::size_t i = 0; i < d; ++i) out[i] = denom > 0.0 ? (patch[i] - mean) / denom : 0.0;
    return out;
}

WhiteningTransform fit_whitening(const std::vector<Patch>& patches, double eps_zca) {
    if (patches.size() < 2) throw ArgumentError("fit_whitening: need at least 2 patches");
    if (eps_zca < 0.0) throw ArgumentError("fit_whitening: eps_zca must be >= 0");
    const int d = static_cast<int>(patches.front().size());
    const std::size_t N = patches.size();

    WhiteningTransform t;
    t.d = d;
    t.epsilon = eps_zca;
    t.mean.assign(d, 0.0);
    for (const auto& p : patches) {
        if (static_cast<int>(p.size()) != d)
            throw ArgumentError("fit_whitening: inconsistent patch dimensions");
        for (int i = 0; i < d; ++i) t.mean[i] += p[i];
    }
    for (int i = 0; i < d; ++i) t.mean[i] /= double(N);

    Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(d, d);
    Eigen::VectorXd centered(d);
    for (const auto& p : patches) {
        for (int i = 0; i < d; ++i) centered[i] = p[i] - t.mean[i];
        cov.selfadjointView<Eigen::Lower>().rankUpdate(centered);
    }
    cov = cov.selfadjointView<Eigen::Lower>();
    cov /= double(N);

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
    Eigen::VectorXd lam = eig.eigenvalues().cwiseMax(0.0);
    Eigen::VectorXd scale = (lam.array() + eps_zca).rsqrt();
    Eigen::MatrixXd M =
        eig.eigenvectors() * scale.asDiagonal() * eig.eigenvectors().transpose();
    M = 0.5 * (M + M.transpose().eval());  // symmetric by construction, up to rounding

    t.matrix.resize(static_cast<std::size_t>(d) * d);
    for (int r = 0; r < d; ++r)
        for (int c = 0; c < d; ++c) t.matrix[static_cast<std::size_t>(r) * d + c] = M(r, c);
    return t;
}

Patch apply_whitening(const WhiteningTransform& t, const Patch& patch) {
    if (static_cast<int>(patch.size()) != t.d)
        throw ArgumentError("apply_whitening: dimension mismatch");
    Patch out(t.d, 0.0);
    std::vector<double> centered(t.d);
    for (int i = 0; i < t.d; ++i) centered[i] = patch[i] - t.mean[i];
    for (int r = 0; r < t.d; ++r) {
        const double* row = &t.matrix[static_cast<std::size_t>(r) * t.d];
        double acc = 0.0;
        for (int c = 0; c < t.d; ++c) acc += row[c] * centered[c];
        out[r] = acc;
    }
    return out;
}

}  // namespace poolmaps
