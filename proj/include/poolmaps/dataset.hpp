#ifndef POOLMAPS_DATASET_HPP
#define POOLMAPS_DATASET_HPP

#include <cstdint>
#include <string>
#include <vector>

namespace poolmaps {

// One n x n RGB image with a class label. Pixels stay on the raw [0,255]
// scale; rescaling happens downstream in patch normalization. Storage is
// channel-planar (all red, then green, then blue), each plane row-major --
// the same layout as a CIFAR-10 record.
struct ImageSample {
    int n = 0;
    int label = 0;
    std::vector<double> pixels;  // size 3*n*n, index = c*n*n + row*n + col

    double at(int c, int row, int col) const { return pixels[(c * n + row) * n + col]; }
    double& at(int c, int row, int col) { return pixels[(c * n + row) * n + col]; }
};

struct DatasetSplit {
    std::vector<ImageSample> train;
    std::vector<ImageSample> validation;
    std::uint64_t seed = 0;
};

// Reads a CIFAR-10 style binary batch: records of 1 label byte followed by
// 3*n*n pixel bytes (n*n red, n*n green, n*n blue, row-major). Pixel bytes are
// converted to double without rescaling. Throws FormatError on a truncated
// record (naming the byte offset) and DataError on a label byte >= t.
std::vector<ImageSample> load_cifar_batch(const std::string& path, int n = 32, int t = 10);

// Inverse of load_cifar_batch for round-trip tests and fixtures. Every pixel
// must be an integral value in [0,255].
void write_cifar_batch(const std::string& path, const std::vector<ImageSample>& samples);

// Deterministic shuffled split: first floor(fraction*N) samples to train,
// rest to validation.
DatasetSplit split(const std::vector<ImageSample>& samples, double fraction, std::uint64_t seed);

// Two-class images for desk-scale runs: a high-variance texture block of side
// ceil(n/2) sits in the upper-left quadrant for class 0 and the lower-right
// for class 1, over a nearly flat background. The label is decidable from the
// location of the texture, so pooling-map placement affects separability.
// Labels alternate, keeping the balance within one sample. Pixels are
// integral so CIFAR-record round trips are exact.
std::vector<ImageSample> generate_synthetic(int count, int n, std::uint64_t seed);

}  // namespace poolmaps

#endif
