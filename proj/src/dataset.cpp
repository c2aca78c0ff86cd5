#include "poolmaps/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <random>

#include "poolmaps/common.hpp"

namespace poolmaps {

std::vector<ImageSample> load_cifar_batch(const std::string& path, int n, int t) {
    if (n < 1) throw ArgumentError("load_cifar_batch: image side must be >= 1");
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FormatError("load_cifar_batch: cannot open " + path);

    const std::size_t record = 1 + 3 * static_cast<std::size_t>(n) * n;
    in.seekg(0, std::ios::end);
    const std::size_t length = static_cast<std::size_t>(in.tellg());
    in.seekg(0, std::ios::beg);
    if (length % record != 0) {
        std::size_t complete = length / record;
        throw FormatError("load_cifar_batch: truncated record at byte offset " +
                          std::to_string(complete * record) + " in " + path +
                          " (file length " + std::to_string(length) +
                          " is not a multiple of " + std::to_string(record) + ")");
    }

    std::vector<ImageSample> samples;
    samples.reserve(length / record);
    std::vector<unsigned char> buf(record);
    for (std::size_t r = 0; r < length / record; ++r) {
        in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(record));
        if (!in) throw FormatError("load_cifar_batch: short read at byte offset " +
                                   std::to_string(r * record));
        if (buf[0] >= t) {
            throw DataError("load_cifar_batch: record " + std::to_string(r) + " has label " +
                            std::to_string(int(buf[0])) + " >= " + std::to_string(t));
        }
        ImageSample s;
        s.n = n;
        s.label = buf[0];
        s.pixels.resize(record - 1);
        for (std::size_t i = 0; i + 1 < record; ++i) s.pixels[i] = double(buf[i + 1]);
        samples.push_back(std::move(s));
    }
    return samples;
}

void write_cifar_batch(const std::string& path, const std::vector<ImageSample>& samples) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw FormatError("write_cifar_batch: cannot open " + path);
    for (const auto& s : samples) {
        if (s.label < 0 || s.label > 255)
            throw ArgumentError("write_cifar_batch: label does not fit in a byte");
        out.put(static_cast<char>(s.label));
        for (double v : s.pixels) {
            double r = std::round(v);
            if (r != v || v < 0.0 || v > 255.0)
                throw ArgumentError("write_cifar_batch: pixel value " + format_double(v) +
                                    " is not an integral byte");
            out.put(static_cast<char>(static_cast<unsigned char>(r)));
        }
    }
    if (!out) throw FormatError("write_cifar_batch: write failed for " + path);
}

DatasetSplit split(const std::vector<ImageSample>& samples, double fraction, std::uint64_t seed) {
    if (samples.empty()) throw ArgumentError("split: empty sample list");
    if (samples.size() < 2) throw ArgumentError("split: need at least 2 samples");
    if (!(fraction > 0.0 && fraction < 1.0))
        throw ArgumentError("split: fraction must be in (0,1)");

    std::vector<std::size_t> idx(samples.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::mt19937_64 rng(substream(seed, SeedRole::split));
    std::shuffle(idx.begin(), idx.end(), rng);

    const std::size_t n_train = static_cast<std::size_t>(fraction * double(samples.size()));
    DatasetSplit out;
    out.seed = seed;
    out.train.reserve(n_train);
    out.validation.reserve(samples.size() - n_train);
    for (std::size_t i = 0; i < idx.size(); ++i) {
        (i < n_train ? out.train : out.validation).push_back(samples[idx[i]]);
    }
    return out;
}

std::vector<ImageSample> generate_synthetic(int count, int n, std::uint64_t seed) {
    if (count < 1) throw ArgumentError("generate_synthetic: count must be >= 1");
    if (n < 4) throw ArgumentError("generate_synthetic: image side " + std::to_string(n) +
                                   " is smaller than the texture block needs");

    const int block = (n + 1) / 2;
    std::mt19937_64 rng(substream(seed, SeedRole::synthetic));
    std::uniform_int_distribution<int> texture(0, 255);
    std::uniform_int_distribution<int> base(80, 175);
    std::uniform_int_distribution<int> jitter(-4, 4);

    std::vector<ImageSample> samples;
    samples.reserve(count);
    for (int i = 0; i < count; ++i) {
        ImageSample s;
        s.n = n;
        s.label = i % 2;
        s.pixels.assign(3 * static_cast<std::size_t>(n) * n, 0.0);
        const int bg = base(rng);
        const int row0 = s.label == 0 ? 0 : n - block;
        const int col0 = row0;
        for (int c = 0; c < 3; ++c) {
            for (int r = 0; r < n; ++r) {
                for (int col = 0; col < n; ++col) {
                    bool in_block = r >= row0 && r < row0 + block && col >= col0 && col < col0 + block;
                    int v = in_block ? texture(rng) : std::clamp(bg + jitter(rng), 0, 255);
                    s.at(c, r, col) = double(v);
                }
            }
        }
        samples.push_back(std::move(s));
    }
    return samples;
}

}  // namespace poolmaps
