#ifndef POOLMAPS_COMMON_HPP
#define POOLMAPS_COMMON_HPP

#include <cstddef>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace poolmaps {

// Error taxonomy used across modules. Argument errors mean the caller broke a
// precondition; format/data errors come from external inputs; state errors
// from calling into an object in the wrong lifecycle state (e.g. refitting
// frozen normalization statistics).
struct ArgumentError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};
struct FormatError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct DataError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct StateError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// splitmix64 step; used to derive independent seed streams from one master
// seed without the streams overlapping.
std::uint64_t splitmix64(std::uint64_t x);

// Named sub-streams of the master seed. Every randomized stage draws from its
// own stream so that changing one stage never perturbs another.
enum class SeedRole : std::uint64_t {
    split = 1,
    synthetic = 2,
    codebook_patches = 3,
    kmeans_init = 4,
    classifier_init = 5,
    phase1_batches = 6,
    phase2_batches = 7,
};

std::uint64_t substream(std::uint64_t seed, SeedRole role);

// FNV-1a over raw bytes; used for freeze-contract checksums.
std::uint64_t fnv1a(const void* data, std::size_t bytes, std::uint64_t h = 0xcbf29ce484222325ull);
std::uint64_t checksum_doubles(const std::vector<double>& v, std::uint64_t h = 0xcbf29ce484222325ull);

// Process-wide worker cap set by the CLI (--threads). 0 means "hardware".
void set_worker_threads(int n);
int worker_threads();

// Runs fn(i) for i in [0, count). Work is split into contiguous index blocks;
// callers that need deterministic output write to per-index slots.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& fn);

std::string format_double(double v);  // max round-trip precision

}  // namespace poolmaps

#endif
