#ifndef POOLMAPS_TRAINING_HPP
#define POOLMAPS_TRAINING_HPP

#include <cstdint>
#include <list>
#include <memory>
#include <mutex>
#include <string>
#include <unordered_map>
#include <vector>

#include "poolmaps/classifier.hpp"
#include "poolmaps/codebook.hpp"
#include "poolmaps/dataset.hpp"
#include "poolmaps/pooling.hpp"

namespace poolmaps {

struct TrainConfig {
    int n = 32;           // image side
    int w = 6;            // patch side
    int stride = 1;       // dense extraction stride
    int k = 400;          // codewords
    int p = 4;            // pool maps
    int hidden = 128;     // hidden neurons
    int t = 10;           // classes
    int batch_size = 10;  // images per mini-batch
    double eta_pool = 5e-5;
    double eta_net = 1e-2;
    std::uint64_t phase1_examples = 250000;
    std::uint64_t phase2_examples = 15000;
    std::uint64_t val_check_interval = 500;
    int trials = 5;
    std::uint64_t seed = 1;
    double eps_norm = 10.0;
    double eps_zca = 0.1;
    double sigma_floor = 1e-8;
    int kmeans_iters = 25;
    std::uint64_t codebook_patches = 100000;
    std::string activation = "sigmoid";  // sigmoid | tanh
    double train_fraction = 0.8;
    std::uint64_t norm_fit_images = 0;  // 0 = one full pass over the train set
    std::uint64_t cache_images = 0;     // encoded-grid cache capacity, in images
    std::string data_source = "cifar";  // cifar | synthetic
    int synthetic_count = 200;          // images generated for the synthetic source

    Activation activation_kind() const;
    int grid_side() const;  // P for these dimensions
};

struct HistoryRow {
    std::uint64_t examples_seen = 0;  // cumulative across phases
    int phase = 0;
    double loss = 0.0;
    double val_accuracy = 0.0;
};

struct TrainReport {
    double baseline_val_acc = 0.0;
    double best_post_pool_acc = 0.0;
    std::vector<HistoryRow> history;
    PoolMapSet best_maps;
};

// Bounded cache of encoded grids keyed by a caller-chosen image id. Recomputes
// on miss via encode_image; purely an evaluation-count optimization, results
// are identical with any capacity.
class EncodeCache {
public:
    explicit EncodeCache(std::size_t capacity) : capacity_(capacity) {}

    std::shared_ptr<const EncodedGrid> get(std::uint64_t key, const Codebook& cb,
                                           const ImageSample& image, const TrainConfig& cfg);

private:
    std::size_t capacity_;
    std::mutex mu_;
    std::list<std::uint64_t> lru_;
    struct Entry {
        std::shared_ptr<const EncodedGrid> grid;
        std::list<std::uint64_t>::iterator pos;
    };
    std::unordered_map<std::uint64_t, Entry> entries_;
};

// Stable cache keys: part 0 = train, 1 = validation.
std::uint64_t sample_key(int part, std::size_t index);

struct Phase1Result {
    ClassifierState classifier;
    NormStats stats;
    double baseline_val_acc = 0.0;
    double mean_loss = 0.0;  // mean per-example loss over the phase
};

// Phase 1: fit and freeze normalization stats with the initial maps, then
// train the classifier on phase1_examples samples drawn with replacement, in
// batches of batch_size. Maps stay fixed throughout.
Phase1Result run_phase1(const TrainConfig& cfg, const DatasetSplit& split, const Codebook& cb,
                        const PoolMapSet& maps, EncodeCache* cache = nullptr);

// Phase 2: classifier and stats frozen, maps learn from delta0 sensitivities.
// Validation runs with the initial maps before any update and after every
// val_check_interval examples; the report keeps the best accuracy and the
// maps that achieved it. History rows carry cumulative examples_seen
// (phase1_examples + phase-2 progress). Throws StateError if the classifier
// or stats change during the phase.
TrainReport run_phase2(const TrainConfig& cfg, const DatasetSplit& split, const Codebook& cb,
                       const ClassifierState& classifier, const NormStats& stats, PoolMapSet maps,
                       EncodeCache* cache = nullptr);

// Fraction of samples whose argmax output matches the label; ties break
// toward the lowest class index.
double evaluate(const ClassifierState& classifier, const Codebook& cb, const PoolMapSet& maps,
                const NormStats& stats, const std::vector<ImageSample>& samples,
                const TrainConfig& cfg, EncodeCache* cache = nullptr, int cache_part = -1);

struct TrialOutcome {
    std::uint64_t seed = 0;
    TrainReport report;
    Codebook codebook;
    ClassifierState classifier;
    NormStats stats;
};

// One complete run: split -> codebook -> phase 1 -> phase 2.
TrialOutcome run_trial(const TrainConfig& cfg, const std::vector<ImageSample>& samples);

struct AggregateReport {
    std::vector<TrialOutcome> trials;  // trial r uses seed = cfg.seed + r
    double mean_baseline = 0.0, std_baseline = 0.0;
    double mean_best = 0.0, std_best = 0.0;
    double mean_delta = 0.0;  // mean over per-trial (best - baseline)
};

AggregateReport run_trials(const TrainConfig& cfg, const std::vector<ImageSample>& samples);

// The schedule both phases follow, reproduced without any computation so a
// dry run can count batches, validation checks, and phase boundaries.
struct DryRunCounts {
    std::uint64_t phase1_batches = 0;
    std::uint64_t phase2_batches = 0;
    std::uint64_t phase2_val_checks = 0;  // excludes the phase-2 start check
    std::uint64_t phase1_boundary = 0;    // examples_seen where phase 1 ends
    std::uint64_t total_examples = 0;
};

DryRunCounts dry_run_counts(const TrainConfig& cfg);

}  // namespace poolmaps

#endif
