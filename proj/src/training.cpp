#include "poolmaps/training.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "poolmaps/common.hpp"

namespace poolmaps {

Activation TrainConfig::activation_kind() const {
    if (activation == "sigmoid") return Activation::sigmoid;
    if (activation == "tanh") return Activation::tanh;
    throw ArgumentError("unknown activation '" + activation + "' (expected sigmoid or tanh)");
}

int TrainConfig::grid_side() const { return patch_grid_side(n, w, stride); }

std::uint64_t sample_key(int part, std::size_t index) {
    return (static_cast<std::uint64_t>(part) << 32) | static_cast<std::uint64_t>(index);
}

std::shared_ptr<const EncodedGrid> EncodeCache::get(std::uint64_t key, const Codebook& cb,
                                                    const ImageSample& image,
                                                    const TrainConfig& cfg) {
    {
        std::lock_guard<std::mutex> lock(mu_);
        auto it = entries_.find(key);
        if (it != entries_.end()) {
            lru_.splice(lru_.begin(), lru_, it->second.pos);
            return it->second.grid;
        }
    }
    auto grid = std::make_shared<EncodedGrid>(
        encode_image(cb, image, cfg.w, cfg.stride, cfg.eps_norm));
    std::lock_guard<std::mutex> lock(mu_);
    auto it = entries_.find(key);
    if (it != entries_.end()) return it->second.grid;  // raced; keep the first
    if (capacity_ == 0) return grid;
    while (entries_.size() >= capacity_) {
        entries_.erase(lru_.back());
        lru_.pop_back();
    }
    lru_.push_front(key);
    entries_.emplace(key, Entry{grid, lru_.begin()});
    return grid;
}

namespace {

std::shared_ptr<const EncodedGrid> encoded(EncodeCache* cache, int part, std::size_t index,
                                           const Codebook& cb, const ImageSample& image,
                                           const TrainConfig& cfg) {
    if (cache && part >= 0) return cache->get(sample_key(part, index), cb, image, cfg);
    return std::make_shared<EncodedGrid>(encode_image(cb, image, cfg.w, cfg.stride, cfg.eps_norm));
}

// Walks the mini-batch schedule for `total` examples: fn(batch_size) per
// batch, last batch possibly smaller.
template <typename Fn>
void for_each_batch(std::uint64_t total, int batch_size, Fn&& fn) {
    std::uint64_t seen = 0;
    while (seen < total) {
        std::uint64_t b = std::min<std::uint64_t>(batch_size, total - seen);
        fn(static_cast<int>(b));
        seen += b;
    }
}

}  // namespace

Phase1Result run_phase1(const TrainConfig& cfg, const DatasetSplit& split, const Codebook& cb,
                        const PoolMapSet& maps, EncodeCache* cache) {
    if (split.train.empty() || split.validation.empty())
        throw ArgumentError("run_phase1: split has an empty part");

    Phase1Result res;

    // Normalization statistics come from one pass over the training images
    // (optionally capped) with the initial maps, and freeze before the first
    // classifier update.
    std::uint64_t fit_count = cfg.norm_fit_images == 0
                                  ? split.train.size()
                                  : std::min<std::uint64_t>(cfg.norm_fit_images, split.train.size());
    if (fit_count < 2) throw ArgumentError("run_phase1: need at least 2 images for norm stats");
    std::vector<PooledVec> pooled(fit_count);
    parallel_for(fit_count, [&](std::size_t i) {
        auto grid = encoded(cache, 0, i, cb, split.train[i], cfg);
        pooled[i] = pool_forward(maps, *grid);
    });
    res.stats = fit_norm_stats(pooled, cfg.sigma_floor);

    res.classifier = init_classifier(maps.p * cb.k, cfg.hidden, cfg.t, cfg.activation_kind(),
                                     cfg.seed);

    std::mt19937_64 rng(substream(cfg.seed, SeedRole::phase1_batches));
    std::uniform_int_distribution<std::size_t> pick(0, split.train.size() - 1);
    double loss_sum = 0.0;
    for_each_batch(cfg.phase1_examples, cfg.batch_size, [&](int b) {
        std::vector<std::size_t> idx(b);
        for (int j = 0; j < b; ++j) idx[j] = pick(rng);
        std::vector<std::shared_ptr<const EncodedGrid>> grids(b);
        parallel_for(b, [&](std::size_t j) {
            grids[j] = encoded(cache, 0, idx[j], cb, split.train[idx[j]], cfg);
        });
        std::vector<PooledVec> inputs(b);
        std::vector<std::vector<double>> targets(b);
        std::vector<TrainPair> batch(b);
        for (int j = 0; j < b; ++j) {
            inputs[j] = apply_norm(res.stats, pool_forward(maps, *grids[j]));
            targets[j] = one_hot(split.train[idx[j]].label, cfg.t);
            batch[j] = TrainPair{&inputs[j], &targets[j]};
        }
        loss_sum += sgd_step(res.classifier, batch, cfg.eta_net) * b;
    });
    res.mean_loss = cfg.phase1_examples > 0 ? loss_sum / double(cfg.phase1_examples) : 0.0;
    res.baseline_val_acc =
        evaluate(res.classifier, cb, maps, res.stats, split.validation, cfg, cache, 1);
    return res;
}

TrainReport run_phase2(const TrainConfig& cfg, const DatasetSplit& split, const Codebook& cb,
                       const ClassifierState& classifier, const NormStats& stats, PoolMapSet maps,
                       EncodeCache* cache) {
    if (!stats.frozen) throw StateError("run_phase2: normalization stats are not frozen");
    const std::uint64_t cls_sum = checksum(classifier);
    const std::uint64_t stats_sum = checksum(stats);

    TrainReport report;
    report.baseline_val_acc =
        evaluate(classifier, cb, maps, stats, split.validation, cfg, cache, 1);
    report.best_post_pool_acc = report.baseline_val_acc;
    report.best_maps = maps;

    std::mt19937_64 rng(substream(cfg.seed, SeedRole::phase2_batches));
    std::uniform_int_distribution<std::size_t> pick(0, split.train.size() - 1);

    std::uint64_t seen = 0;
    std::uint64_t next_check = cfg.val_check_interval;
    double window_loss = 0.0;
    std::uint64_t window_examples = 0;

    auto run_check = [&] {
        double acc = evaluate(classifier, cb, maps, stats, split.validation, cfg, cache, 1);
        if (acc > report.best_post_pool_acc) {
            report.best_post_pool_acc = acc;
            report.best_maps = maps;
        }
        HistoryRow row;
        row.examples_seen = cfg.phase1_examples + seen;
        row.phase = 2;
        row.loss = window_examples > 0 ? window_loss / double(window_examples) : 0.0;
        row.val_accuracy = acc;
        report.history.push_back(row);
        window_loss = 0.0;
        window_examples = 0;
    };

    for_each_batch(cfg.phase2_examples, cfg.batch_size, [&](int b) {
        std::vector<std::size_t> idx(b);
        for (int j = 0; j < b; ++j) idx[j] = pick(rng);
        std::vector<std::shared_ptr<const EncodedGrid>> grids(b);
        parallel_for(b, [&](std::size_t j) {
            grids[j] = encoded(cache, 0, idx[j], cb, split.train[idx[j]], cfg);
        });
        std::vector<PooledVec> deltas(b);
        std::vector<PoolBatchItem> batch(b);
        for (int j = 0; j < b; ++j) {
            PooledVec h_bar = apply_norm(stats, pool_forward(maps, *grids[j]));
            BackpropResult bp = classifier_backward(classifier, h_bar,
                                                    one_hot(split.train[idx[j]].label, cfg.t));
            window_loss += bp.loss;
            deltas[j] = std::move(bp.delta0);
            batch[j] = PoolBatchItem{grids[j].get(), &deltas[j]};
        }
        window_examples += b;
        if (cfg.eta_pool > 0.0) pool_update(maps, batch, stats, cfg.eta_pool);
        seen += b;
        while (next_check <= seen) {
            run_check();
            next_check += cfg.val_check_interval;
        }
    });
    if (window_examples > 0) run_check();  // phase ended between checks

    if (checksum(classifier) != cls_sum)
        throw StateError("run_phase2: classifier changed during pool learning");
    if (checksum(stats) != stats_sum)
        throw StateError("run_phase2: normalization stats changed during pool learning");
    return report;
}

double evaluate(const ClassifierState& classifier, const Codebook& cb, const PoolMapSet& maps,
                const NormStats& stats, const std::vector<ImageSample>& samples,
                const TrainConfig& cfg, EncodeCache* cache, int cache_part) {
    if (samples.empty()) throw ArgumentError("evaluate: empty sample list");
    std::vector<unsigned char> correct(samples.size(), 0);
    parallel_for(samples.size(), [&](std::size_t i) {
        auto grid = encoded(cache, cache_part, i, cb, samples[i], cfg);
        PooledVec h_bar = apply_norm(stats, pool_forward(maps, *grid));
        correct[i] = predict(classifier, h_bar) == samples[i].label ? 1 : 0;
    });
    std::size_t hits = 0;
    for (unsigned char c : correct) hits += c;
    return double(hits) / double(samples.size());
}

namespace {

Patch extract_window(const ImageSample& image, int r0, int c0, int w) {
    Patch p(3 * static_cast<std::size_t>(w) * w);
    std::size_t i = 0;
    for (int c = 0; c < 3; ++c)
        for (int r = 0; r < w; ++r)
            for (int col = 0; col < w; ++col) p[i++] = image.at(c, r0 + r, c0 + col);
    return p;
}

Codebook build_codebook(const TrainConfig& cfg, const std::vector<ImageSample>& train) {
    const int P = cfg.grid_side();
    std::mt19937_64 rng(substream(cfg.seed, SeedRole::codebook_patches));
    std::uniform_int_distribution<std::size_t> pick_img(0, train.size() - 1);
    std::uniform_int_distribution<int> pick_pos(0, P - 1);

    std::vector<Patch> patches(cfg.codebook_patches);
    for (auto& p : patches) {
        const ImageSample& img = train[pick_img(rng)];
        p = normalize_patch(
            extract_window(img, pick_pos(rng) * cfg.stride, pick_pos(rng) * cfg.stride, cfg.w),
            cfg.eps_norm);
    }

    WhiteningTransform wt = fit_whitening(patches, cfg.eps_zca);
    parallel_for(patches.size(), [&](std::size_t i) { patches[i] = apply_whitening(wt, patches[i]); });

    Codebook cb = train_kmeans(patches, cfg.k, cfg.kmeans_iters, cfg.seed);
    cb.whitening = std::move(wt);
    return cb;
}

}  // namespace

TrialOutcome run_trial(const TrainConfig& cfg, const std::vector<ImageSample>& samples) {
    TrialOutcome out;
    out.seed = cfg.seed;

    DatasetSplit parts = split(samples, cfg.train_fraction, cfg.seed);
    out.codebook = build_codebook(cfg, parts.train);

    EncodeCache cache(cfg.cache_images);
    EncodeCache* cache_ptr = cfg.cache_images > 0 ? &cache : nullptr;
    PoolMapSet maps = init_quadrant_maps(cfg.grid_side());

    Phase1Result p1 = run_phase1(cfg, parts, out.codebook, maps, cache_ptr);
    out.classifier = std::move(p1.classifier);
    out.stats = std::move(p1.stats);

    out.report = run_phase2(cfg, parts, out.codebook, out.classifier, out.stats, maps, cache_ptr);
    if (out.report.baseline_val_acc != p1.baseline_val_acc)
        throw StateError("run_trial: phase-2 start accuracy differs from phase-1 baseline");

    HistoryRow phase1_row;
    phase1_row.examples_seen = cfg.phase1_examples;
    phase1_row.phase = 1;
    phase1_row.loss = p1.mean_loss;
    phase1_row.val_accuracy = p1.baseline_val_acc;
    out.report.history.insert(out.report.history.begin(), phase1_row);
    return out;
}

AggregateReport run_trials(const TrainConfig& cfg, const std::vector<ImageSample>& samples) {
    if (cfg.trials < 1) throw ArgumentError("run_trials: trials must be >= 1");
    AggregateReport agg;
    agg.trials.reserve(cfg.trials);
    for (int r = 0; r < cfg.trials; ++r) {
        TrainConfig trial_cfg = cfg;
        trial_cfg.seed = cfg.seed + static_cast<std::uint64_t>(r);
        agg.trials.push_back(run_trial(trial_cfg, samples));
    }
    const double N = double(agg.trials.size());
    for (const auto& t : agg.trials) {
        agg.mean_baseline += t.report.baseline_val_acc;
        agg.mean_best += t.report.best_post_pool_acc;
        agg.mean_delta += t.report.best_post_pool_acc - t.report.baseline_val_acc;
    }
    agg.mean_baseline /= N;
    agg.mean_best /= N;
    agg.mean_delta /= N;
    for (const auto& t : agg.trials) {
        double db = t.report.baseline_val_acc - agg.mean_baseline;
        double dbest = t.report.best_post_pool_acc - agg.mean_best;
        agg.std_baseline += db * db;
        agg.std_best += dbest * dbest;
    }
    agg.std_baseline = std::sqrt(agg.std_baseline / N);
    agg.std_best = std::sqrt(agg.std_best / N);
    return agg;
}

DryRunCounts dry_run_counts(const TrainConfig& cfg) {
    DryRunCounts c;
    for_each_batch(cfg.phase1_examples, cfg.batch_size, [&](int) { c.phase1_batches++; });
    std::uint64_t seen = 0;
    std::uint64_t next_check = cfg.val_check_interval;
    std::uint64_t pending = 0;
    for_each_batch(cfg.phase2_examples, cfg.batch_size, [&](int b) {
        c.phase2_batches++;
        seen += b;
        pending += b;
        while (next_check <= seen) {
            c.phase2_val_checks++;
            next_check += cfg.val_check_interval;
            pending = 0;
        }
    });
    if (pending > 0) c.phase2_val_checks++;
    c.phase1_boundary = cfg.phase1_examples;
    c.total_examples = cfg.phase1_examples + cfg.phase2_examples;
    return c;
}

}  // namespace poolmaps
