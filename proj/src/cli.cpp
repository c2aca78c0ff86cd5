#include "poolmaps/cli.hpp"

#include <cstdio>
#include <filesystem>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "poolmaps/binio.hpp"
#include "poolmaps/bundle.hpp"
#include "poolmaps/common.hpp"
#include "poolmaps/config.hpp"
#include "poolmaps/export.hpp"
#include "poolmaps/training.hpp"
#include "poolmaps/verify.hpp"

namespace poolmaps {

namespace {

namespace fs = std::filesystem;

std::string fmt_acc(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.4f", v);
    return buf;
}

std::vector<ImageSample> load_train_images(const TrainConfig& cfg, const std::string& data_dir) {
    if (cfg.data_source == "synthetic")
        return generate_synthetic(cfg.synthetic_count, cfg.n, cfg.seed);
    std::vector<ImageSample> all;
    int found = 0;
    for (int b = 1; b <= 5; ++b) {
        fs::path path = fs::path(data_dir) / ("data_batch_" + std::to_string(b) + ".bin");
        if (!fs::exists(path)) continue;
        std::vector<ImageSample> batch = load_cifar_batch(path.string(), cfg.n, cfg.t);
        all.insert(all.end(), batch.begin(), batch.end());
        ++found;
    }
    if (found == 0)
        throw DataError("no data_batch_<1..5>.bin found in '" + data_dir +
                        "' (pass --synthetic to train without data)");
    return all;
}

std::vector<ImageSample> load_eval_images(const TrainConfig& cfg, const std::string& data_dir) {
    if (cfg.data_source == "synthetic")
        return generate_synthetic(cfg.synthetic_count, cfg.n, cfg.seed);
    fs::path test = fs::path(data_dir) / "test_batch.bin";
    if (fs::exists(test)) return load_cifar_batch(test.string(), cfg.n, cfg.t);
    return load_train_images(cfg, data_dir);
}

std::string metrics_csv(const std::vector<HistoryRow>& history) {
    std::string out = "examples_seen,phase,loss,val_accuracy\n";
    for (const HistoryRow& row : history) {
        out += std::to_string(row.examples_seen);
        out += ',';
        out += std::to_string(row.phase);
        out += ',';
        out += format_double(row.loss);
        out += ',';
        out += format_double(row.val_accuracy);
        out += '\n';
    }
    return out;
}

void write_map_files(const fs::path& dir, const PoolMapSet& maps, std::ostream& out) {
    for (int i = 0; i < maps.p; ++i) {
        fs::path path = dir / ("map_" + std::to_string(i) + ".pgm");
        std::vector<double> values(maps.map(i), maps.map(i) + maps.P * maps.P);
        write_pgm(path.string(), values, maps.P, maps.P);
        out << "wrote " << path.string() << "\n";
    }
    fs::path raw = dir / "maps.pmap";
    write_pmap(raw.string(), maps);
    out << "wrote " << raw.string() << "\n";
}

int cmd_train(const TrainConfig& cfg, bool dry_run, const std::string& data_dir,
              const std::string& out_dir, std::ostream& out) {
    validate_config(cfg);
    if (dry_run) {
        DryRunCounts c = dry_run_counts(cfg);
        out << "dry run: phase1_batches=" << c.phase1_batches
            << " phase2_batches=" << c.phase2_batches
            << " phase2_val_checks=" << c.phase2_val_checks
            << " phase1_boundary=" << c.phase1_boundary
            << " total_examples=" << c.total_examples << "\n";
        return 0;
    }

    std::vector<ImageSample> samples = load_train_images(cfg, data_dir);
    if (samples.size() < 2) throw DataError("dataset has fewer than 2 images");

    AggregateReport agg = run_trials(cfg, samples);
    std::size_t best = 0;
    for (std::size_t r = 1; r < agg.trials.size(); ++r)
        if (agg.trials[r].report.best_post_pool_acc >
            agg.trials[best].report.best_post_pool_acc)
            best = r;

    for (std::size_t r = 0; r < agg.trials.size(); ++r) {
        const TrialOutcome& t = agg.trials[r];
        out << "trial " << r << " (seed " << t.seed
            << "): baseline=" << fmt_acc(t.report.baseline_val_acc)
            << " best=" << fmt_acc(t.report.best_post_pool_acc) << "\n";
    }
    out << "baseline mean=" << fmt_acc(agg.mean_baseline) << " std=" << fmt_acc(agg.std_baseline)
        << "  best mean=" << fmt_acc(agg.mean_best) << " std=" << fmt_acc(agg.std_best)
        << "  delta mean=" << fmt_acc(agg.mean_delta) << "\n";

    fs::create_directories(out_dir);
    fs::path dir(out_dir);
    const TrialOutcome& chosen = agg.trials[best];

    atomic_write_file((dir / "config.cfg").string(), config_to_text(cfg));
    atomic_write_file((dir / "metrics.csv").string(), metrics_csv(chosen.report.history));
    out << "wrote " << (dir / "metrics.csv").string() << "\n";

    ModelBundle bundle;
    bundle.config_text = config_to_text(cfg);
    bundle.codebook = chosen.codebook;
    bundle.maps = chosen.report.best_maps;
    bundle.classifier = chosen.classifier;
    bundle.stats = chosen.stats;
    save_bundle((dir / "model.pmdl").string(), bundle);
    out << "wrote " << (dir / "model.pmdl").string() << "\n";

    write_map_files(dir, chosen.report.best_maps, out);
    return 0;
}

int cmd_eval(const std::string& bundle_path, const std::string& data_dir, bool synthetic,
             bool seed_given, std::uint64_t seed, int k_flag, std::ostream& out) {
    ModelBundle bundle = load_bundle(bundle_path);
    TrainConfig cfg = parse_config_text(bundle.config_text);
    if (synthetic) cfg.data_source = "synthetic";
    if (seed_given) cfg.seed = seed;
    if (k_flag > 0 && k_flag != bundle.codebook.k)
        throw ArgumentError("--k " + std::to_string(k_flag) + " does not match bundle k=" +
                            std::to_string(bundle.codebook.k));

    std::vector<ImageSample> samples = load_eval_images(cfg, data_dir);
    double acc = evaluate(bundle.classifier, bundle.codebook, bundle.maps, bundle.stats, samples,
                          cfg);
    out << "accuracy=" << fmt_acc(acc) << "\n";
    return 0;
}

int cmd_export_maps(const std::string& bundle_path, const std::string& out_dir,
                    std::ostream& out) {
    ModelBundle bundle = load_bundle(bundle_path);
    fs::create_directories(out_dir);
    write_map_files(fs::path(out_dir), bundle.maps, out);
    return 0;
}

int cmd_gradcheck(const GradCheckDims& dims, int instances, std::uint64_t seed, double threshold,
                  double eta, std::ostream& out) {
    if (eta == 0.0) {
        out << "eta=0: pool update disabled, consistency holds trivially\n";
        out << "gradcheck max_rel_error=0 threshold=" << format_double(threshold)
            << " status=pass\n";
        return 0;
    }
    GradCheckReport worst;
    double max_err = -1.0;
    for (int i = 0; i < instances; ++i) {
        GradCheckReport report = run_gradcheck(dims, seed + static_cast<std::uint64_t>(i));
        if (report.max_rel_error > max_err) {
            max_err = report.max_rel_error;
            worst = report;
        }
    }
    out << worst.table();
    out << worst.summary_line(threshold) << "\n";
    return worst.passed(threshold) ? 0 : 1;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Learned spatial pooling maps over a single-layer feature pipeline"};
    app.require_subcommand(1);

    // train
    auto* train = app.add_subcommand("train", "Train codebook, classifier, and pool maps");
    std::string config_path, preset = "paper", data_dir = "data", out_dir = "out";
    std::uint64_t seed = 0;
    bool synthetic = false, dry_run = false;
    int threads = 0, trials = 0;
    double eta_pool = -1.0;
    train->add_option("--config", config_path, "Config file (key = value lines)");
    train->add_option("--preset", preset, "Base preset: paper or desk")
        ->check(CLI::IsMember({"paper", "desk"}));
    train->add_option("--data-dir", data_dir, "Directory with CIFAR-10 binary batches");
    train->add_option("--out", out_dir, "Output directory");
    auto* train_seed = train->add_option("--seed", seed, "Master seed");
    train->add_flag("--synthetic", synthetic, "Use the synthetic dataset");
    train->add_option("--threads", threads, "Worker thread cap (1 = sequential)");
    auto* train_eta = train->add_option("--eta-pool", eta_pool, "Pool-map learning rate");
    auto* train_trials = train->add_option("--trials", trials, "Number of trials");
    train->add_flag("--dry-run", dry_run, "Print schedule counts and exit");

    // eval
    auto* eval_cmd = app.add_subcommand("eval", "Evaluate a saved model bundle");
    std::string bundle_path;
    int k_flag = 0;
    eval_cmd->add_option("--bundle", bundle_path, "Model bundle path")->required();
    eval_cmd->add_option("--data-dir", data_dir, "Directory with CIFAR-10 binary batches");
    eval_cmd->add_flag("--synthetic", synthetic, "Evaluate on the synthetic dataset");
    auto* eval_seed = eval_cmd->add_option("--seed", seed, "Synthetic data seed override");
    eval_cmd->add_option("--k", k_flag, "Expected codebook size (must match the bundle)");
    eval_cmd->add_option("--threads", threads, "Worker thread cap");

    // export-maps
    auto* export_cmd = app.add_subcommand("export-maps", "Write PGM images and a PMAP dump");
    export_cmd->add_option("--bundle", bundle_path, "Model bundle path")->required();
    export_cmd->add_option("--out", out_dir, "Output directory")->default_val(std::string("."));
    export_cmd->add_option("--threads", threads, "Worker thread cap");

    // gradcheck
    auto* grad_cmd = app.add_subcommand("gradcheck", "Finite-difference verification oracles");
    GradCheckDims dims;
    int instances = 5;
    std::uint64_t grad_seed = 1;
    double threshold = 1e-5, grad_eta = 1.0;
    grad_cmd->add_option("--grid", dims.P, "Pooling grid side P")->check(CLI::Range(2, 64));
    grad_cmd->add_option("--k", dims.k, "Codewords")->check(CLI::PositiveNumber);
    grad_cmd->add_option("--hidden", dims.hidden, "Hidden units")->check(CLI::PositiveNumber);
    grad_cmd->add_option("--classes", dims.t, "Classes")->check(CLI::Range(2, 64));
    grad_cmd->add_option("--step", dims.step, "Finite-difference step")
        ->check(CLI::PositiveNumber);
    grad_cmd->add_option("--threshold", threshold, "Max relative error to pass");
    grad_cmd->add_option("--instances", instances, "Random instances to check")
        ->check(CLI::PositiveNumber);
    grad_cmd->add_option("--seed", grad_seed, "Base seed");
    grad_cmd->add_option("--eta", grad_eta, "Update scale (0 disables the pool update)");
    grad_cmd->add_option("--corrupt-update", dims.corrupt_update,
                         "Test hook: scale the analytic update to force a failure");
    grad_cmd->add_option("--threads", threads, "Worker thread cap");

    std::vector<const char*> argv;
    argv.push_back("poolmaps");
    for (const std::string& a : args) argv.push_back(a.c_str());

    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e, out, err);
        return code == 0 ? 0 : 2;
    }

    try {
        set_worker_threads(threads);
        if (train->parsed()) {
            TrainConfig cfg = preset_config(preset);
            if (!config_path.empty()) cfg = load_config_file(config_path, cfg);
            if (*train_seed) cfg.seed = seed;
            if (*train_eta) cfg.eta_pool = eta_pool;
            if (*train_trials) cfg.trials = trials;
            if (synthetic) cfg.data_source = "synthetic";
            return cmd_train(cfg, dry_run, data_dir, out_dir, out);
        }
        if (eval_cmd->parsed())
            return cmd_eval(bundle_path, data_dir, synthetic, static_cast<bool>(*eval_seed), seed,
                            k_flag, out);
        if (export_cmd->parsed()) return cmd_export_maps(bundle_path, out_dir, out);
        if (grad_cmd->parsed())
            return cmd_gradcheck(dims, instances, grad_seed, threshold, grad_eta, out);
        err << "error: no subcommand\n";
        return 2;
    } catch (const ArgumentError& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    } catch (const FormatError& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    } catch (const DataError& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    } catch (const StateError& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::filesystem::filesystem_error& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    }
}

}  // namespace poolmaps
