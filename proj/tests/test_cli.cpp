#include "doctest.h"

#include <filesystem>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "poolmaps/binio.hpp"
#include "poolmaps/bundle.hpp"
#include "poolmaps/cli.hpp"
#include "poolmaps/export.hpp"

using namespace poolmaps;

namespace {

struct TempDir {
    std::filesystem::path path;

    TempDir() {
        std::random_device rd;
        path = std::filesystem::temp_directory_path() /
               ("poolmaps_cli_" + std::to_string(rd()) + std::to_string(rd()));
        std::filesystem::create_directories(path);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path, ec);
    }
    std::string file(const std::string& name) const { return (path / name).string(); }
};

struct CliResult {
    int code;
    std::string out;
    std::string err;
};

CliResult cli(const std::vector<std::string>& args) {
    std::ostringstream out, err;
    int code = run_cli(args, out, err);
    return {code, out.str(), err.str()};
}

// Training config small enough that a full train run takes milliseconds.
const char* tiny_cfg_text =
    "n = 8\nw = 4\nstride = 2\nk = 3\nhidden = 4\nt = 2\n"
    "batch_size = 5\neta_pool = 1e-3\neta_net = 0.1\n"
    "phase1_examples = 200\nphase2_examples = 100\nval_check_interval = 40\n"
    "trials = 2\nseed = 5\nkmeans_iters = 5\ncodebook_patches = 150\n"
    "data_source = synthetic\nsynthetic_count = 40\n";

bool mentions(const std::string& text, const std::string& needle) {
    return text.find(needle) != std::string::npos;
}

}  // namespace

TEST_CASE("train writes the full artifact set") {
    TempDir dir;
    atomic_write_file(dir.file("t.cfg"), tiny_cfg_text);
    CliResult r = cli({"train", "--config", dir.file("t.cfg"), "--out", dir.file("run")});
    CAPTURE(r.err);
    REQUIRE(r.code == 0);
    CHECK(mentions(r.out, "trial 0 (seed 5): baseline="));
    CHECK(mentions(r.out, "trial 1 (seed 6): baseline="));
    CHECK(mentions(r.out, "baseline mean="));
    CHECK(mentions(r.out, "delta mean="));

    for (const char* name :
         {"config.cfg", "metrics.csv", "model.pmdl", "maps.pmap", "map_0.pgm", "map_1.pgm",
          "map_2.pgm", "map_3.pgm"})
        CHECK(std::filesystem::exists(dir.path / "run" / name));

    std::string csv = read_file(dir.file("run/metrics.csv"));
    CHECK(csv.rfind("examples_seen,phase,loss,val_accuracy\n", 0) == 0);
    CHECK(mentions(csv, "\n200,1,"));  // phase-1 summary row
    CHECK(mentions(csv, "\n240,2,"));  // first phase-2 check

    // the saved maps match the bundle's best maps
    ModelBundle bundle = load_bundle(dir.file("run/model.pmdl"));
    PoolMapSet maps = read_pmap(dir.file("run/maps.pmap"));
    CHECK(maps.weights == bundle.maps.weights);
    CHECK(bundle.stats.frozen);
}

TEST_CASE("train is byte-identical across reruns and thread counts") {
    TempDir dir;
    atomic_write_file(dir.file("t.cfg"), tiny_cfg_text);
    REQUIRE(cli({"train", "--config", dir.file("t.cfg"), "--out", dir.file("a"),
                 "--threads", "1"})
                .code == 0);
    REQUIRE(cli({"train", "--config", dir.file("t.cfg"), "--out", dir.file("b"),
                 "--threads", "4"})
                .code == 0);
    CHECK(read_file(dir.file("a/metrics.csv")) == read_file(dir.file("b/metrics.csv")));
    CHECK(read_file(dir.file("a/model.pmdl")) == read_file(dir.file("b/model.pmdl")));
    CHECK(read_file(dir.file("a/maps.pmap")) == read_file(dir.file("b/maps.pmap")));
}

TEST_CASE("train flag overrides reach the config snapshot") {
    TempDir dir;
    atomic_write_file(dir.file("t.cfg"), tiny_cfg_text);
    CliResult r = cli({"train", "--config", dir.file("t.cfg"), "--out", dir.file("run"),
                       "--seed", "9", "--trials", "1", "--eta-pool", "0"});
    REQUIRE(r.code == 0);
    CHECK(mentions(r.out, "trial 0 (seed 9)"));
    std::string snapshot = read_file(dir.file("run/config.cfg"));
    CHECK(mentions(snapshot, "seed = 9\n"));
    CHECK(mentions(snapshot, "eta_pool = 0\n"));
    CHECK(mentions(snapshot, "trials = 1\n"));
}

TEST_CASE("dry run prints the schedule and writes nothing") {
    TempDir dir;
    CliResult r = cli({"train", "--preset", "paper", "--dry-run", "--out", dir.file("run")});
    CHECK(r.code == 0);
    CHECK(r.out ==
          "dry run: phase1_batches=25000 phase2_batches=1500 phase2_val_checks=30 "
          "phase1_boundary=250000 total_examples=265000\n");
    CHECK(!std::filesystem::exists(dir.path / "run"));
}

TEST_CASE("eval reports accuracy from a saved bundle") {
    TempDir dir;
    atomic_write_file(dir.file("t.cfg"), tiny_cfg_text);
    REQUIRE(cli({"train", "--config", dir.file("t.cfg"), "--out", dir.file("run")}).code == 0);

    CliResult r = cli({"eval", "--bundle", dir.file("run/model.pmdl")});
    CAPTURE(r.err);
    REQUIRE(r.code == 0);
    REQUIRE(r.out.size() >= 16);
    CHECK(r.out.rfind("accuracy=", 0) == 0);
    CHECK(r.out.substr(10, 1) == ".");   // 0.xxxx or 1.xxxx
    CHECK(r.out[r.out.size() - 1] == '\n');
    CHECK(r.out.size() == 9 + 6 + 1);    // accuracy= + d.dddd + newline

    // same bundle, same synthetic corpus: identical output
    CliResult again = cli({"eval", "--bundle", dir.file("run/model.pmdl")});
    CHECK(again.out == r.out);

    CliResult matched = cli({"eval", "--bundle", dir.file("run/model.pmdl"), "--k", "3"});
    CHECK(matched.code == 0);

    CliResult mismatched = cli({"eval", "--bundle", dir.file("run/model.pmdl"), "--k", "7"});
    CHECK(mismatched.code == 2);
    CHECK(mentions(mismatched.err, "does not match"));

    CliResult other_seed =
        cli({"eval", "--bundle", dir.file("run/model.pmdl"), "--synthetic", "--seed", "77"});
    CHECK(other_seed.code == 0);  // different generated corpus is still valid input
}

TEST_CASE("eval rejects corrupt bundles with a usage error") {
    TempDir dir;
    atomic_write_file(dir.file("bad.pmdl"), "XMDLgarbage");
    CliResult r = cli({"eval", "--bundle", dir.file("bad.pmdl")});
    CHECK(r.code == 2);
    CHECK(mentions(r.err, "error: "));
    CHECK(mentions(r.err, "magic"));

    CliResult missing = cli({"eval", "--bundle", dir.file("absent.pmdl")});
    CHECK(missing.code == 2);
    CHECK(mentions(missing.err, "error: "));
}

TEST_CASE("export-maps recreates the map files from a bundle") {
    TempDir dir;
    atomic_write_file(dir.file("t.cfg"), tiny_cfg_text);
    REQUIRE(cli({"train", "--config", dir.file("t.cfg"), "--out", dir.file("run"),
                 "--trials", "1"})
                .code == 0);

    CliResult r =
        cli({"export-maps", "--bundle", dir.file("run/model.pmdl"), "--out", dir.file("ex")});
    REQUIRE(r.code == 0);
    for (const char* name : {"maps.pmap", "map_0.pgm", "map_1.pgm", "map_2.pgm", "map_3.pgm"})
        CHECK(std::filesystem::exists(dir.path / "ex" / name));

    ModelBundle bundle = load_bundle(dir.file("run/model.pmdl"));
    CHECK(read_pmap(dir.file("ex/maps.pmap")).weights == bundle.maps.weights);
    CHECK(read_file(dir.file("ex/map_0.pgm")).compare(0, 3, "P5\n") == 0);
}

TEST_CASE("gradcheck exit codes distinguish pass, fail, and trivial pass") {
    CliResult pass = cli({"gradcheck", "--grid", "3", "--k", "2", "--hidden", "3", "--classes",
                          "2", "--instances", "2"});
    CHECK(pass.code == 0);
    CHECK(mentions(pass.out, "status=pass"));
    CHECK(mentions(pass.out, "max_rel_error="));

    CliResult fail = cli({"gradcheck", "--grid", "3", "--k", "2", "--hidden", "3", "--classes",
                          "2", "--instances", "2", "--corrupt-update", "1.5"});
    CHECK(fail.code == 1);
    CHECK(mentions(fail.out, "status=fail"));

    CliResult trivial = cli({"gradcheck", "--eta", "0"});
    CHECK(trivial.code == 0);
    CHECK(mentions(trivial.out, "trivially"));
    CHECK(mentions(trivial.out, "status=pass"));
}

TEST_CASE("usage errors exit with code 2") {
    TempDir dir;

    CliResult none = cli({});
    CHECK(none.code == 2);

    CliResult preset = cli({"train", "--preset", "desk2", "--dry-run"});
    CHECK(preset.code == 2);

    CliResult unknown_flag = cli({"train", "--what"});
    CHECK(unknown_flag.code == 2);

    atomic_write_file(dir.file("bad.cfg"), "n = 8\nwat = 1\n");
    CliResult badkey = cli({"train", "--config", dir.file("bad.cfg"), "--dry-run"});
    CHECK(badkey.code == 2);
    CHECK(mentions(badkey.err, "line 2"));
    CHECK(mentions(badkey.err, "wat"));

    atomic_write_file(dir.file("badval.cfg"), "p = 3\n");
    CliResult badval = cli({"train", "--config", dir.file("badval.cfg"), "--dry-run"});
    CHECK(badval.code == 2);
    CHECK(mentions(badval.err, "quadrant"));

    CliResult missing_cfg = cli({"train", "--config", dir.file("absent.cfg"), "--dry-run"});
    CHECK(missing_cfg.code == 2);

    std::filesystem::create_directories(dir.path / "empty");
    atomic_write_file(dir.file("cifar.cfg"), "data_source = cifar\n");
    CliResult nodata = cli({"train", "--config", dir.file("cifar.cfg"), "--data-dir",
                            dir.file("empty"), "--out", dir.file("run")});
    CHECK(nodata.code == 2);
    CHECK(mentions(nodata.err, "--synthetic"));
}

TEST_CASE("--help succeeds and lists the subcommands") {
    CliResult r = cli({"--help"});
    CHECK(r.code == 0);
    CHECK(mentions(r.out, "train"));
    CHECK(mentions(r.out, "eval"));
    CHECK(mentions(r.out, "export-maps"));
    CHECK(mentions(r.out, "gradcheck"));
}
