#include "doctest.h"

#include <filesystem>
#include <random>
#include <string>

#include "poolmaps/binio.hpp"
#include "poolmaps/bundle.hpp"
#include "poolmaps/common.hpp"
#include "poolmaps/config.hpp"
#include "poolmaps/export.hpp"
#include "poolmaps/pooling.hpp"

using namespace poolmaps;

namespace {

// Scratch directory under the system temp root, removed on scope exit.
struct TempDir {
    std::filesystem::path path;

    TempDir() {
        std::random_device rd;
        path = std::filesystem::temp_directory_path() /
               ("poolmaps_io_" + std::to_string(rd()) + std::to_string(rd()));
        std::filesystem::create_directories(path);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path, ec);
    }
    std::string file(const std::string& name) const { return (path / name).string(); }
};

// Runs f, which must throw E, and returns the exception message.
template <class E, class F>
std::string thrown_message(F&& f) {
    try {
        f();
    } catch (const E& e) {
        return e.what();
    }
    return "<no exception>";
}

bool mentions(const std::string& msg, const std::string& needle) {
    return msg.find(needle) != std::string::npos;
}

ModelBundle small_bundle() {
    ModelBundle b;
    b.config_text = config_to_text(preset_config("desk"));
    b.codebook.k = 2;
    b.codebook.d = 3;
    b.codebook.centroids = {0.5, -1.0, 2.0, 3.5, 0.0, -0.25};
    b.codebook.whitening.d = 3;
    b.codebook.whitening.epsilon = 0.5;
    b.codebook.whitening.mean = {0.1, 0.2, 0.3};
    b.codebook.whitening.matrix = {1, 0, 0, 0, 2, 0, 0, 0, 3};
    b.maps = init_quadrant_maps(2);
    b.classifier.input_dim = 8;  // p * k
    b.classifier.hidden = 3;
    b.classifier.t = 2;
    b.classifier.act = Activation::tanh;
    b.classifier.v1.assign(24, 0.125);
    b.classifier.b1 = {0.0, -1.0, 1.0};
    b.classifier.v2.assign(6, -0.5);
    b.classifier.b2 = {0.75, 0.25};
    b.stats.frozen = true;
    b.stats.mu.assign(8, 1.5);
    b.stats.sigma.assign(8, 2.0);
    b.stats.mu[3] = -0.0625;
    return b;
}

}  // namespace

TEST_CASE("config text round-trips through parse") {
    TrainConfig desk = preset_config("desk");
    std::string text = config_to_text(desk);
    TrainConfig parsed = parse_config_text(text);
    CHECK(config_to_text(parsed) == text);
    CHECK(parsed.n == 16);
    CHECK(parsed.w == 4);
    CHECK(parsed.k == 16);
    CHECK(parsed.t == 2);
    CHECK(parsed.eta_pool == 5e-4);
    CHECK(parsed.data_source == "synthetic");
}

TEST_CASE("config parser handles comments, blanks, and whitespace") {
    TrainConfig cfg = parse_config_text(
        "# a comment\n"
        "\n"
        "  n = 16   \n"
        "w=4      # trailing comment\n"
        "activation =\ttanh\n");
    CHECK(cfg.n == 16);
    CHECK(cfg.w == 4);
    CHECK(cfg.activation == "tanh");
    CHECK(cfg.k == 400);  // untouched keys keep the base values
}

TEST_CASE("config parser reports the offending 1-based line") {
    std::string msg = thrown_message<FormatError>(
        [] { parse_config_text("n = 8\nbogus = 3\n"); });
    CHECK(mentions(msg, "line 2"));
    CHECK(mentions(msg, "bogus"));

    msg = thrown_message<FormatError>([] { parse_config_text("n = abc\n"); });
    CHECK(mentions(msg, "line 1"));
    CHECK(mentions(msg, "abc"));

    msg = thrown_message<FormatError>([] { parse_config_text("# fine\nn 8\n"); });
    CHECK(mentions(msg, "line 2"));

    msg = thrown_message<FormatError>([] { parse_config_text("= 8\n"); });
    CHECK(mentions(msg, "line 1"));

    CHECK_THROWS_AS(parse_config_text("eta_pool = 1e\n"), FormatError);
    CHECK_THROWS_AS(parse_config_text("seed = -1\n"), FormatError);
    CHECK_THROWS_AS(parse_config_text("k = 12x\n"), FormatError);
}

TEST_CASE("presets") {
    CHECK(config_to_text(preset_config("paper")) == config_to_text(TrainConfig()));
    TrainConfig desk = preset_config("desk");
    CHECK(desk.hidden == 16);
    CHECK(desk.phase1_examples == 4000);
    CHECK(desk.phase2_examples == 1500);
    CHECK(desk.val_check_interval == 250);
    CHECK(desk.eta_net == 5e-2);
    CHECK(desk.codebook_patches == 5000);
    CHECK(desk.cache_images == 256);
    std::string msg =
        thrown_message<ArgumentError>([] { preset_config("gigantic"); });
    CHECK(mentions(msg, "gigantic"));
}

TEST_CASE("validate_config accepts the presets and rejects bad fields") {
    CHECK_NOTHROW(validate_config(preset_config("paper")));
    CHECK_NOTHROW(validate_config(preset_config("desk")));

    auto broken = [](auto&& mutate) {
        TrainConfig cfg = preset_config("desk");
        mutate(cfg);
        return thrown_message<ArgumentError>([&] { validate_config(cfg); });
    };
    CHECK(mentions(broken([](TrainConfig& c) { c.n = 0; }), "n"));
    CHECK(mentions(broken([](TrainConfig& c) { c.w = 17; }), "w"));
    CHECK(mentions(broken([](TrainConfig& c) { c.stride = 0; }), "stride"));
    CHECK(mentions(broken([](TrainConfig& c) { c.w = 16; }), "grid"));
    CHECK(mentions(broken([](TrainConfig& c) { c.k = 0; }), "k"));
    CHECK(mentions(broken([](TrainConfig& c) { c.p = 3; }), "quadrant"));
    CHECK(mentions(broken([](TrainConfig& c) { c.hidden = 0; }), "hidden"));
    CHECK(mentions(broken([](TrainConfig& c) { c.t = 1; }), "t"));
    CHECK(mentions(broken([](TrainConfig& c) { c.batch_size = 0; }), "batch"));
    CHECK(mentions(broken([](TrainConfig& c) { c.eta_pool = -1e-9; }), "eta_pool"));
    CHECK(mentions(broken([](TrainConfig& c) { c.eta_net = 0; }), "eta_net"));
    CHECK(mentions(broken([](TrainConfig& c) { c.val_check_interval = 0; }), "val_check"));
    CHECK(mentions(broken([](TrainConfig& c) { c.trials = 0; }), "trials"));
    CHECK(mentions(broken([](TrainConfig& c) { c.eps_norm = -1; }), "eps_norm"));
    CHECK(mentions(broken([](TrainConfig& c) { c.eps_zca = -1; }), "eps_zca"));
    CHECK(mentions(broken([](TrainConfig& c) { c.sigma_floor = 0; }), "sigma_floor"));
    CHECK(mentions(broken([](TrainConfig& c) { c.kmeans_iters = 0; }), "kmeans"));
    CHECK(mentions(broken([](TrainConfig& c) { c.codebook_patches = 15; }), "codebook"));
    CHECK(mentions(broken([](TrainConfig& c) { c.train_fraction = 1.0; }), "fraction"));
    CHECK(mentions(broken([](TrainConfig& c) { c.train_fraction = 0.0; }), "fraction"));
    CHECK(mentions(broken([](TrainConfig& c) { c.data_source = "disk"; }), "data_source"));
    CHECK(mentions(broken([](TrainConfig& c) { c.synthetic_count = 0; }), "synthetic_count"));
    CHECK(mentions(broken([](TrainConfig& c) { c.activation = "relu"; }), "relu"));
}

TEST_CASE("config files load through the same parser") {
    TempDir dir;
    atomic_write_file(dir.file("a.cfg"), "n = 16\nw = 4\n");
    TrainConfig cfg = load_config_file(dir.file("a.cfg"));
    CHECK(cfg.n == 16);
    CHECK_THROWS_AS(load_config_file(dir.file("missing.cfg")), DataError);
}

TEST_CASE("bundle serialization round-trips bit-exactly") {
    ModelBundle b = small_bundle();
    std::string bytes = serialize_bundle(b);
    CHECK(bytes.compare(0, 4, "PMDL") == 0);

    ModelBundle r = deserialize_bundle(bytes);
    CHECK(r.config_text == b.config_text);
    CHECK(r.codebook.k == b.codebook.k);
    CHECK(r.codebook.d == b.codebook.d);
    CHECK(r.codebook.centroids == b.codebook.centroids);
    CHECK(r.codebook.whitening.d == b.codebook.whitening.d);
    CHECK(r.codebook.whitening.epsilon == b.codebook.whitening.epsilon);
    CHECK(r.codebook.whitening.mean == b.codebook.whitening.mean);
    CHECK(r.codebook.whitening.matrix == b.codebook.whitening.matrix);
    CHECK(r.maps.p == b.maps.p);
    CHECK(r.maps.P == b.maps.P);
    CHECK(r.maps.weights == b.maps.weights);
    CHECK(r.classifier.input_dim == b.classifier.input_dim);
    CHECK(r.classifier.act == Activation::tanh);
    CHECK(r.classifier.v1 == b.classifier.v1);
    CHECK(r.classifier.b1 == b.classifier.b1);
    CHECK(r.classifier.v2 == b.classifier.v2);
    CHECK(r.classifier.b2 == b.classifier.b2);
    CHECK(r.stats.frozen == b.stats.frozen);
    CHECK(r.stats.mu == b.stats.mu);
    CHECK(r.stats.sigma == b.stats.sigma);

    CHECK(serialize_bundle(r) == bytes);  // canonical encoding
}

TEST_CASE("bundle files round-trip on disk") {
    TempDir dir;
    ModelBundle b = small_bundle();
    save_bundle(dir.file("m.pmdl"), b);
    ModelBundle r = load_bundle(dir.file("m.pmdl"));
    CHECK(serialize_bundle(r) == serialize_bundle(b));
    CHECK(!std::filesystem::exists(dir.file("m.pmdl") + ".tmp"));
    CHECK_THROWS_AS(load_bundle(dir.file("missing.pmdl")), DataError);
}

TEST_CASE("bundle deserialization rejects malformed input") {
    std::string bytes = serialize_bundle(small_bundle());

    std::string bad_magic = bytes;
    bad_magic[0] = 'X';
    CHECK(mentions(thrown_message<FormatError>([&] { deserialize_bundle(bad_magic); }),
                   "magic"));

    std::string bad_version = bytes;
    bad_version[4] = 2;
    CHECK(mentions(thrown_message<FormatError>([&] { deserialize_bundle(bad_version); }),
                   "version"));

    CHECK_THROWS_AS(deserialize_bundle(bytes.substr(0, bytes.size() - 1)), FormatError);
    CHECK_THROWS_AS(deserialize_bundle(bytes.substr(0, 17)), FormatError);
    CHECK_THROWS_AS(deserialize_bundle(bytes + "z"), FormatError);
    CHECK_THROWS_AS(deserialize_bundle(""), FormatError);
}

TEST_CASE("bundle deserialization cross-checks dimensions") {
    ModelBundle b = small_bundle();
    b.stats.mu.resize(7);  // should be p*k = 8
    std::string msg = thrown_message<FormatError>(
        [&] { deserialize_bundle(serialize_bundle(b)); });
    CHECK(mentions(msg, "stats mu"));

    b = small_bundle();
    b.codebook.d = 4;  // no longer matches whitening.d
    b.codebook.centroids.assign(8, 0.0);
    msg = thrown_message<FormatError>([&] { deserialize_bundle(serialize_bundle(b)); });
    CHECK(mentions(msg, "whitening"));

    b = small_bundle();
    b.classifier.input_dim = 6;
    b.classifier.v1.assign(18, 0.0);
    msg = thrown_message<FormatError>([&] { deserialize_bundle(serialize_bundle(b)); });
    CHECK(mentions(msg, "input_dim"));
}

TEST_CASE("pgm encoding scales to the full byte range") {
    std::string bytes = pgm_bytes({0.0, 1.0, 2.0, 3.0}, 2, 2);
    std::string expect = "P5\n2 2\n255\n";
    expect.push_back(static_cast<char>(0));
    expect.push_back(static_cast<char>(85));
    expect.push_back(static_cast<char>(170));
    expect.push_back(static_cast<char>(255));
    CHECK(bytes == expect);

    // negative values shift, scaling is min/max based
    std::string shifted = pgm_bytes({-3.0, -2.0, -1.0, 0.0}, 2, 2);
    CHECK(shifted == expect);

    std::string flat = pgm_bytes({7.5, 7.5, 7.5}, 3, 1);
    CHECK(flat.substr(flat.size() - 3) == std::string(3, '\0'));

    CHECK_THROWS_AS(pgm_bytes({1.0, 2.0}, 2, 2), ArgumentError);
    CHECK_THROWS_AS(pgm_bytes({}, 0, 0), ArgumentError);
}

TEST_CASE("pgm files land on disk atomically") {
    TempDir dir;
    write_pgm(dir.file("m.pgm"), {0.0, 0.5, 1.0, 0.25}, 2, 2);
    std::string bytes = read_file(dir.file("m.pgm"));
    CHECK(bytes.compare(0, 3, "P5\n") == 0);
    CHECK(bytes.size() == 11 + 4);
    CHECK(!std::filesystem::exists(dir.file("m.pgm") + ".tmp"));
}

TEST_CASE("pmap bytes round-trip and reject corruption") {
    PoolMapSet maps = init_quadrant_maps(5);
    maps.at(2, 3, 3) = -0.125;  // make the payload asymmetric
    std::string bytes = pmap_bytes(maps);
    CHECK(bytes.compare(0, 4, "PMAP") == 0);
    CHECK(bytes.size() == 16 + maps.weights.size() * 8);

    PoolMapSet r = parse_pmap(bytes);
    CHECK(r.p == maps.p);
    CHECK(r.P == maps.P);
    CHECK(r.weights == maps.weights);

    std::string bad = bytes;
    bad[1] = 'X';
    CHECK(mentions(thrown_message<FormatError>([&] { parse_pmap(bad); }), "magic"));
    bad = bytes;
    bad[4] = 9;
    CHECK(mentions(thrown_message<FormatError>([&] { parse_pmap(bad); }), "version"));
    CHECK_THROWS_AS(parse_pmap(bytes.substr(0, bytes.size() - 8)), FormatError);
    CHECK_THROWS_AS(parse_pmap(bytes + "pad"), FormatError);
    CHECK_THROWS_AS(parse_pmap(""), FormatError);

    std::string zero_dims = bytes.substr(0, 8);
    put_u32(zero_dims, 0);
    put_u32(zero_dims, 2);
    CHECK(mentions(thrown_message<FormatError>([&] { parse_pmap(zero_dims); }), "dimensions"));
}

TEST_CASE("pmap files round-trip on disk") {
    TempDir dir;
    PoolMapSet maps = init_quadrant_maps(4);
    write_pmap(dir.file("maps.pmap"), maps);
    PoolMapSet r = read_pmap(dir.file("maps.pmap"));
    CHECK(r.weights == maps.weights);
    CHECK_THROWS_AS(read_pmap(dir.file("missing.pmap")), DataError);
}

TEST_CASE("atomic_write_file replaces content without leftovers") {
    TempDir dir;
    atomic_write_file(dir.file("f.bin"), "first");
    atomic_write_file(dir.file("f.bin"), std::string("sec\0ond", 7));
    std::string bytes = read_file(dir.file("f.bin"));
    CHECK(bytes == std::string("sec\0ond", 7));
    CHECK(!std::filesystem::exists(dir.file("f.bin") + ".tmp"));
    CHECK_THROWS_AS(atomic_write_file(dir.file("no/such/dir/f.bin"), "x"), DataError);
    CHECK_THROWS_AS(read_file(dir.file("absent.bin")), DataError);
}

TEST_CASE("BinReader reports offsets and validates lengths") {
    std::string buf;
    put_u32(buf, 7);
    put_f64_array(buf, {1.0, 2.0});
    put_string(buf, "hi");
    BinReader r{buf, 0};
    CHECK(r.u32() == 7);
    CHECK(r.f64_array(10) == std::vector<double>{1.0, 2.0});
    CHECK(r.str(10) == "hi");
    CHECK_NOTHROW(r.expect_end());

    BinReader shortr{buf, 0};
    (void)shortr.u32();
    CHECK_THROWS_AS(shortr.expect_end(), FormatError);

    std::string longlen;
    put_u64(longlen, 1000);
    BinReader r2{longlen, 0};
    CHECK_THROWS_AS(r2.f64_array(10), FormatError);

    std::string truncated;
    put_u64(truncated, 2);
    put_f64(truncated, 1.0);  // promises 2 doubles, provides 1
    BinReader r3{truncated, 0};
    CHECK_THROWS_AS(r3.f64_array(10), FormatError);
}
