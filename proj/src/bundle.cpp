#include "poolmaps/bundle.hpp"

#include "poolmaps/binio.hpp"
#include "poolmaps/common.hpp"

namespace poolmaps {

namespace {

constexpr char magic[4] = {'P', 'M', 'D', 'L'};
constexpr std::uint64_t max_config_bytes = 1 << 20;

std::vector<double> sized_array(BinReader& r, std::uint64_t expected, const char* what) {
    std::vector<double> v = r.f64_array(expected);
    if (v.size() != expected)
        throw FormatError(std::string("bundle: ") + what + " has " + std::to_string(v.size()) +
                          " entries, expected " + std::to_string(expected));
    return v;
}

int checked_dim(std::uint32_t v, const char* what) {
    if (v == 0 || v > (1u << 24)) throw FormatError(std::string("bundle: bad ") + what);
    return static_cast<int>(v);
}

}  // namespace

std::string serialize_bundle(const ModelBundle& bundle) {
    std::string out;
    out.append(magic, 4);
    put_u32(out, ModelBundle::format_version);
    put_string(out, bundle.config_text);

    const WhiteningTransform& wt = bundle.codebook.whitening;
    put_u32(out, static_cast<std::uint32_t>(wt.d));
    put_f64(out, wt.epsilon);
    put_f64_array(out, wt.mean);
    put_f64_array(out, wt.matrix);

    put_u32(out, static_cast<std::uint32_t>(bundle.codebook.k));
    put_u32(out, static_cast<std::uint32_t>(bundle.codebook.d));
    put_f64_array(out, bundle.codebook.centroids);

    put_u32(out, static_cast<std::uint32_t>(bundle.maps.p));
    put_u32(out, static_cast<std::uint32_t>(bundle.maps.P));
    put_f64_array(out, bundle.maps.weights);

    const ClassifierState& cls = bundle.classifier;
    put_u32(out, static_cast<std::uint32_t>(cls.input_dim));
    put_u32(out, static_cast<std::uint32_t>(cls.hidden));
    put_u32(out, static_cast<std::uint32_t>(cls.t));
    put_u32(out, cls.act == Activation::sigmoid ? 0 : 1);
    put_f64_array(out, cls.v1);
    put_f64_array(out, cls.b1);
    put_f64_array(out, cls.v2);
    put_f64_array(out, cls.b2);

    put_u32(out, bundle.stats.frozen ? 1 : 0);
    put_f64_array(out, bundle.stats.mu);
    put_f64_array(out, bundle.stats.sigma);
    return out;
}

ModelBundle deserialize_bundle(const std::string& bytes) {
    BinReader r{bytes};
    if (bytes.size() < 4 || bytes.compare(0, 4, magic, 4) != 0)
        throw FormatError("bundle: bad magic (expected PMDL)");
    r.at = 4;
    std::uint32_t version = r.u32();
    if (version != ModelBundle::format_version)
        throw FormatError("bundle: unsupported version " + std::to_string(version) +
                          " (expected " + std::to_string(ModelBundle::format_version) + ")");

    ModelBundle b;
    b.config_text = r.str(max_config_bytes);

    WhiteningTransform& wt = b.codebook.whitening;
    wt.d = checked_dim(r.u32(), "whitening d");
    wt.epsilon = r.f64();
    std::uint64_t d = wt.d;
    wt.mean = sized_array(r, d, "whitening mean");
    wt.matrix = sized_array(r, d * d, "whitening matrix");

    b.codebook.k = checked_dim(r.u32(), "codebook k");
    b.codebook.d = checked_dim(r.u32(), "codebook d");
    if (b.codebook.d != wt.d) throw FormatError("bundle: codebook d differs from whitening d");
    b.codebook.centroids = sized_array(
        r, static_cast<std::uint64_t>(b.codebook.k) * b.codebook.d, "codebook centroids");

    b.maps.p = checked_dim(r.u32(), "maps p");
    b.maps.P = checked_dim(r.u32(), "maps P");
    b.maps.weights = sized_array(
        r, static_cast<std::uint64_t>(b.maps.p) * b.maps.P * b.maps.P, "map weights");

    ClassifierState& cls = b.classifier;
    cls.input_dim = checked_dim(r.u32(), "classifier input_dim");
    cls.hidden = checked_dim(r.u32(), "classifier hidden");
    cls.t = checked_dim(r.u32(), "classifier t");
    std::uint32_t act = r.u32();
    if (act > 1) throw FormatError("bundle: bad activation code " + std::to_string(act));
    cls.act = act == 0 ? Activation::sigmoid : Activation::tanh;
    cls.v1 = sized_array(r, static_cast<std::uint64_t>(cls.hidden) * cls.input_dim, "v1");
    cls.b1 = sized_array(r, cls.hidden, "b1");
    cls.v2 = sized_array(r, static_cast<std::uint64_t>(cls.t) * cls.hidden, "v2");
    cls.b2 = sized_array(r, cls.t, "b2");

    std::uint32_t frozen = r.u32();
    if (frozen > 1) throw FormatError("bundle: bad frozen flag");
    b.stats.frozen = frozen == 1;
    std::uint64_t feat = static_cast<std::uint64_t>(b.maps.p) * b.codebook.k;
    b.stats.mu = sized_array(r, feat, "stats mu");
    b.stats.sigma = sized_array(r, feat, "stats sigma");
    if (static_cast<std::uint64_t>(cls.input_dim) != feat)
        throw FormatError("bundle: classifier input_dim differs from p*k");
    r.expect_end();
    return b;
}

void save_bundle(const std::string& path, const ModelBundle& bundle) {
    atomic_write_file(path, serialize_bundle(bundle));
}

ModelBundle load_bundle(const std::string& path) { return deserialize_bundle(read_file(path)); }

}  // namespace poolmaps
