#include "poolmaps/config.hpp"

#include <cstddef>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "poolmaps/binio.hpp"
#include "poolmaps/common.hpp"
#include "poolmaps/preprocess.hpp"

namespace poolmaps {

namespace {

struct Key {
    const char* name;
    std::function<void(TrainConfig&, const std::string&)> set;
    std::function<std::string(const TrainConfig&)> get;
};

long long parse_int(const std::string& v) {
    std::size_t used = 0;
    long long x = std::stoll(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return x;
}

std::uint64_t parse_u64(const std::string& v) {
    if (!v.empty() && v[0] == '-') throw std::invalid_argument(v);
    std::size_t used = 0;
    std::uint64_t x = std::stoull(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return x;
}

double parse_real(const std::string& v) {
    std::size_t used = 0;
    double x = std::stod(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return x;
}

Key int_key(const char* name, int TrainConfig::* field) {
    return {name,
            [field](TrainConfig& c, const std::string& v) {
                c.*field = static_cast<int>(parse_int(v));
            },
            [field](const TrainConfig& c) { return std::to_string(c.*field); }};
}

Key u64_key(const char* name, std::uint64_t TrainConfig::* field) {
    return {name, [field](TrainConfig& c, const std::string& v) { c.*field = parse_u64(v); },
            [field](const TrainConfig& c) { return std::to_string(c.*field); }};
}

Key real_key(const char* name, double TrainConfig::* field) {
    return {name, [field](TrainConfig& c, const std::string& v) { c.*field = parse_real(v); },
            [field](const TrainConfig& c) { return format_double(c.*field); }};
}

Key str_key(const char* name, std::string TrainConfig::* field) {
    return {name, [field](TrainConfig& c, const std::string& v) { c.*field = v; },
            [field](const TrainConfig& c) { return c.*field; }};
}

const std::vector<Key>& key_table() {
    static const std::vector<Key> keys = {
        int_key("n", &TrainConfig::n),
        int_key("w", &TrainConfig::w),
        int_key("stride", &TrainConfig::stride),
        int_key("k", &TrainConfig::k),
        int_key("p", &TrainConfig::p),
        int_key("hidden", &TrainConfig::hidden),
        int_key("t", &TrainConfig::t),
        int_key("batch_size", &TrainConfig::batch_size),
        real_key("eta_pool", &TrainConfig::eta_pool),
        real_key("eta_net", &TrainConfig::eta_net),
        u64_key("phase1_examples", &TrainConfig::phase1_examples),
        u64_key("phase2_examples", &TrainConfig::phase2_examples),
        u64_key("val_check_interval", &TrainConfig::val_check_interval),
        int_key("trials", &TrainConfig::trials),
        u64_key("seed", &TrainConfig::seed),
        real_key("eps_norm", &TrainConfig::eps_norm),
        real_key("eps_zca", &TrainConfig::eps_zca),
        real_key("sigma_floor", &TrainConfig::sigma_floor),
        int_key("kmeans_iters", &TrainConfig::kmeans_iters),
        u64_key("codebook_patches", &TrainConfig::codebook_patches),
        str_key("activation", &TrainConfig::activation),
        real_key("train_fraction", &TrainConfig::train_fraction),
        u64_key("norm_fit_images", &TrainConfig::norm_fit_images),
        u64_key("cache_images", &TrainConfig::cache_images),
        str_key("data_source", &TrainConfig::data_source),
        int_key("synthetic_count", &TrainConfig::synthetic_count),
    };
    return keys;
}

std::string trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    std::size_t b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

}  // namespace

TrainConfig parse_config_text(const std::string& text, TrainConfig base) {
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        std::size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw FormatError("config line " + std::to_string(lineno) +
                              ": expected 'key = value'");
        std::string key = trim(line.substr(0, eq));
        std::string value = trim(line.substr(eq + 1));
        if (key.empty() || value.empty())
            throw FormatError("config line " + std::to_string(lineno) + ": empty key or value");
        const Key* found = nullptr;
        for (const Key& k : key_table())
            if (key == k.name) {
                found = &k;
                break;
            }
        if (!found)
            throw FormatError("config line " + std::to_string(lineno) + ": unknown key '" + key +
                              "'");
        try {
            found->set(base, value);
        } catch (const std::exception&) {
            throw FormatError("config line " + std::to_string(lineno) + ": bad value '" + value +
                              "' for key '" + key + "'");
        }
    }
    return base;
}

TrainConfig load_config_file(const std::string& path, TrainConfig base) {
    return parse_config_text(read_file(path), std::move(base));
}

std::string config_to_text(const TrainConfig& cfg) {
    std::string out;
    for (const Key& k : key_table()) {
        out += k.name;
        out += " = ";
        out += k.get(cfg);
        out += "\n";
    }
    return out;
}

TrainConfig preset_config(const std::string& name) {
    if (name == "paper") return TrainConfig();
    if (name == "desk") {
        TrainConfig c;
        c.n = 16;
        c.w = 4;
        c.k = 16;
        c.hidden = 16;
        c.t = 2;
        c.phase1_examples = 4000;
        c.phase2_examples = 1500;
        c.val_check_interval = 250;
        c.eta_pool = 5e-4;
        c.eta_net = 5e-2;
        c.codebook_patches = 5000;
        c.cache_images = 256;
        c.data_source = "synthetic";
        return c;
    }
    throw ArgumentError("unknown preset '" + name + "' (expected paper or desk)");
}

void validate_config(const TrainConfig& cfg) {
    auto require = [](bool ok, const char* msg) {
        if (!ok) throw ArgumentError(std::string("config: ") + msg);
    };
    require(cfg.n >= 1, "n must be >= 1");
    require(cfg.w >= 1, "w must be >= 1");
    require(cfg.w <= cfg.n, "w must be <= n");
    require(cfg.stride >= 1, "stride must be >= 1");
    require(patch_grid_side(cfg.n, cfg.w, cfg.stride) >= 2, "patch grid side must be >= 2");
    require(cfg.k >= 1, "k must be >= 1");
    require(cfg.p == 4, "p must be 4 (maps are quadrant-initialized)");
    require(cfg.hidden >= 1, "hidden must be >= 1");
    require(cfg.t >= 2, "t must be >= 2");
    require(cfg.batch_size >= 1, "batch_size must be >= 1");
    require(cfg.eta_pool >= 0.0, "eta_pool must be >= 0");
    require(cfg.eta_net > 0.0, "eta_net must be > 0");
    require(cfg.val_check_interval >= 1, "val_check_interval must be >= 1");
    require(cfg.trials >= 1, "trials must be >= 1");
    require(cfg.eps_norm >= 0.0, "eps_norm must be >= 0");
    require(cfg.eps_zca >= 0.0, "eps_zca must be >= 0");
    require(cfg.sigma_floor > 0.0, "sigma_floor must be > 0");
    require(cfg.kmeans_iters >= 1, "kmeans_iters must be >= 1");
    require(cfg.codebook_patches >= static_cast<std::uint64_t>(cfg.k),
            "codebook_patches must be >= k");
    require(cfg.train_fraction > 0.0 && cfg.train_fraction < 1.0,
            "train_fraction must be in (0, 1)");
    require(cfg.data_source == "cifar" || cfg.data_source == "synthetic",
            "data_source must be cifar or synthetic");
    require(cfg.synthetic_count >= 1, "synthetic_count must be >= 1");
    cfg.activation_kind();  // throws on unknown activation
}

}  // namespace poolmaps
