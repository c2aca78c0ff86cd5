#include "poolmaps/export.hpp"

#include <algorithm>
#include <cmath>

#include "poolmaps/binio.hpp"
#include "poolmaps/common.hpp"

namespace poolmaps {

std::string pgm_bytes(const std::vector<double>& values, int width, int height) {
    if (width < 1 || height < 1) throw ArgumentError("pgm_bytes: empty image");
    if (values.size() != static_cast<std::size_t>(width) * height)
        throw ArgumentError("pgm_bytes: value count does not match dimensions");
    auto [lo, hi] = std::minmax_element(values.begin(), values.end());
    double min = *lo, span = *hi - *lo;
    std::string out = "P5\n" + std::to_string(width) + " " + std::to_string(height) + "\n255\n";
    for (double v : values) {
        int byte = span > 0.0 ? static_cast<int>(std::lround((v - min) / span * 255.0)) : 0;
        out.push_back(static_cast<char>(std::clamp(byte, 0, 255)));
    }
    return out;
}

void write_pgm(const std::string& path, const std::vector<double>& values, int width, int height) {
    atomic_write_file(path, pgm_bytes(values, width, height));
}

std::string pmap_bytes(const PoolMapSet& maps) {
    std::string out;
    out.append("PMAP", 4);
    put_u32(out, pmap_version);
    put_u32(out, static_cast<std::uint32_t>(maps.p));
    put_u32(out, static_cast<std::uint32_t>(maps.P));
    for (double w : maps.weights) put_f64(out, w);
    return out;
}

void write_pmap(const std::string& path, const PoolMapSet& maps) {
    atomic_write_file(path, pmap_bytes(maps));
}

PoolMapSet parse_pmap(const std::string& bytes) {
    if (bytes.size() < 16 || bytes.compare(0, 4, "PMAP", 4) != 0)
        throw FormatError("pmap: bad magic (expected PMAP)");
    BinReader r{bytes, 4};
    std::uint32_t version = r.u32();
    if (version != pmap_version)
        throw FormatError("pmap: unsupported version " + std::to_string(version));
    PoolMapSet maps;
    maps.p = static_cast<int>(r.u32());
    maps.P = static_cast<int>(r.u32());
    if (maps.p < 1 || maps.P < 1 || maps.p > (1 << 20) || maps.P > (1 << 20))
        throw FormatError("pmap: bad dimensions");
    std::uint64_t count = static_cast<std::uint64_t>(maps.p) * maps.P * maps.P;
    if (bytes.size() != 16 + count * 8)
        throw FormatError("pmap: payload is " + std::to_string(bytes.size() - 16) +
                          " bytes, expected " + std::to_string(count * 8));
    maps.weights.resize(count);
    for (auto& w : maps.weights) w = r.f64();
    return maps;
}

PoolMapSet read_pmap(const std::string& path) { return parse_pmap(read_file(path)); }

}  // namespace poolmaps
