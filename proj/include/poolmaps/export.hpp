#ifndef POOLMAPS_EXPORT_HPP
#define POOLMAPS_EXPORT_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "poolmaps/pooling.hpp"

namespace poolmaps {

// Map export: one 8-bit binary PGM per map for eyeballing, plus a raw PMAP
// dump of all maps for lossless round-trips.

// Binary PGM (magic P5, maxval 255), values min-max scaled to 0..255. A
// constant input (min == max) degenerates to all zeros.
std::string pgm_bytes(const std::vector<double>& values, int width, int height);
void write_pgm(const std::string& path, const std::vector<double>& values, int width, int height);

// PMAP: 16-byte header (magic "PMAP", u32 version, u32 p, u32 P, all
// little-endian) followed by p*P*P raw little-endian 64-bit floats.
constexpr std::uint32_t pmap_version = 1;
std::string pmap_bytes(const PoolMapSet& maps);
void write_pmap(const std::string& path, const PoolMapSet& maps);
PoolMapSet parse_pmap(const std::string& bytes);
PoolMapSet read_pmap(const std::string& path);

}  // namespace poolmaps

#endif
