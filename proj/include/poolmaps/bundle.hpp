#ifndef POOLMAPS_BUNDLE_HPP
#define POOLMAPS_BUNDLE_HPP

#include <cstdint>
#include <string>

#include "poolmaps/classifier.hpp"
#include "poolmaps/codebook.hpp"
#include "poolmaps/pooling.hpp"

namespace poolmaps {

// Everything needed to evaluate or export a trained model, persisted as magic
// "PMDL" + version + little-endian arrays. Save -> load round-trips every
// array bit-exactly; a version mismatch or any dimension inconsistency is
// rejected with FormatError.
struct ModelBundle {
    static constexpr std::uint32_t format_version = 1;

    std::string config_text;  // key = value snapshot of the training config
    Codebook codebook;        // includes the whitening transform
    PoolMapSet maps;
    ClassifierState classifier;
    NormStats stats;
};

std::string serialize_bundle(const ModelBundle& bundle);
ModelBundle deserialize_bundle(const std::string& bytes);

void save_bundle(const std::string& path, const ModelBundle& bundle);
ModelBundle load_bundle(const std::string& path);

}  // namespace poolmaps

#endif
