#pragma once

#include <string>

#include "embedding.hpp"
#include "kernel.hpp"

namespace expose {

// A feature map together with trained weights, as stored on disk.
struct ModelBundle {
    RksFeatureMap map;
    ModelState state;
};

// File layout: one ASCII header line
//   EXPOSE-MODEL v1 d=<dim> r=<expansions> bandwidth=<g17> seed=<u64> t=<u64>
//     generator=<id> checksum=<16 hex digits>
// followed by 2r little-endian IEEE-754 doubles (the weights). The checksum
// is FNV-1a 64 over the first frequency row regenerated from the header and
// the weight bytes, so both generator drift and payload corruption surface as
// a checksum mismatch. Writing the same model twice produces identical bytes.
void save_model(const std::string& path, const ModelBundle& bundle);

ModelBundle load_model(const std::string& path);

} // namespace expose
