#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "poserefine/tensor.hpp"

// Versioned binary tensor container, byte layout (all integers little
// endian):
//
//   magic   8 bytes   "PRTENSR\n"
//   version u32       currently 1
//   count   u32       number of named entries
//   entry*  count times:
//     name_len u32, name bytes (UTF-8, no terminator),
//     rank u32, dims u32 * rank,
//     payload f32 * prod(dims), IEEE-754 little endian
//
// Entries are written and read in order; names must be unique.

namespace poserefine {

constexpr uint32_t kCheckpointFormatVersion = 1;

void save_checkpoint(
    const std::string& path,
    const std::vector<std::pair<std::string, const Tensor*>>& entries);

/// Returns entries in file order. Throws DataError on malformed input.
std::vector<std::pair<std::string, Tensor>> load_checkpoint(
    const std::string& path);

std::map<std::string, Tensor> load_checkpoint_map(const std::string& path);

}  // namespace poserefine
