#pragma once

#include <string>
#include <utility>
#include <vector>

#include "giant/types.hpp"
#include "json.hpp"

namespace giant {

// Checkpoint files are a single-line JSON manifest followed by raw
// little-endian binary blocks in manifest order. The manifest's "blocks"
// array records name, kind ("f64" or "i32") and shape of each block; a
// "created_unix" field carries the only timestamp in any artifact.

void write_checkpoint(
    const std::string& path, nlohmann::json manifest,
    const std::vector<std::pair<std::string, const Matrix*>>& f64_blocks,
    const std::vector<std::pair<std::string, const std::vector<int>*>>&
        i32_blocks = {});

struct LoadedCheckpoint {
  nlohmann::json manifest;
  std::vector<std::pair<std::string, Matrix>> f64_blocks;
  std::vector<std::pair<std::string, std::vector<int>>> i32_blocks;

  const Matrix& matrix(const std::string& name) const;
  const std::vector<int>& ints(const std::string& name) const;
};

LoadedCheckpoint read_checkpoint(const std::string& path);

// Byte comparison that ignores the manifest's created_unix field (the one
// place a timestamp may appear). Plain files without a manifest line are
// compared byte for byte.
bool artifacts_equal_ignoring_timestamp(const std::string& path_a,
                                        const std::string& path_b);

}  // namespace giant
