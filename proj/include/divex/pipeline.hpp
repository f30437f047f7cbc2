#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "divex/ingest.hpp"

namespace divex {

struct IngestOptions {
  std::filesystem::path manifest;
  std::vector<std::filesystem::path> conceptFiles;
  std::filesystem::path outDir;
  std::uint64_t seed = 0;
  bool precomputeMaps = false;
  ShotParams shotParams;
};

struct IngestSummary {
  std::size_t videos = 0;
  std::size_t shots = 0;
  std::size_t samples = 0;
  std::size_t detections = 0;  // frame-level rows read from score files
  std::size_t sources = 0;
  std::size_t featuremaps = 0;
};

/// Full offline run: manifest -> frames -> shots and samples -> descriptors ->
/// concept scores -> shot aggregation -> index -> catalog files, plus the
/// optional featuremap precompute. Videos are decoded and described in
/// parallel; output is independent of scheduling.
IngestSummary run_ingest(const IngestOptions& options);

}  // namespace divex
