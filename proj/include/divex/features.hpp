#pragma once

#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "divex/catalog.hpp"
#include "divex/concept_index.hpp"
#include "divex/feature_vector.hpp"
#include "divex/frame.hpp"

namespace divex {

// --- hand-crafted descriptors ----------------------------------------------

/// 128-bin HSV histogram (8 hue x 4 saturation x 4 value), L1-normalised.
/// Bin index = h*16 + s*4 + v.
FeatureVector color_histogram(const Frame& frame);

/// Bin of one pixel in the colour histogram.
std::size_t color_bin(Rgb pixel);

/// Edge categories of the texture descriptor, in bin order within a block.
/// Named by the direction in which intensity changes: a `Horizontal` edge is
/// crossed when moving left to right (a vertical stripe boundary).
enum class EdgeCategory { Horizontal = 0, Vertical, Diagonal45, Diagonal135, NonDirectional };

inline constexpr double kEdgeActivityThreshold = 11.0 / 255.0;

/// Edge histogram over a 4x4 grid of sub-images, five categories each, from
/// 2x2 difference operators on normalised luma. Each 5-bin block is
/// L1-normalised, or all zero when no 2x2 block reaches the activity threshold.
/// Throws Error(FrameTooSmall) below 8x8 pixels.
FeatureVector texture_descriptor(const Frame& frame);

/// Mean absolute luma change between consecutive frames per cell of a 4x4
/// grid, averaged over the sequence and divided by 255. A single frame yields
/// the zero vector.
FeatureVector motion_descriptor(std::span<const Frame> frames);

// --- deep concept scores ----------------------------------------------------

inline constexpr const char* kConceptCsvHeader = "videoId,tSec,source,conceptId,score";

/// Reads a `videoId,tSec,source,conceptId,score` CSV. Each row is checked
/// against the snapshot (known video, tSec is a sample second, score in
/// [0,1]); concept ids are lower-cased. Errors cite the file and line.
std::vector<ConceptDetection> load_concept_scores(const std::filesystem::path& path, const CatalogSnapshot& snapshot);

/// Sorted vocabulary per source, as observed in frame-level detections.
using Vocabulary = std::map<std::string, std::vector<std::string>>;
Vocabulary vocabulary_of(std::span<const ConceptDetection> detections);

/// Concept vector layout: sources ascending, each source's vocabulary
/// ascending, concatenated. One source gives exactly that source's layout.
std::size_t concept_dims(const Vocabulary& vocab);
FeatureVector concept_vector(const Vocabulary& vocab, std::span<const ConceptDetection> itemDetections);

struct ShotConcepts {
  std::vector<ConceptDetection> detections;  // shot granularity
  std::vector<FeatureEntry> vectors;         // one per shot, zero when nothing detected
};

/// Max-pools frame detections into the shots containing the sampled frames.
ShotConcepts aggregate_shot_concepts(std::span<const ConceptDetection> frameDetections, const CatalogSnapshot& snapshot,
                                     const Vocabulary& vocab);

}  // namespace divex
