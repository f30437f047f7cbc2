#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "divex/catalog.hpp"
#include "divex/frame.hpp"

namespace divex {

struct ShotParams {
  double cutThreshold = 0.5;  // L1 distance between unit-mass histograms, in (0, 2]
  std::uint64_t minShotFrames = 10;
};

void validate(const ShotParams& params);

/// `frame_000042.ppm` for index 42.
std::string frame_file_name(std::uint64_t index);

/// Loads `frame_NNNNNN.ppm` files in index order. Numbering must start at 0
/// and be consecutive; a gap raises Error(FrameGap) naming the missing index.
std::vector<Frame> read_frames(const std::filesystem::path& framePath);

/// Histogram-difference cut detection. A cut opens a new shot at frame t when
/// the L1 distance between the colour histograms of frames t-1 and t exceeds
/// the threshold and the running shot already holds `minShotFrames` frames.
/// Keyframe is the midpoint frame of each shot.
std::vector<ShotRecord> detect_shots(std::span<const Frame> frames, const ShotParams& params,
                                     const std::string& videoId = {});

/// Same rule over precomputed per-frame colour histograms.
std::vector<ShotRecord> detect_shots_from_histograms(std::span<const std::vector<double>> histograms,
                                                     const ShotParams& params, const std::string& videoId = {});

/// One sample per whole second t < durationSec, at frame min(round(t*fps), lastFrame).
std::vector<FrameSampleRecord> sample_uniform(const VideoRecord& video);

}  // namespace divex
