#include "divex/ingest.hpp"

#include <cmath>
#include <cstdio>
#include <map>
#include <regex>

#include "divex/error.hpp"
#include "divex/features.hpp"

namespace divex {

void validate(const ShotParams& params) {
  if (!(params.cutThreshold > 0.0 && params.cutThreshold <= 2.0)) {
    fail(ErrorCode::InvalidArgument, "cutThreshold must lie in (0, 2]");
  }
  if (params.minShotFrames < 1) fail(ErrorCode::InvalidArgument, "minShotFrames must be positive");
}

std::string frame_file_name(std::uint64_t index) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "frame_%06llu.ppm", static_cast<unsigned long long>(index));
  return buf;
}

std::vector<Frame> read_frames(const std::filesystem::path& framePath) {
  std::error_code ec;
  if (!std::filesystem::is_directory(framePath, ec)) {
    fail(ErrorCode::Io, "frame directory not found: '" + framePath.string() + "'");
  }
  static const std::regex pattern(R"(frame_(\d{6,})\.ppm)");
  std::map<std::uint64_t, std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(framePath)) {
    if (!entry.is_regular_file()) continue;
    const auto name = entry.path().filename().string();
    std::smatch m;
    if (!std::regex_match(name, m, pattern)) continue;
    files.emplace(std::stoull(m[1].str()), entry.path());
  }

  std::vector<Frame> frames;
  frames.reserve(files.size());
  std::uint64_t expected = 0;
  for (const auto& [index, path] : files) {
    if (index != expected) {
      fail(ErrorCode::FrameGap, "'" + framePath.string() + "': missing frame index " + std::to_string(expected) + " (" +
                                    frame_file_name(expected) + ")");
    }
    frames.push_back(read_ppm(path));
    ++expected;
  }
  return frames;
}

std::vector<ShotRecord> detect_shots_from_histograms(std::span<const std::vector<double>> histograms,
                                                     const ShotParams& params, const std::string& videoId) {
  validate(params);
  if (histograms.empty()) fail(ErrorCode::EmptyInput, "cannot detect shots in an empty frame sequence");

  std::vector<ShotRecord> shots;
  auto close = [&](std::uint64_t start, std::uint64_t end) {
    shots.push_back(ShotRecord{videoId, shots.size(), start, end, (start + end) / 2});
  };

  std::uint64_t start = 0;
  for (std::size_t t = 1; t < histograms.size(); ++t) {
    const auto& a = histograms[t - 1];
    const auto& b = histograms[t];
    double d = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) d += std::abs(a[i] - b[i]);
    if (d > params.cutThreshold && t - start >= params.minShotFrames) {
      close(start, t - 1);
      start = t;
    }
  }
  close(start, histograms.size() - 1);
  return shots;
}

std::vector<ShotRecord> detect_shots(std::span<const Frame> frames, const ShotParams& params, const std::string& videoId) {
  validate(params);
  if (frames.empty()) fail(ErrorCode::EmptyInput, "cannot detect shots in an empty frame sequence");
  std::vector<std::vector<double>> hists;
  hists.reserve(frames.size());
  for (const auto& f : frames) hists.push_back(color_histogram(f).values);
  return detect_shots_from_histograms(hists, params, videoId);
}

std::vector<FrameSampleRecord> sample_uniform(const VideoRecord& video) {
  validate(video);
  const auto last = video.last_frame();
  std::vector<FrameSampleRecord> out;
  for (std::uint64_t t = 0; static_cast<double>(t) < video.durationSec; ++t) {
    const auto idx = static_cast<std::uint64_t>(std::llround(static_cast<double>(t) * video.fps));
    out.push_back(FrameSampleRecord{video.videoId, t, std::min(idx, last)});
  }
  return out;
}

}  // namespace divex
