#include "divex/pipeline.hpp"

#include <future>
#include <map>

#include "divex/error.hpp"
#include "divex/explore.hpp"
#include "divex/features.hpp"

namespace divex {

namespace {

struct VideoOutput {
  std::vector<ShotRecord> shots;
  std::vector<FrameSampleRecord> samples;
  std::vector<FeatureEntry> features;
};

void describe(std::vector<FeatureEntry>& out, const ItemKey& key, const Frame& still, std::span<const Frame> window) {
  const auto keyStr = key.str();
  out.push_back({key, keyStr, color_histogram(still)});
  if (still.width() >= 8 && still.height() >= 8) out.push_back({key, keyStr, texture_descriptor(still)});
  out.push_back({key, keyStr, motion_descriptor(window)});
}

VideoOutput process_video(const VideoRecord& video, const ShotParams& params) {
  const auto frames = read_frames(video.framePath);
  if (frames.empty()) fail(ErrorCode::Validation, "video '" + video.videoId + "': no frames in '" + video.framePath.string() + "'");
  if (frames.size() != video.frame_count()) {
    fail(ErrorCode::Validation, "video '" + video.videoId + "': manifest implies " + std::to_string(video.frame_count()) +
                                    " frames, found " + std::to_string(frames.size()) + " in '" + video.framePath.string() + "'");
  }
  for (const auto& f : frames) {
    if (f.width() != frames.front().width() || f.height() != frames.front().height()) {
      fail(ErrorCode::DimensionMismatch, "video '" + video.videoId + "': frames differ in size");
    }
  }

  VideoOutput out;
  out.shots = detect_shots(frames, params, video.videoId);
  out.samples = sample_uniform(video);

  const std::span<const Frame> all(frames);
  for (const auto& s : out.shots) {
    describe(out.features, ItemKey::shot(video.videoId, s.shotIndex), frames[s.keyframe],
             all.subspan(s.startFrame, s.length()));
  }
  for (std::size_t i = 0; i < out.samples.size(); ++i) {
    const auto& s = out.samples[i];
    // Motion window runs to the next sample's frame (or the last frame).
    const auto end = i + 1 < out.samples.size() ? out.samples[i + 1].frameIndex : frames.size() - 1;
    const auto last = std::max<std::uint64_t>(end, s.frameIndex);
    describe(out.features, ItemKey::frame(video.videoId, s.tSec), frames[s.frameIndex],
             all.subspan(s.frameIndex, last - s.frameIndex + 1));
  }
  return out;
}

}  // namespace

IngestSummary run_ingest(const IngestOptions& options) {
  validate(options.shotParams);
  if (options.outDir.empty()) fail(ErrorCode::InvalidArgument, "output directory is required");
  for (const auto& p : options.conceptFiles) {
    if (!std::filesystem::is_regular_file(p)) fail(ErrorCode::Io, "concept score file not found: '" + p.string() + "'");
  }

  auto videos = load_manifest(options.manifest);

  std::vector<std::future<VideoOutput>> jobs;
  jobs.reserve(videos.size());
  for (const auto& v : videos) {
    jobs.push_back(std::async(std::launch::async, [&v, &options] { return process_video(v, options.shotParams); }));
  }

  CatalogData data;
  data.seed = options.seed;
  data.videos = videos;
  for (auto& job : jobs) {
    auto out = job.get();
    data.shots.insert(data.shots.end(), out.shots.begin(), out.shots.end());
    data.samples.insert(data.samples.end(), out.samples.begin(), out.samples.end());
    for (auto& f : out.features) data.features.push_back(std::move(f));
  }

  // Records-only view for validating score rows and mapping samples to shots.
  const auto records = CatalogSnapshot::make(CatalogData{data.videos, data.shots, data.samples, {}, {}, data.seed});

  std::vector<ConceptDetection> frameDetections;
  for (const auto& path : options.conceptFiles) {
    auto rows = load_concept_scores(path, *records);
    frameDetections.insert(frameDetections.end(), std::make_move_iterator(rows.begin()), std::make_move_iterator(rows.end()));
  }

  const auto vocab = vocabulary_of(frameDetections);
  if (concept_dims(vocab) > 0) {
    auto shotConcepts = aggregate_shot_concepts(frameDetections, *records, vocab);
    for (auto& f : shotConcepts.vectors) data.features.push_back(std::move(f));

    std::map<std::string, std::vector<ConceptDetection>> byItem;
    for (const auto& d : frameDetections) byItem[d.item.str()].push_back(d);
    for (const auto& s : data.samples) {
      auto key = ItemKey::frame(s.videoId, s.tSec);
      auto keyStr = key.str();
      auto it = byItem.find(keyStr);
      std::span<const ConceptDetection> dets;
      if (it != byItem.end()) dets = it->second;
      auto vec = concept_vector(vocab, dets);
      data.features.push_back({std::move(key), std::move(keyStr), std::move(vec)});
    }
    data.detections = frameDetections;
    data.detections.insert(data.detections.end(), shotConcepts.detections.begin(), shotConcepts.detections.end());
  }

  const auto snapshot = CatalogSnapshot::make(std::move(data));
  write_catalog(options.outDir, *snapshot);

  IngestSummary summary;
  summary.videos = snapshot->video_count();
  summary.shots = snapshot->shot_count();
  summary.samples = snapshot->sample_count();
  summary.detections = frameDetections.size();
  summary.sources = vocab.size();

  const auto mapsPath = options.outDir / kFeaturemapsFile;
  std::error_code ec;
  std::filesystem::remove(mapsPath, ec);
  if (options.precomputeMaps) {
    // Built from the persisted catalog, as the service sees it.
    const auto stored = load_catalog(options.outDir);
    std::vector<Featuremap> maps;
    for (const auto& [source, concepts] : vocab) {
      for (const auto& c : concepts) {
        maps.push_back(build_featuremap(*stored, FeaturemapRequest{c, source, kDefaultTopN, LayoutMode::Som,
                                                                   FeatureKind::Concept, options.seed}));
      }
    }
    write_featuremaps(mapsPath, maps);
    summary.featuremaps = maps.size();
  }
  return summary;
}

}  // namespace divex
