#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <mutex>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "divex/concept_index.hpp"
#include "divex/feature_vector.hpp"
#include "divex/item_key.hpp"

namespace divex {

struct VideoRecord {
  std::string videoId;
  std::filesystem::path framePath;
  double fps = 0.0;
  double durationSec = 0.0;
  std::string creationTime;  // ISO 8601 as given
  std::string title;
  std::string description;

  /// Frames implied by duration and rate: round(durationSec * fps), at least 1.
  std::uint64_t frame_count() const;
  std::uint64_t last_frame() const { return frame_count() - 1; }
  int creation_year() const;
  /// Milliseconds since the Unix epoch (UTC), for period ordering.
  std::int64_t creation_epoch_ms() const;
};

struct ShotRecord {
  std::string videoId;
  std::uint64_t shotIndex = 0;
  std::uint64_t startFrame = 0;
  std::uint64_t endFrame = 0;
  std::uint64_t keyframe = 0;

  std::uint64_t length() const { return endFrame - startFrame + 1; }
  friend bool operator==(const ShotRecord&, const ShotRecord&) = default;
};

struct FrameSampleRecord {
  std::string videoId;
  std::uint64_t tSec = 0;
  std::uint64_t frameIndex = 0;
  friend bool operator==(const FrameSampleRecord&, const FrameSampleRecord&) = default;
};

/// Parses an ISO 8601 calendar timestamp (`YYYY-MM-DD[THH:MM[:SS[.fff]]][Z|+HH:MM]`)
/// into UTC milliseconds. Throws Error(Validation) on malformed input.
std::int64_t parse_iso8601_ms(std::string_view text);

/// Checks the VideoRecord field invariants.
void validate(const VideoRecord& video);

/// Reads a newline-delimited JSON manifest. Relative frame paths are resolved
/// against the manifest's directory. Errors carry the 1-based line number.
std::vector<VideoRecord> load_manifest(const std::filesystem::path& path);

struct FeatureEntry {
  ItemKey item;
  std::string key;
  FeatureVector vector;
};

/// Per-video records grouped for lookup.
struct VideoEntry {
  VideoRecord record;
  std::vector<ShotRecord> shots;          // by shotIndex
  std::vector<FrameSampleRecord> samples;  // by tSec

  /// Index of the shot containing `frame`.
  std::size_t shot_containing(std::uint64_t frame) const;
};

struct ResolvedItem {
  const VideoEntry* video = nullptr;
  const ShotRecord* shot = nullptr;           // set for shot keys
  const FrameSampleRecord* sample = nullptr;  // set for frame keys
};

/// Raw material for a snapshot, as produced by ingestion or read from disk.
struct CatalogData {
  std::vector<VideoRecord> videos;
  std::vector<ShotRecord> shots;
  std::vector<FrameSampleRecord> samples;
  std::vector<FeatureEntry> features;
  std::vector<ConceptDetection> detections;  // frame and shot granularity
  std::uint64_t seed = 0;
};

/// Immutable view of an ingested catalog. Safe to share across threads.
class CatalogSnapshot {
 public:
  /// Validates referential integrity and builds lookup structures.
  /// Throws Error(CorruptCatalog) when records disagree.
  static std::shared_ptr<const CatalogSnapshot> make(CatalogData data);
  static std::shared_ptr<const CatalogSnapshot> empty_snapshot();

  bool empty() const { return videos_.empty(); }
  std::size_t video_count() const { return videos_.size(); }
  std::size_t shot_count() const { return shotCount_; }
  std::size_t sample_count() const { return sampleCount_; }
  std::uint64_t seed() const { return seed_; }

  const std::vector<VideoEntry>& videos() const { return videos_; }
  const VideoEntry* find_video(std::string_view videoId) const;

  /// Throws Error(UnknownVideo) or Error(OrdinalOutOfRange).
  ResolvedItem resolve(const ItemKey& key) const;

  const FeatureVector* feature(const ItemKey& key, FeatureKind kind) const;
  /// All stored vectors of one kind at one granularity, canonical key order.
  std::span<const FeatureEntry> features(Granularity g, FeatureKind kind) const;

  const ConceptIndex& concepts() const { return index_; }

  /// Everything needed to persist or rebuild this snapshot.
  CatalogData data() const;

 private:
  CatalogSnapshot() = default;

  static std::size_t slot(Granularity g, FeatureKind k) {
    return static_cast<std::size_t>(g) * kAllFeatureKinds.size() + static_cast<std::size_t>(k);
  }

  std::vector<VideoEntry> videos_;
  std::unordered_map<std::string, std::size_t> byId_;
  std::size_t shotCount_ = 0;
  std::size_t sampleCount_ = 0;
  std::uint64_t seed_ = 0;
  std::array<std::vector<FeatureEntry>, 8> features_;
  std::array<std::unordered_map<std::string, std::size_t>, 8> featureLookup_;
  ConceptIndex index_;
};

using SnapshotPtr = std::shared_ptr<const CatalogSnapshot>;

/// Holder of the current snapshot for one catalog directory. Readers take a
/// snapshot and keep it as long as they like; publishing swaps atomically.
class Catalog {
 public:
  Catalog();
  explicit Catalog(std::filesystem::path dir);

  SnapshotPtr snapshot() const;
  void publish(SnapshotPtr next);
  /// Re-reads the directory and publishes the result.
  void reload();

  const std::filesystem::path& directory() const { return dir_; }

 private:
  std::filesystem::path dir_;
  mutable std::mutex mutex_;
  SnapshotPtr current_;
};

// On-disk catalog layout (newline-delimited JSON, one file per record type).
inline constexpr const char* kVideosFile = "videos.jsonl";
inline constexpr const char* kShotsFile = "shots.jsonl";
inline constexpr const char* kSamplesFile = "samples.jsonl";
inline constexpr const char* kFeaturesFile = "features.jsonl";
inline constexpr const char* kConceptsFile = "concepts.jsonl";
inline constexpr const char* kCatalogMetaFile = "catalog.json";
inline constexpr const char* kFeaturemapsFile = "featuremaps.jsonl";

void write_catalog(const std::filesystem::path& dir, const CatalogSnapshot& snapshot);
SnapshotPtr load_catalog(const std::filesystem::path& dir);

}  // namespace divex
