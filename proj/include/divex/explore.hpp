#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "divex/catalog.hpp"
#include "divex/search.hpp"
#include "divex/som.hpp"

namespace divex {

// --- concept-based featuremaps -----------------------------------------------

inline constexpr std::size_t kDefaultTopN = 64;

struct FeaturemapDescriptor {
  std::string conceptId;
  std::string source;
  std::size_t itemCount = 0;
  GridShape shape;
};

struct Featuremap {
  FeaturemapDescriptor descriptor;
  FeatureKind measure = FeatureKind::Concept;
  GridLayout layout;
  std::vector<ScoredItem> items;  // shot-level scores, descending
};

/// One descriptor per source whose vocabulary holds the (lower-cased) concept,
/// sources ascending. Empty when no source knows it.
std::vector<FeaturemapDescriptor> maps_for_concept(const CatalogSnapshot& snapshot, std::string_view conceptId,
                                                   std::size_t topN = kDefaultTopN);

struct FeaturemapRequest {
  std::string conceptId;
  std::string source;
  std::size_t topN = kDefaultTopN;
  LayoutMode organization = LayoutMode::Som;
  FeatureKind measure = FeatureKind::Concept;
  std::uint64_t seed = 0;
};

/// The top-N shots for (source, concept) laid out on a near-square grid.
/// Throws Error(UnknownSource), Error(NoSuchConcept) or Error(MissingFeature).
Featuremap build_featuremap(const CatalogSnapshot& snapshot, const FeaturemapRequest& request);

/// featuremaps.jsonl: {concept, source, width, height, mode, cells:[{cell, item}]}.
void write_featuremaps(const std::filesystem::path& path, const std::vector<Featuremap>& maps);
std::vector<Featuremap> load_featuremaps(const std::filesystem::path& path, const CatalogSnapshot& snapshot);

// --- video-based similarity filter -------------------------------------------

struct Segment {
  std::string videoId;
  std::uint64_t segIndex = 0;
  double startSec = 0.0;
  double endSec = 0.0;

  friend bool operator==(const Segment&, const Segment&) = default;
};

/// [i*len, min((i+1)*len, duration)) for i = 0, 1, ...
std::vector<Segment> segment_video(const VideoRecord& video, double segmentSec);

/// A whole video, or one segment of it.
struct Scope {
  const VideoEntry* video = nullptr;
  std::optional<Segment> segment;

  bool contains_second(double t) const {
    return !segment || (t >= segment->startSec && t < segment->endSec);
  }
};

/// Samples in scope whose best score for the concept is at least tau.
std::uint64_t concept_frequency(const CatalogSnapshot& snapshot, const Scope& scope, std::string_view conceptId,
                                const std::optional<std::string>& source, double tau);

/// Highest sample score for the concept in scope, 0 when absent.
double concept_confidence(const CatalogSnapshot& snapshot, const Scope& scope, std::string_view conceptId,
                          const std::optional<std::string>& source);

enum class FilterMode { Frequency, Confidence };
enum class FilterUnit { Video, Segment };
enum class FilterOrder { Period, Value };

std::string_view to_string(FilterMode m);
std::string_view to_string(FilterUnit u);
std::string_view to_string(FilterOrder o);
FilterMode parse_filter_mode(std::string_view text);
FilterUnit parse_filter_unit(std::string_view text);
FilterOrder parse_filter_order(std::string_view text);

struct FilterCriteria {
  std::optional<int> yearFrom;
  std::optional<int> yearTo;
  std::vector<std::string> concepts;
  FilterMode mode = FilterMode::Frequency;
  FilterUnit unit = FilterUnit::Video;
  double segmentSec = 30.0;
  double tau = 0.5;
  FilterOrder order = FilterOrder::Period;
};

/// Throws Error(InvalidCriteria).
void validate(const FilterCriteria& criteria);

struct FilterEntry {
  std::string videoId;
  std::optional<Segment> segment;
  double value = 0.0;
};

/// Conjunction of the year range and one presence test per concept
/// (frequency >= 1, or confidence > 0). Value is the frequency sum or the
/// minimum confidence over the concepts (0 without concepts).
std::vector<FilterEntry> filter_videos(const CatalogSnapshot& snapshot, const FilterCriteria& criteria);

/// Candidate predicate for restricted similarity search: items whose video
/// (or whose start second's segment) passes the filter.
ItemPredicate restrict_to(const CatalogSnapshot& snapshot, const FilterCriteria& criteria);

}  // namespace divex
