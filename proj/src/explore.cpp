#include "divex/explore.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>
#include <unordered_set>

#include "divex/error.hpp"
#include "jsonl.hpp"

namespace divex {

// --- featuremaps ---------------------------------------------------------------

namespace {

std::vector<ScoredItem> top_shots(const std::vector<Posting>& postings, std::size_t topN) {
  std::vector<ScoredItem> out;
  for (const auto& p : postings) {
    if (out.size() == topN) break;
    if (p.item.granularity == Granularity::Shot) out.push_back({p.item, p.score});
  }
  return out;
}

std::size_t shot_postings(const std::vector<Posting>& postings) {
  return static_cast<std::size_t>(std::count_if(postings.begin(), postings.end(), [](const Posting& p) {
    return p.item.granularity == Granularity::Shot;
  }));
}

}  // namespace

std::vector<FeaturemapDescriptor> maps_for_concept(const CatalogSnapshot& snapshot, std::string_view conceptId,
                                                   std::size_t topN) {
  const auto c = ascii_lower(conceptId);
  std::vector<FeaturemapDescriptor> out;
  const auto& index = snapshot.concepts();
  for (const auto& source : index.sources()) {
    const auto* list = index.postings(source, c);
    if (!list) continue;
    const auto n = std::min(topN, shot_postings(*list));
    out.push_back({c, source, n, GridShape::for_items(n)});
  }
  return out;
}

Featuremap build_featuremap(const CatalogSnapshot& snapshot, const FeaturemapRequest& request) {
  if (request.topN == 0) fail(ErrorCode::InvalidArgument, "topN must be positive");
  const auto c = ascii_lower(request.conceptId);
  const auto& index = snapshot.concepts();
  if (!index.has_source(request.source)) fail(ErrorCode::UnknownSource, "unknown source '" + request.source + "'");
  const auto* list = index.postings(request.source, c);
  if (!list) fail(ErrorCode::NoSuchConcept, "source '" + request.source + "' has no concept '" + c + "'");

  Featuremap map;
  map.measure = request.measure;
  map.items = top_shots(*list, request.topN);
  map.descriptor = {c, request.source, map.items.size(), GridShape::for_items(map.items.size())};
  if (map.items.empty()) {
    map.layout = GridLayout{request.organization, map.descriptor.shape, {}};
    return map;
  }

  if (request.organization == LayoutMode::Som) {
    std::vector<FeatureEntry> entries;
    entries.reserve(map.items.size());
    for (const auto& it : map.items) {
      const auto* f = snapshot.feature(it.item, request.measure);
      if (!f) {
        fail(ErrorCode::MissingFeature, "'" + it.item.str() + "' has no " + std::string(to_string(request.measure)) + " feature");
      }
      entries.push_back({it.item, it.item.str(), *f});
    }
    SomParams params;
    params.seed = request.seed;
    const auto grid = train_som(entries, params, map.descriptor.shape);
    map.layout = assign_unique_cells(grid, entries);
  } else {
    map.layout = order_layout(map.items, request.organization, map.descriptor.shape);
  }
  return map;
}

void write_featuremaps(const std::filesystem::path& path, const std::vector<Featuremap>& maps) {
  std::string out;
  for (const auto& m : maps) {
    jsonl::Json cells = jsonl::Json::array();
    for (const auto& c : m.layout.cells) cells.push_back(jsonl::Json{{"cell", c.cell}, {"item", c.item.str()}});
    jsonl::append_line(out, jsonl::Json{{"concept", m.descriptor.conceptId},
                                        {"source", m.descriptor.source},
                                        {"width", m.layout.shape.width},
                                        {"height", m.layout.shape.height},
                                        {"mode", to_string(m.layout.mode)},
                                        {"cells", std::move(cells)}});
  }
  jsonl::write_file(path, out);
}

std::vector<Featuremap> load_featuremaps(const std::filesystem::path& path, const CatalogSnapshot& snapshot) {
  std::vector<Featuremap> out;
  try {
    jsonl::read(path, [&](std::size_t, const jsonl::Json& obj) {
      Featuremap m;
      m.descriptor.conceptId = jsonl::get_string(obj, "concept");
      m.descriptor.source = jsonl::get_string(obj, "source");
      m.layout.shape = {jsonl::get_uint(obj, "width"), jsonl::get_uint(obj, "height")};
      m.layout.mode = parse_layout_mode(jsonl::get_string(obj, "mode"));
      m.descriptor.shape = m.layout.shape;
      std::unordered_set<std::size_t> used;
      for (const auto& c : jsonl::field(obj, "cells")) {
        CellItem ci{jsonl::get_uint(c, "cell"), ItemKey::parse(jsonl::get_string(c, "item"))};
        snapshot.resolve(ci.item);
        if (ci.cell >= m.layout.shape.cells() || !used.insert(ci.cell).second) {
          fail(ErrorCode::CorruptCatalog, "featuremap cell " + std::to_string(ci.cell) + " is out of range or reused");
        }
        m.layout.cells.push_back(std::move(ci));
      }
      m.descriptor.itemCount = m.layout.cells.size();
      if (const auto* list = snapshot.concepts().postings(m.descriptor.source, m.descriptor.conceptId)) {
        m.items = top_shots(*list, m.descriptor.itemCount);
      }
      out.push_back(std::move(m));
    });
  } catch (const Error& e) {
    if (e.code() == ErrorCode::CorruptCatalog) throw;
    fail(ErrorCode::CorruptCatalog, path.filename().string() + ": " + e.what());
  }
  return out;
}

// --- filter ------------------------------------------------------------------------

std::vector<Segment> segment_video(const VideoRecord& video, double segmentSec) {
  if (!(segmentSec > 0.0) || !std::isfinite(segmentSec)) fail(ErrorCode::InvalidArgument, "segmentSec must be positive");
  std::vector<Segment> out;
  for (std::uint64_t i = 0;; ++i) {
    const double start = static_cast<double>(i) * segmentSec;
    if (start >= video.durationSec) break;
    out.push_back({video.videoId, i, start, std::min(static_cast<double>(i + 1) * segmentSec, video.durationSec)});
  }
  return out;
}

namespace {

// videoId -> best score per sample second, negative when the concept is absent.
using SampleScores = std::unordered_map<std::string, std::vector<double>>;

SampleScores sample_scores(const CatalogSnapshot& snapshot, const std::string& conceptId,
                           const std::optional<std::string>& source) {
  SampleScores out;
  const auto& index = snapshot.concepts();
  const auto sources = source ? std::vector<std::string>{*source} : index.sources();
  for (const auto& s : sources) {
    const auto* list = index.postings(s, conceptId);
    if (!list) continue;
    for (const auto& p : *list) {
      if (p.item.granularity != Granularity::Frame) continue;
      auto& scores = out[p.item.videoId];
      if (scores.empty()) scores.assign(snapshot.find_video(p.item.videoId)->samples.size(), -1.0);
      scores[p.item.ordinal] = std::max(scores[p.item.ordinal], p.score);
    }
  }
  return out;
}

struct ScopeStats {
  std::uint64_t frequency = 0;
  double confidence = 0.0;
};

ScopeStats stats_for(const SampleScores& scores, const Scope& scope, double tau) {
  ScopeStats st;
  auto it = scores.find(scope.video->record.videoId);
  if (it == scores.end()) return st;
  const auto& perSecond = it->second;
  for (std::size_t t = 0; t < perSecond.size(); ++t) {
    const double s = perSecond[t];
    if (s < 0.0 || !scope.contains_second(static_cast<double>(t))) continue;
    if (s >= tau) ++st.frequency;
    st.confidence = std::max(st.confidence, s);
  }
  return st;
}

}  // namespace

std::uint64_t concept_frequency(const CatalogSnapshot& snapshot, const Scope& scope, std::string_view conceptId,
                                const std::optional<std::string>& source, double tau) {
  if (!scope.video) return 0;
  return stats_for(sample_scores(snapshot, ascii_lower(conceptId), source), scope, tau).frequency;
}

double concept_confidence(const CatalogSnapshot& snapshot, const Scope& scope, std::string_view conceptId,
                          const std::optional<std::string>& source) {
  if (!scope.video) return 0.0;
  return stats_for(sample_scores(snapshot, ascii_lower(conceptId), source), scope, 0.0).confidence;
}

std::string_view to_string(FilterMode m) { return m == FilterMode::Frequency ? "frequency" : "confidence"; }
std::string_view to_string(FilterUnit u) { return u == FilterUnit::Video ? "video" : "segment"; }
std::string_view to_string(FilterOrder o) { return o == FilterOrder::Period ? "period" : "value"; }

FilterMode parse_filter_mode(std::string_view text) {
  if (text == "frequency") return FilterMode::Frequency;
  if (text == "confidence") return FilterMode::Confidence;
  fail(ErrorCode::InvalidCriteria, "mode must be frequency or confidence, got '" + std::string(text) + "'");
}

FilterUnit parse_filter_unit(std::string_view text) {
  if (text == "video") return FilterUnit::Video;
  if (text == "segment") return FilterUnit::Segment;
  fail(ErrorCode::InvalidCriteria, "unit must be video or segment, got '" + std::string(text) + "'");
}

FilterOrder parse_filter_order(std::string_view text) {
  if (text == "period") return FilterOrder::Period;
  if (text == "value") return FilterOrder::Value;
  fail(ErrorCode::InvalidCriteria, "order must be period or value, got '" + std::string(text) + "'");
}

void validate(const FilterCriteria& c) {
  if (c.yearFrom && c.yearTo && *c.yearFrom > *c.yearTo) {
    fail(ErrorCode::InvalidCriteria, "yearFrom " + std::to_string(*c.yearFrom) + " is after yearTo " + std::to_string(*c.yearTo));
  }
  if (c.order == FilterOrder::Value && c.concepts.empty()) {
    fail(ErrorCode::InvalidCriteria, "ordering by value requires at least one concept");
  }
  if (!(c.segmentSec > 0.0) || !std::isfinite(c.segmentSec)) fail(ErrorCode::InvalidCriteria, "segmentSec must be positive");
  if (!(c.tau >= 0.0 && c.tau <= 1.0)) fail(ErrorCode::InvalidCriteria, "tau must lie in [0,1]");
  for (const auto& conceptId : c.concepts) {
    if (conceptId.empty()) fail(ErrorCode::InvalidCriteria, "empty concept in criteria");
  }
}

std::vector<FilterEntry> filter_videos(const CatalogSnapshot& snapshot, const FilterCriteria& criteria) {
  validate(criteria);

  std::vector<std::string> concepts;
  for (const auto& c : criteria.concepts) {
    auto lc = ascii_lower(c);
    if (std::find(concepts.begin(), concepts.end(), lc) == concepts.end()) concepts.push_back(std::move(lc));
  }
  std::vector<SampleScores> scores;
  scores.reserve(concepts.size());
  for (const auto& c : concepts) scores.push_back(sample_scores(snapshot, c, std::nullopt));

  struct Row {
    FilterEntry entry;
    std::int64_t created;
  };
  std::vector<Row> rows;

  for (const auto& video : snapshot.videos()) {
    const int year = video.record.creation_year();
    if (criteria.yearFrom && year < *criteria.yearFrom) continue;
    if (criteria.yearTo && year > *criteria.yearTo) continue;
    const auto created = video.record.creation_epoch_ms();

    std::vector<Scope> scopes;
    if (criteria.unit == FilterUnit::Video) {
      scopes.push_back({&video, std::nullopt});
    } else {
      for (auto& seg : segment_video(video.record, criteria.segmentSec)) scopes.push_back({&video, std::move(seg)});
    }

    for (auto& scope : scopes) {
      bool pass = true;
      double value = 0.0;
      for (std::size_t i = 0; i < concepts.size() && pass; ++i) {
        const auto st = stats_for(scores[i], scope, criteria.tau);
        if (criteria.mode == FilterMode::Frequency) {
          pass = st.frequency >= 1;
          value += static_cast<double>(st.frequency);
        } else {
          pass = st.confidence > 0.0;
          value = i == 0 ? st.confidence : std::min(value, st.confidence);
        }
      }
      if (pass) rows.push_back({FilterEntry{video.record.videoId, std::move(scope.segment), value}, created});
    }
  }

  auto segIndex = [](const FilterEntry& e) { return e.segment ? e.segment->segIndex : 0; };
  if (criteria.order == FilterOrder::Period) {
    std::stable_sort(rows.begin(), rows.end(), [&](const Row& a, const Row& b) {
      if (a.created != b.created) return a.created < b.created;
      if (a.entry.videoId != b.entry.videoId) return a.entry.videoId < b.entry.videoId;
      return segIndex(a.entry) < segIndex(b.entry);
    });
  } else {
    std::stable_sort(rows.begin(), rows.end(), [&](const Row& a, const Row& b) {
      if (a.entry.value != b.entry.value) return a.entry.value > b.entry.value;
      if (a.entry.videoId != b.entry.videoId) return a.entry.videoId < b.entry.videoId;
      return segIndex(a.entry) < segIndex(b.entry);
    });
  }
  std::vector<FilterEntry> out;
  out.reserve(rows.size());
  for (auto& r : rows) out.push_back(std::move(r.entry));
  return out;
}

ItemPredicate restrict_to(const CatalogSnapshot& snapshot, const FilterCriteria& criteria) {
  // videoId -> passing segments (empty vector: whole video passes)
  auto passing = std::make_shared<std::unordered_map<std::string, std::vector<Segment>>>();
  for (auto& e : filter_videos(snapshot, criteria)) {
    auto& segs = (*passing)[e.videoId];
    if (e.segment) segs.push_back(std::move(*e.segment));
  }
  const bool bySegment = criteria.unit == FilterUnit::Segment;
  const auto* snap = &snapshot;
  return [passing, bySegment, snap](const ItemKey& item) {
    auto it = passing->find(item.videoId);
    if (it == passing->end()) return false;
    if (!bySegment) return true;
    const auto r = snap->resolve(item);
    const double t = r.shot ? static_cast<double>(r.shot->startFrame) / r.video->record.fps : static_cast<double>(r.sample->tSec);
    return std::any_of(it->second.begin(), it->second.end(),
                       [t](const Segment& s) { return t >= s.startSec && t < s.endSec; });
  };
}

}  // namespace divex
