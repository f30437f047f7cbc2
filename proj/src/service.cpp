#include "divex/service.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>

#include <httplib.h>

#include "divex/features.hpp"
#include "divex/frame.hpp"
#include "divex/ingest.hpp"
#include "divex/search.hpp"
#include "jsonl.hpp"

namespace divex {

using Json = nlohmann::ordered_json;

BindAddress parse_bind_address(std::string_view text) {
  auto bad = [&] { fail(ErrorCode::InvalidArgument, "bind address must look like host:port, got '" + std::string(text) + "'"); };
  const auto colon = text.rfind(':');
  if (colon == std::string_view::npos) bad();
  std::string host(text.substr(0, colon));
  if (host.size() >= 2 && host.front() == '[' && host.back() == ']') host = host.substr(1, host.size() - 2);
  if (host.empty()) host = "0.0.0.0";
  const auto portText = text.substr(colon + 1);
  int port = -1;
  auto [ptr, ec] = std::from_chars(portText.data(), portText.data() + portText.size(), port);
  if (portText.empty() || ec != std::errc{} || ptr != portText.data() + portText.size() || port < 0 || port > 65535) bad();
  return {host, port};
}

void validate(const ServiceConfig& config) {
  if (config.thumbMaxEdge <= 0) fail(ErrorCode::InvalidArgument, "thumbMaxEdge must be positive");
  if (config.defaultK == 0) fail(ErrorCode::InvalidArgument, "default k must be positive");
  if (config.defaultTopN == 0) fail(ErrorCode::InvalidArgument, "default topN must be positive");
  if (!(config.defaultTau >= 0.0 && config.defaultTau <= 1.0)) fail(ErrorCode::InvalidArgument, "default tau must lie in [0,1]");
}

std::string ApiError::body() const {
  Json j{{"status", httpStatus}, {"code", code}, {"message", message}};
  j["detail"] = detailJson.empty() ? Json(nullptr) : Json::parse(detailJson);
  return j.dump();
}

ApiError to_api_error(const Error& error) {
  switch (error.code()) {
    case ErrorCode::InvalidArgument:
    case ErrorCode::Parse:
    case ErrorCode::Validation:
    case ErrorCode::DimensionMismatch:
    case ErrorCode::KindMismatch:
    case ErrorCode::EmptyInput:
    case ErrorCode::CapacityExceeded:
      return {400, "invalid_parameter", error.what(), {}};
    case ErrorCode::InvalidCriteria: return {400, "invalid_criteria", error.what(), {}};
    case ErrorCode::InvalidItemKey: return {400, "invalid_item_key", error.what(), {}};
    case ErrorCode::UnknownVideo: return {404, "unknown_video", error.what(), {}};
    case ErrorCode::OrdinalOutOfRange: return {404, "ordinal_out_of_range", error.what(), {}};
    case ErrorCode::NoSuchConcept: return {404, "no_such_concept", error.what(), {}};
    case ErrorCode::UnknownSource: return {404, "unknown_source", error.what(), {}};
    case ErrorCode::MissingFeature: return {409, "missing_feature", error.what(), {}};
    default: return {500, "internal_error", "internal error", {}};
  }
}

namespace {

// Raised for malformed query parameters; carries the parameter name.
struct ParamError {
  std::string name;
  std::string message;
};

struct ApiFailure {
  ApiError error;
};

ApiResponse json_response(const Json& body) { return {200, "application/json", body.dump()}; }

ApiResponse error_response(const ApiError& e) { return {e.httpStatus, "application/json", e.body()}; }

std::optional<std::string> param(const QueryParams& params, const char* name) {
  auto it = params.find(name);
  if (it == params.end() || it->second.empty()) return std::nullopt;
  return it->second;
}

bool has_param(const QueryParams& params, const char* name) { return param(params, name).has_value(); }

long long parse_integer(const std::string& text, const char* name) {
  long long v = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc{} || ptr != text.data() + text.size()) throw ParamError{name, "'" + std::string(name) + "' must be an integer"};
  return v;
}

double parse_real(const std::string& text, const char* name) {
  char* end = nullptr;
  const double v = std::strtod(text.c_str(), &end);
  if (end != text.c_str() + text.size() || !std::isfinite(v)) throw ParamError{name, "'" + std::string(name) + "' must be a number"};
  return v;
}

std::size_t positive_param(const QueryParams& params, const char* name, std::size_t fallback) {
  auto text = param(params, name);
  if (!text) return fallback;
  const auto v = parse_integer(*text, name);
  if (v < 1 || v > 1000000) throw ParamError{name, "'" + std::string(name) + "' must be a positive integer"};
  return static_cast<std::size_t>(v);
}

double unit_param(const QueryParams& params, const char* name, double fallback) {
  auto text = param(params, name);
  if (!text) return fallback;
  const double v = parse_real(*text, name);
  if (v < 0.0 || v > 1.0) throw ParamError{name, "'" + std::string(name) + "' must lie in [0,1]"};
  return v;
}

template <typename F>
auto enum_param(const QueryParams& params, const char* name, F parse, decltype(parse(std::string_view{})) fallback) {
  auto text = param(params, name);
  if (!text) return fallback;
  try {
    return parse(*text);
  } catch (const Error& e) {
    throw ParamError{name, e.what()};
  }
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (;;) {
    const auto comma = text.find(',', start);
    auto part = text.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
    const auto b = part.find_first_not_of(" \t");
    if (b != std::string::npos) out.push_back(part.substr(b, part.find_last_not_of(" \t") - b + 1));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

const char* const kFilterParams[] = {"yearFrom", "yearTo", "concepts", "mode", "unit", "segmentSec", "tau", "order"};

FilterCriteria filter_params(const QueryParams& params, double defaultTau) {
  FilterCriteria c;
  if (auto v = param(params, "yearFrom")) c.yearFrom = static_cast<int>(parse_integer(*v, "yearFrom"));
  if (auto v = param(params, "yearTo")) c.yearTo = static_cast<int>(parse_integer(*v, "yearTo"));
  if (auto v = param(params, "concepts")) c.concepts = split_list(*v);
  c.mode = enum_param(params, "mode", parse_filter_mode, FilterMode::Frequency);
  c.unit = enum_param(params, "unit", parse_filter_unit, FilterUnit::Video);
  c.order = enum_param(params, "order", parse_filter_order, FilterOrder::Period);
  if (auto v = param(params, "segmentSec")) {
    c.segmentSec = parse_real(*v, "segmentSec");
    if (!(c.segmentSec > 0.0)) throw ParamError{"segmentSec", "'segmentSec' must be positive"};
  }
  c.tau = unit_param(params, "tau", defaultTau);
  return c;
}

Json criteria_json(const FilterCriteria& c) {
  Json j;
  j["yearFrom"] = c.yearFrom ? Json(*c.yearFrom) : Json(nullptr);
  j["yearTo"] = c.yearTo ? Json(*c.yearTo) : Json(nullptr);
  j["concepts"] = c.concepts;
  j["mode"] = to_string(c.mode);
  j["unit"] = to_string(c.unit);
  j["segmentSec"] = c.segmentSec;
  j["tau"] = c.tau;
  j["order"] = to_string(c.order);
  return j;
}

std::string thumb_url(const std::string& videoId, std::uint64_t frameIndex) {
  return "/thumbs/" + httplib::detail::encode_url(videoId) + "/" + std::to_string(frameIndex) + ".ppm";
}

std::uint64_t display_frame(const ResolvedItem& r) { return r.shot ? r.shot->keyframe : r.sample->frameIndex; }

Json video_summary(const VideoEntry& v) {
  const auto& r = v.record;
  return Json{{"videoId", r.videoId},
              {"title", r.title},
              {"description", r.description},
              {"creationTime", r.creationTime},
              {"year", r.creation_year()},
              {"fps", r.fps},
              {"durationSec", r.durationSec},
              {"frameCount", r.frame_count()},
              {"shotCount", v.shots.size()},
              {"sampleCount", v.samples.size()}};
}

Json video_detail(const VideoEntry& v) {
  auto j = video_summary(v);
  Json shots = Json::array();
  for (const auto& s : v.shots) {
    shots.push_back(Json{{"item", ItemKey::shot(s.videoId, s.shotIndex).str()},
                         {"shotIndex", s.shotIndex},
                         {"startFrame", s.startFrame},
                         {"endFrame", s.endFrame},
                         {"keyframe", s.keyframe},
                         {"thumb", thumb_url(s.videoId, s.keyframe)}});
  }
  Json samples = Json::array();
  for (const auto& s : v.samples) {
    samples.push_back(Json{{"item", ItemKey::frame(s.videoId, s.tSec).str()},
                           {"tSec", s.tSec},
                           {"frameIndex", s.frameIndex},
                           {"thumb", thumb_url(s.videoId, s.frameIndex)}});
  }
  j["shots"] = std::move(shots);
  j["samples"] = std::move(samples);
  return j;
}

std::string cache_key(const FeaturemapRequest& r) {
  return r.conceptId + '\x1f' + r.source + '\x1f' + std::to_string(r.topN) + '\x1f' + std::string(to_string(r.organization)) +
         '\x1f' + std::string(to_string(r.measure)) + '\x1f' + std::to_string(r.seed);
}

}  // namespace

// ---------------------------------------------------------------------------

Api::Api(SnapshotPtr snapshot, ServiceConfig config, std::vector<Featuremap> precomputed)
    : snapshot_(snapshot ? std::move(snapshot) : CatalogSnapshot::empty_snapshot()),
      config_(std::move(config)),
      seed_(config_.somSeed.value_or(snapshot_->seed())) {
  validate(config_);
  // Precomputed maps are the default request (som over concept vectors, top 64) at the ingest seed.
  for (auto& m : precomputed) {
    if (m.layout.mode != LayoutMode::Som) continue;
    FeaturemapRequest r{m.descriptor.conceptId, m.descriptor.source, kDefaultTopN, LayoutMode::Som, FeatureKind::Concept,
                        snapshot_->seed()};
    std::promise<std::shared_ptr<const Featuremap>> ready;
    ready.set_value(std::make_shared<const Featuremap>(std::move(m)));
    cache_.emplace(cache_key(r), ready.get_future().share());
  }
}

std::size_t Api::featuremap_builds() const {
  std::lock_guard lock(cacheMutex_);
  return builds_;
}

std::shared_ptr<const Featuremap> Api::featuremap(const FeaturemapRequest& request) const {
  const auto key = cache_key(request);
  std::promise<std::shared_ptr<const Featuremap>> promise;
  std::shared_future<std::shared_ptr<const Featuremap>> future;
  bool owner = false;
  {
    std::lock_guard lock(cacheMutex_);
    auto it = cache_.find(key);
    if (it != cache_.end()) {
      future = it->second;
    } else {
      future = promise.get_future().share();
      cache_.emplace(key, future);
      owner = true;
      ++builds_;
    }
  }
  if (owner) {
    try {
      promise.set_value(std::make_shared<const Featuremap>(build_featuremap(*snapshot_, request)));
    } catch (...) {
      promise.set_exception(std::current_exception());
      std::lock_guard lock(cacheMutex_);
      cache_.erase(key);
    }
  }
  return future.get();
}

ApiResponse Api::handle_target(std::string_view target) const {
  const auto q = target.find('?');
  const std::string rawPath(target.substr(0, q));
  QueryParams params;
  if (q != std::string_view::npos) httplib::detail::parse_query_text(std::string(target.substr(q + 1)), params);
  return handle(httplib::detail::decode_url(rawPath, false), params);
}

ApiResponse Api::handle(std::string_view path, const QueryParams& params) const {
  try {
    return dispatch(path, params);
  } catch (const ParamError& e) {
    return error_response(ApiError{400, "invalid_parameter", e.message, Json{{"parameter", e.name}}.dump()});
  } catch (const ApiFailure& f) {
    return error_response(f.error);
  } catch (const Error& e) {
    return error_response(to_api_error(e));
  } catch (const std::exception&) {
    return error_response(ApiError{500, "internal_error", "internal error", {}});
  }
}

ApiResponse Api::dispatch(std::string_view path, const QueryParams& params) const {
  const auto& snap = *snapshot_;
  auto starts = [&](std::string_view prefix) { return path.substr(0, prefix.size()) == prefix; };

  if (path == "/status") {
    Json j{{"videos", snap.video_count()}, {"shots", snap.shot_count()}, {"frames", snap.sample_count()}};
    j["sources"] = snap.concepts().sources();
    return json_response(j);
  }

  if (path == "/videos") {
    const auto k = positive_param(params, "k", snap.video_count() ? snap.video_count() : 1);
    Json list = Json::array();
    for (const auto& v : snap.videos()) {
      if (list.size() == k) break;
      list.push_back(video_summary(v));
    }
    return json_response(Json{{"videos", std::move(list)}});
  }

  if (starts("/videos/")) {
    const auto id = std::string(path.substr(8));
    const auto* v = snap.find_video(id);
    if (!v) fail(ErrorCode::UnknownVideo, "unknown video '" + id + "'");
    return json_response(video_detail(*v));
  }

  if (path == "/search/concepts") {
    auto q = param(params, "q");
    if (!q) throw ParamError{"q", "'q' must list at least one concept"};
    ConceptQuery query;
    query.tokens = split_list(*q);
    if (query.tokens.empty()) throw ParamError{"q", "'q' must list at least one concept"};
    query.source = param(params, "source");
    query.threshold = unit_param(params, "threshold", 0.0);
    query.granularity = enum_param(params, "granularity", parse_granularity, Granularity::Shot);
    query.k = positive_param(params, "k", config_.defaultK);

    const auto result = concept_query(snap.concepts(), query);
    if (!result.unknownTokens.empty()) {
      std::string msg = "no such concept:";
      for (const auto& t : result.unknownTokens) msg += " '" + t + "'";
      throw ApiFailure{ApiError{404, "no_such_concept", msg, Json{{"tokens", result.unknownTokens}}.dump()}};
    }
    Json tokens = Json::array();
    for (const auto& t : query.tokens) tokens.push_back(ascii_lower(t));
    Json hits = Json::array();
    for (const auto& h : result.hits) {
      const auto r = snap.resolve(h.item);
      hits.push_back(Json{{"item", h.key}, {"score", h.score}, {"thumb", thumb_url(h.item.videoId, display_frame(r))}});
    }
    Json j;
    j["query"] = Json{{"tokens", std::move(tokens)},
                      {"source", query.source ? Json(*query.source) : Json(nullptr)},
                      {"threshold", query.threshold},
                      {"granularity", to_string(query.granularity)},
                      {"k", query.k}};
    j["hits"] = std::move(hits);
    return json_response(j);
  }

  if (path == "/search/metadata") {
    auto q = param(params, "q");
    if (!q) throw ParamError{"q", "'q' must be non-empty"};
    const auto k = positive_param(params, "k", config_.defaultK);
    return json_response(Json{{"query", *q}, {"k", k}, {"videos", metadata_query(snap, *q, k)}});
  }

  if (starts("/similar/")) {
    const auto query = ItemKey::parse(path.substr(9));
    const auto resolvedQuery = snap.resolve(query);
    (void)resolvedQuery;
    const auto kind = enum_param(params, "measure", parse_feature_kind, FeatureKind::Color);
    const auto granularity = enum_param(params, "granularity", parse_granularity, query.granularity);
    const auto k = positive_param(params, "k", config_.defaultK);
    const auto measure = Measure::of(kind);

    ItemPredicate restrict;
    Json criteria = nullptr;
    if (std::any_of(std::begin(kFilterParams), std::end(kFilterParams), [&](const char* n) { return has_param(params, n); })) {
      auto c = filter_params(params, config_.defaultTau);
      c.order = FilterOrder::Period;
      restrict = restrict_to(snap, c);
      criteria = criteria_json(c);
    }
    const auto hits = knn(snap, query, measure, granularity, k, restrict);
    Json list = Json::array();
    for (const auto& h : hits) {
      const auto r = snap.resolve(h.item);
      list.push_back(Json{{"item", h.key}, {"distance", h.score}, {"thumb", thumb_url(h.item.videoId, display_frame(r))}});
    }
    Json j;
    j["query"] = Json{{"item", query.str()},
                      {"measure", to_string(kind)},
                      {"metric", to_string(measure.metric)},
                      {"granularity", to_string(granularity)},
                      {"k", k},
                      {"filter", std::move(criteria)}};
    j["hits"] = std::move(list);
    return json_response(j);
  }

  if (path == "/featuremaps") {
    auto c = param(params, "concept");
    if (!c) throw ParamError{"concept", "'concept' is required"};
    const auto topN = positive_param(params, "topN", config_.defaultTopN);
    Json maps = Json::array();
    for (const auto& d : maps_for_concept(snap, *c, topN)) {
      maps.push_back(Json{{"concept", d.conceptId},
                          {"source", d.source},
                          {"itemCount", d.itemCount},
                          {"width", d.shape.width},
                          {"height", d.shape.height},
                          {"href", "/featuremaps/" + httplib::detail::encode_url(d.conceptId) + "/" +
                                       httplib::detail::encode_url(d.source)}});
    }
    return json_response(Json{{"concept", ascii_lower(*c)}, {"maps", std::move(maps)}});
  }

  if (starts("/featuremaps/")) {
    const auto rest = path.substr(13);
    const auto slash = rest.find('/');
    if (slash == std::string_view::npos || slash == 0 || slash + 1 == rest.size()) {
      throw ApiFailure{ApiError{404, "not_found", "expected /featuremaps/{concept}/{source}", {}}};
    }
    FeaturemapRequest req;
    req.conceptId = ascii_lower(rest.substr(0, slash));
    req.source = std::string(rest.substr(slash + 1));
    req.organization = enum_param(params, "organization", parse_layout_mode, LayoutMode::Som);
    req.measure = enum_param(params, "measure", parse_feature_kind, FeatureKind::Concept);
    req.topN = positive_param(params, "topN", config_.defaultTopN);
    req.seed = seed_;
    if (!snap.concepts().has_source(req.source)) fail(ErrorCode::UnknownSource, "unknown source '" + req.source + "'");
    if (!snap.concepts().knows(req.source, req.conceptId)) {
      throw ApiFailure{ApiError{404, "no_such_concept", "source '" + req.source + "' has no concept '" + req.conceptId + "'",
                                Json{{"tokens", {req.conceptId}}}.dump()}};
    }
    const auto map = featuremap(req);

    std::unordered_map<std::string, double> scores;
    for (const auto& it : map->items) scores.emplace(it.item.str(), it.score);
    Json cells = Json::array();
    for (const auto& c : map->layout.cells) {
      const auto key = c.item.str();
      const auto r = snap.resolve(c.item);
      cells.push_back(Json{{"cell", c.cell},
                           {"x", c.cell % map->layout.shape.width},
                           {"y", c.cell / map->layout.shape.width},
                           {"item", key},
                           {"score", scores.count(key) ? scores.at(key) : 0.0},
                           {"thumb", thumb_url(c.item.videoId, display_frame(r))}});
    }
    return json_response(Json{{"concept", req.conceptId},
                              {"source", req.source},
                              {"organization", to_string(req.organization)},
                              {"measure", to_string(req.measure)},
                              {"width", map->layout.shape.width},
                              {"height", map->layout.shape.height},
                              {"itemCount", map->layout.cells.size()},
                              {"cells", std::move(cells)}});
  }

  if (path == "/filter") {
    const auto criteria = filter_params(params, config_.defaultTau);
    const auto k = positive_param(params, "k", 1000000);
    const auto entries = filter_videos(snap, criteria);
    Json results = Json::array();
    for (const auto& e : entries) {
      if (results.size() == k) break;
      const auto* v = snap.find_video(e.videoId);
      Json row{{"videoId", e.videoId}, {"title", v->record.title}, {"creationTime", v->record.creationTime}, {"value", e.value}};
      row["segment"] = e.segment ? Json{{"segIndex", e.segment->segIndex},
                                        {"startSec", e.segment->startSec},
                                        {"endSec", e.segment->endSec}}
                                 : Json(nullptr);
      results.push_back(std::move(row));
    }
    return json_response(Json{{"criteria", criteria_json(criteria)}, {"results", std::move(results)}});
  }

  if (starts("/thumbs/")) {
    const auto rest = path.substr(8);
    const auto slash = rest.rfind('/');
    const auto file = slash == std::string_view::npos ? std::string_view{} : rest.substr(slash + 1);
    if (slash == std::string_view::npos || slash == 0 || file.size() <= 4 || file.substr(file.size() - 4) != ".ppm") {
      throw ApiFailure{ApiError{404, "not_found", "expected /thumbs/{videoId}/{frameIndex}.ppm", {}}};
    }
    const auto videoId = std::string(rest.substr(0, slash));
    const auto* v = snap.find_video(videoId);
    if (!v) fail(ErrorCode::UnknownVideo, "unknown video '" + videoId + "'");
    const auto digits = std::string(file.substr(0, file.size() - 4));
    const auto frameIndex = parse_integer(digits, "frameIndex");
    if (frameIndex < 0 || static_cast<std::uint64_t>(frameIndex) >= v->record.frame_count()) {
      fail(ErrorCode::OrdinalOutOfRange, "video '" + videoId + "' has no frame " + digits);
    }
    const auto frame = read_ppm(v->record.framePath / frame_file_name(static_cast<std::uint64_t>(frameIndex)));
    return {200, "image/x-portable-pixmap", encode_ppm(scale_to_fit(frame, config_.thumbMaxEdge))};
  }

  throw ApiFailure{ApiError{404, "not_found", "no route for '" + std::string(path) + "'", {}}};
}

std::unique_ptr<Api> open_api(const ServiceConfig& config) {
  validate(config);
  auto snapshot = load_catalog(config.catalogDir);
  std::vector<Featuremap> maps;
  const auto mapsPath = config.catalogDir / kFeaturemapsFile;
  if (std::filesystem::exists(mapsPath)) maps = load_featuremaps(mapsPath, *snapshot);
  return std::make_unique<Api>(std::move(snapshot), config, std::move(maps));
}

}  // namespace divex
