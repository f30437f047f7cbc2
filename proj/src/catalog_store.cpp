#include <fstream>

#include "divex/catalog.hpp"
#include "divex/error.hpp"
#include "jsonl.hpp"

namespace divex {

namespace {

constexpr const char* kFormatName = "divex-catalog";
constexpr int kFormatVersion = 1;

using jsonl::Json;

}  // namespace

void write_catalog(const std::filesystem::path& dir, const CatalogSnapshot& snapshot) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) fail(ErrorCode::Io, "cannot create catalog directory '" + dir.string() + "': " + ec.message());

  const auto data = snapshot.data();

  std::string videos, shots, samples, features, concepts;
  for (const auto& v : data.videos) {
    jsonl::append_line(videos, Json{{"videoId", v.videoId},
                                    {"framePath", v.framePath.generic_string()},
                                    {"fps", v.fps},
                                    {"durationSec", v.durationSec},
                                    {"creationTime", v.creationTime},
                                    {"title", v.title},
                                    {"description", v.description}});
  }
  for (const auto& s : data.shots) {
    jsonl::append_line(shots, Json{{"videoId", s.videoId},
                                   {"shotIndex", s.shotIndex},
                                   {"startFrame", s.startFrame},
                                   {"endFrame", s.endFrame},
                                   {"keyframe", s.keyframe}});
  }
  for (const auto& s : data.samples) {
    jsonl::append_line(samples, Json{{"videoId", s.videoId}, {"tSec", s.tSec}, {"frameIndex", s.frameIndex}});
  }
  for (const auto& f : data.features) {
    Json values = Json::array();
    for (double x : f.vector.values) values.push_back(jsonl::round9(x));
    jsonl::append_line(features, Json{{"item", f.key},
                                      {"kind", to_string(f.vector.kind)},
                                      {"dims", f.vector.dims()},
                                      {"values", std::move(values)}});
  }
  for (const auto& [term, list] : snapshot.concepts().terms()) {
    Json postings = Json::array();
    for (const auto& p : list) postings.push_back(Json{{"item", p.key}, {"score", p.score}});
    jsonl::append_line(concepts, Json{{"source", term.first}, {"concept", term.second}, {"postings", std::move(postings)}});
  }

  jsonl::write_file(dir / kVideosFile, videos);
  jsonl::write_file(dir / kShotsFile, shots);
  jsonl::write_file(dir / kSamplesFile, samples);
  jsonl::write_file(dir / kFeaturesFile, features);
  jsonl::write_file(dir / kConceptsFile, concepts);
  std::string meta;
  jsonl::append_line(meta, Json{{"format", kFormatName}, {"version", kFormatVersion}, {"seed", data.seed}});
  jsonl::write_file(dir / kCatalogMetaFile, meta);
}

SnapshotPtr load_catalog(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) fail(ErrorCode::Io, "catalog directory not found: '" + dir.string() + "'");

  CatalogData data;
  try {
    bool sawMeta = false;
    jsonl::read(dir / kCatalogMetaFile, [&](std::size_t, const Json& obj) {
      if (jsonl::get_string(obj, "format") != kFormatName) fail(ErrorCode::Parse, "not a catalog meta file");
      if (jsonl::get_uint(obj, "version") != kFormatVersion) fail(ErrorCode::Parse, "unsupported catalog version");
      data.seed = jsonl::get_uint(obj, "seed");
      sawMeta = true;
    });
    if (!sawMeta) fail(ErrorCode::Parse, "empty catalog meta file");

    jsonl::read(dir / kVideosFile, [&](std::size_t, const Json& obj) {
      VideoRecord v;
      v.videoId = jsonl::get_string(obj, "videoId");
      v.framePath = jsonl::get_string(obj, "framePath");
      v.fps = jsonl::get_number(obj, "fps");
      v.durationSec = jsonl::get_number(obj, "durationSec");
      v.creationTime = jsonl::get_string(obj, "creationTime");
      v.title = jsonl::get_string(obj, "title");
      v.description = jsonl::get_string(obj, "description");
      data.videos.push_back(std::move(v));
    });
    jsonl::read(dir / kShotsFile, [&](std::size_t, const Json& obj) {
      data.shots.push_back(ShotRecord{jsonl::get_string(obj, "videoId"), jsonl::get_uint(obj, "shotIndex"),
                                      jsonl::get_uint(obj, "startFrame"), jsonl::get_uint(obj, "endFrame"),
                                      jsonl::get_uint(obj, "keyframe")});
    });
    jsonl::read(dir / kSamplesFile, [&](std::size_t, const Json& obj) {
      data.samples.push_back(
          FrameSampleRecord{jsonl::get_string(obj, "videoId"), jsonl::get_uint(obj, "tSec"), jsonl::get_uint(obj, "frameIndex")});
    });
    jsonl::read(dir / kFeaturesFile, [&](std::size_t, const Json& obj) {
      FeatureEntry e;
      e.item = ItemKey::parse(jsonl::get_string(obj, "item"));
      e.key = e.item.str();
      e.vector.kind = parse_feature_kind(jsonl::get_string(obj, "kind"));
      const auto dims = jsonl::get_uint(obj, "dims");
      const auto& values = jsonl::field(obj, "values");
      if (!values.is_array() || values.size() != dims) fail(ErrorCode::Parse, "values length does not match dims");
      e.vector.values.reserve(dims);
      for (const auto& x : values) {
        if (!x.is_number()) fail(ErrorCode::Parse, "non-numeric feature value");
        e.vector.values.push_back(x.get<double>());
      }
      data.features.push_back(std::move(e));
    });
    jsonl::read(dir / kConceptsFile, [&](std::size_t, const Json& obj) {
      const auto source = jsonl::get_string(obj, "source");
      const auto conceptId = jsonl::get_string(obj, "concept");
      const auto& postings = jsonl::field(obj, "postings");
      if (!postings.is_array()) fail(ErrorCode::Parse, "postings must be an array");
      for (const auto& p : postings) {
        data.detections.push_back(
            ConceptDetection{ItemKey::parse(jsonl::get_string(p, "item")), source, conceptId, jsonl::get_number(p, "score")});
      }
    });
  } catch (const Error& e) {
    fail(ErrorCode::CorruptCatalog, std::string("corrupt catalog: ") + e.what());
  }
  return CatalogSnapshot::make(std::move(data));
}

}  // namespace divex
