#include "divex/divex.h"

#include <cstdlib>
#include <cstring>
#include <new>
#include <string>

#include "divex/error.hpp"
#include "divex/pipeline.hpp"
#include "divex/service.hpp"

struct divex_service {
  std::shared_ptr<const divex::Api> api;
};

struct divex_server {
  std::unique_ptr<divex::HttpServer> http;
};

namespace {

thread_local std::string lastError;
thread_local std::string lastErrorCode;

divex_status status_of(divex::ErrorCode code) {
  using divex::ErrorCode;
  switch (code) {
    case ErrorCode::Io: return DIVEX_E_IO;
    case ErrorCode::Parse: return DIVEX_E_PARSE;
    case ErrorCode::Validation:
    case ErrorCode::DuplicateId:
    case ErrorCode::FrameGap:
    case ErrorCode::UnsupportedFormat:
    case ErrorCode::FrameTooSmall:
    case ErrorCode::DimensionMismatch: return DIVEX_E_VALIDATION;
    case ErrorCode::UnknownVideo:
    case ErrorCode::OrdinalOutOfRange:
    case ErrorCode::NoSuchConcept:
    case ErrorCode::UnknownSource:
    case ErrorCode::MissingFeature: return DIVEX_E_NOT_FOUND;
    case ErrorCode::CorruptCatalog: return DIVEX_E_CORRUPT_CATALOG;
    case ErrorCode::Bind: return DIVEX_E_BIND;
    case ErrorCode::Internal: return DIVEX_E_INTERNAL;
    default: return DIVEX_E_INVALID_ARGUMENT;
  }
}

divex_status record(divex_status status, std::string code, std::string message) {
  lastErrorCode = std::move(code);
  lastError = std::move(message);
  return status;
}

template <typename F>
divex_status guarded(F&& body) {
  try {
    body();
    return DIVEX_OK;
  } catch (const divex::Error& e) {
    return record(status_of(e.code()), std::string(divex::to_string(e.code())), e.what());
  } catch (const std::bad_alloc&) {
    return record(DIVEX_E_INTERNAL, "internal_error", "out of memory");
  } catch (const std::exception& e) {
    return record(DIVEX_E_INTERNAL, "internal_error", e.what());
  }
}

divex_status null_argument(const char* name) {
  return record(DIVEX_E_INVALID_ARGUMENT, "invalid_argument", std::string(name) + " must not be NULL");
}

}  // namespace

extern "C" {

const char* divex_version(void) { return "5.0.0"; }

const char* divex_status_name(divex_status status) {
  switch (status) {
    case DIVEX_OK: return "ok";
    case DIVEX_E_INVALID_ARGUMENT: return "invalid_argument";
    case DIVEX_E_IO: return "io_error";
    case DIVEX_E_PARSE: return "parse_error";
    case DIVEX_E_VALIDATION: return "validation_error";
    case DIVEX_E_NOT_FOUND: return "not_found";
    case DIVEX_E_CORRUPT_CATALOG: return "corrupt_catalog";
    case DIVEX_E_BIND: return "bind_failed";
    case DIVEX_E_INTERNAL: return "internal_error";
  }
  return "unknown";
}

const char* divex_last_error(void) { return lastError.c_str(); }
const char* divex_last_error_code(void) { return lastErrorCode.c_str(); }

void divex_ingest_options_init(divex_ingest_options* options) {
  if (!options) return;
  std::memset(options, 0, sizeof *options);
  const divex::ShotParams defaults;
  options->cut_threshold = defaults.cutThreshold;
  options->min_shot_frames = defaults.minShotFrames;
}

divex_status divex_ingest(const divex_ingest_options* options, divex_ingest_summary* summary) {
  if (!options) return null_argument("options");
  if (!options->manifest_path) return null_argument("manifest_path");
  if (!options->out_dir) return null_argument("out_dir");
  if (options->concept_path_count && !options->concept_paths) return null_argument("concept_paths");
  return guarded([&] {
    divex::IngestOptions o;
    o.manifest = options->manifest_path;
    for (std::size_t i = 0; i < options->concept_path_count; ++i) {
      if (!options->concept_paths[i]) divex::fail(divex::ErrorCode::InvalidArgument, "concept path must not be NULL");
      o.conceptFiles.emplace_back(options->concept_paths[i]);
    }
    o.outDir = options->out_dir;
    o.seed = options->seed;
    o.precomputeMaps = options->precompute_maps != 0;
    o.shotParams.cutThreshold = options->cut_threshold;
    o.shotParams.minShotFrames = options->min_shot_frames;
    const auto s = divex::run_ingest(o);
    if (summary) *summary = {s.videos, s.shots, s.samples, s.detections, s.sources, s.featuremaps};
  });
}

void divex_service_options_init(divex_service_options* options) {
  if (!options) return;
  std::memset(options, 0, sizeof *options);
  const divex::ServiceConfig defaults;
  options->thumb_max_edge = defaults.thumbMaxEdge;
  options->default_k = defaults.defaultK;
  options->default_top_n = defaults.defaultTopN;
  options->default_tau = defaults.defaultTau;
}

divex_status divex_service_open(const divex_service_options* options, divex_service** out) {
  if (!options) return null_argument("options");
  if (!options->catalog_dir) return null_argument("catalog_dir");
  if (!out) return null_argument("out");
  *out = nullptr;
  return guarded([&] {
    divex::ServiceConfig config;
    config.catalogDir = options->catalog_dir;
    config.thumbMaxEdge = options->thumb_max_edge;
    if (options->has_som_seed) config.somSeed = options->som_seed;
    config.defaultK = options->default_k;
    config.defaultTopN = options->default_top_n;
    config.defaultTau = options->default_tau;
    auto api = divex::open_api(config);
    *out = new divex_service{std::shared_ptr<const divex::Api>(std::move(api))};
  });
}

void divex_service_close(divex_service* service) { delete service; }

divex_status divex_service_counts(const divex_service* service, size_t* videos, size_t* shots, size_t* frames) {
  if (!service) return null_argument("service");
  const auto& snap = service->api->snapshot();
  if (videos) *videos = snap.video_count();
  if (shots) *shots = snap.shot_count();
  if (frames) *frames = snap.sample_count();
  return DIVEX_OK;
}

divex_status divex_service_query(const divex_service* service, const char* target, int* http_status, char** body,
                                 size_t* body_length) {
  if (!service) return null_argument("service");
  if (!target) return null_argument("target");
  if (!body) return null_argument("body");
  *body = nullptr;
  return guarded([&] {
    const auto r = service->api->handle_target(target);
    auto* buf = static_cast<char*>(std::malloc(r.body.size() + 1));
    if (!buf) throw std::bad_alloc();
    std::memcpy(buf, r.body.data(), r.body.size());
    buf[r.body.size()] = '\0';
    *body = buf;
    if (http_status) *http_status = r.status;
    if (body_length) *body_length = r.body.size();
  });
}

void divex_free(void* pointer) { std::free(pointer); }

divex_status divex_server_start(divex_service* service, const char* bind_address, divex_server** out) {
  if (!service) return null_argument("service");
  if (!bind_address) return null_argument("bind_address");
  if (!out) return null_argument("out");
  *out = nullptr;
  return guarded([&] {
    auto http = std::make_unique<divex::HttpServer>(service->api, divex::parse_bind_address(bind_address));
    *out = new divex_server{std::move(http)};
  });
}

int divex_server_port(const divex_server* server) { return server ? server->http->port() : -1; }

void divex_server_stop(divex_server* server) {
  if (server) server->http->stop();
}

void divex_server_wait(divex_server* server) {
  if (server) server->http->wait();
}

void divex_server_destroy(divex_server* server) { delete server; }

}  // extern "C"
