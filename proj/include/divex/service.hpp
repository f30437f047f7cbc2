#pragma once

#include <cstdint>
#include <filesystem>
#include <future>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <thread>
#include <unordered_map>

#include "divex/catalog.hpp"
#include "divex/error.hpp"
#include "divex/explore.hpp"

namespace divex {

struct BindAddress {
  std::string host = "127.0.0.1";
  int port = 8080;
};

/// `host:port`, `[v6]:port` or `:port` (all interfaces). Port 0 picks a free port.
BindAddress parse_bind_address(std::string_view text);

struct ServiceConfig {
  std::filesystem::path catalogDir;
  BindAddress bind;
  int thumbMaxEdge = 256;
  std::optional<std::uint64_t> somSeed;  // defaults to the catalog's ingest seed
  std::size_t defaultK = 50;
  std::size_t defaultTopN = kDefaultTopN;
  double defaultTau = 0.5;
};

void validate(const ServiceConfig& config);

/// Wire form of every failure. `code` is one of:
///   invalid_parameter, invalid_criteria, invalid_item_key   (400)
///   not_found, unknown_video, ordinal_out_of_range,
///   no_such_concept, unknown_source                          (404)
///   missing_feature                                          (409)
///   internal_error                                           (500)
struct ApiError {
  int httpStatus = 500;
  std::string code;
  std::string message;
  std::string detailJson;  // serialised JSON value, empty for none

  std::string body() const;
};

/// Maps an engine error onto the closed API code set.
ApiError to_api_error(const Error& error);

struct ApiResponse {
  int status = 200;
  std::string contentType = "application/json";
  std::string body;
};

using QueryParams = std::multimap<std::string, std::string>;

/// Transport-independent request handler over one immutable snapshot. All
/// methods are safe to call concurrently.
class Api {
 public:
  Api(SnapshotPtr snapshot, ServiceConfig config, std::vector<Featuremap> precomputed = {});

  /// `path` is already percent-decoded.
  ApiResponse handle(std::string_view path, const QueryParams& params) const;
  /// Raw request target, e.g. `/search/concepts?q=car&threshold=0.5`.
  ApiResponse handle_target(std::string_view target) const;

  const CatalogSnapshot& snapshot() const { return *snapshot_; }
  const ServiceConfig& config() const { return config_; }

  /// Number of featuremaps computed on demand (not served from cache).
  std::size_t featuremap_builds() const;

  std::shared_ptr<const Featuremap> featuremap(const FeaturemapRequest& request) const;

 private:
  ApiResponse dispatch(std::string_view path, const QueryParams& params) const;

  SnapshotPtr snapshot_;
  ServiceConfig config_;
  std::uint64_t seed_;

  mutable std::mutex cacheMutex_;
  mutable std::unordered_map<std::string, std::shared_future<std::shared_ptr<const Featuremap>>> cache_;
  mutable std::size_t builds_ = 0;
};

/// Loads the catalog directory and any precomputed featuremaps.
std::unique_ptr<Api> open_api(const ServiceConfig& config);

/// HTTP/1.1 front end for an Api. Binds in the constructor (Error(Bind) on
/// failure) and serves on a background thread until stop().
class HttpServer {
 public:
  HttpServer(std::shared_ptr<const Api> api, const BindAddress& bind);
  ~HttpServer();
  HttpServer(const HttpServer&) = delete;
  HttpServer& operator=(const HttpServer&) = delete;

  int port() const { return port_; }
  void stop();
  /// Blocks until the listener thread exits.
  void wait();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
  int port_ = 0;
};

}  // namespace divex
