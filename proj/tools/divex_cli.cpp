// Command-line front end: offline ingestion and the HTTP service.

#include <csignal>
#include <cstdio>
#include <string>
#include <vector>

#include <pthread.h>

#include <CLI11.hpp>

#include "divex/divex.h"

namespace {

int report(divex_status status) {
  std::fprintf(stderr, "divex: %s: %s\n", divex_last_error_code(), divex_last_error());
  return status == DIVEX_E_INTERNAL ? 70 : 1;
}

int run_ingest(const std::string& manifest, const std::vector<std::string>& concepts, const std::string& out,
               std::uint64_t seed, bool precompute, double cutThreshold, std::uint64_t minShotFrames) {
  std::vector<const char*> paths;
  for (const auto& c : concepts) paths.push_back(c.c_str());

  divex_ingest_options opts;
  divex_ingest_options_init(&opts);
  opts.manifest_path = manifest.c_str();
  opts.concept_paths = paths.data();
  opts.concept_path_count = paths.size();
  opts.out_dir = out.c_str();
  opts.seed = seed;
  opts.precompute_maps = precompute ? 1 : 0;
  opts.cut_threshold = cutThreshold;
  opts.min_shot_frames = minShotFrames;

  divex_ingest_summary s;
  if (auto st = divex_ingest(&opts, &s); st != DIVEX_OK) return report(st);
  std::printf("%zu videos\n%zu shots\n%zu frames\n%zu detections\n%zu sources\n%zu featuremaps\n", s.videos, s.shots,
              s.samples, s.detections, s.sources, s.featuremaps);
  return 0;
}

int run_serve(const std::string& catalog, const std::string& bind, int thumbMaxEdge, const std::string& somSeed) {
  // Blocked before any thread starts; sigwait below receives them.
  sigset_t signals;
  sigemptyset(&signals);
  sigaddset(&signals, SIGINT);
  sigaddset(&signals, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &signals, nullptr);

  divex_service_options opts;
  divex_service_options_init(&opts);
  opts.catalog_dir = catalog.c_str();
  if (thumbMaxEdge > 0) opts.thumb_max_edge = thumbMaxEdge;
  if (!somSeed.empty()) {
    opts.has_som_seed = 1;
    opts.som_seed = std::stoull(somSeed);
  }

  divex_service* service = nullptr;
  if (auto st = divex_service_open(&opts, &service); st != DIVEX_OK) return report(st);
  divex_server* server = nullptr;
  if (auto st = divex_server_start(service, bind.c_str(), &server); st != DIVEX_OK) {
    divex_service_close(service);
    return report(st);
  }
  std::size_t videos = 0, shots = 0, frames = 0;
  divex_service_counts(service, &videos, &shots, &frames);
  divex_service_close(service);
  std::fprintf(stderr, "divex: serving %zu videos, %zu shots, %zu frames on port %d\n", videos, shots, frames,
               divex_server_port(server));

  int sig = 0;
  sigwait(&signals, &sig);
  std::fprintf(stderr, "divex: %s received, shutting down\n", sig == SIGINT ? "SIGINT" : "SIGTERM");
  divex_server_stop(server);
  divex_server_wait(server);
  divex_server_destroy(server);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"divex: interactive video exploration engine"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(divex_version()));

  std::string manifest, out;
  std::vector<std::string> concepts;
  std::uint64_t seed = 0;
  bool precompute = false;
  double cutThreshold = 0.5;
  std::uint64_t minShotFrames = 10;
  auto* ingest = app.add_subcommand("ingest", "Ingest videos into a catalog directory");
  ingest->add_option("--manifest", manifest, "Video manifest (JSON lines)")->required()->envname("DIVEX_MANIFEST");
  ingest->add_option("--concepts", concepts, "Concept score CSV files")->envname("DIVEX_CONCEPTS")->delimiter(',');
  ingest->add_option("--out", out, "Output catalog directory")->required()->envname("DIVEX_OUT");
  ingest->add_option("--seed", seed, "Seed for featuremap training")->envname("DIVEX_SEED");
  ingest->add_flag("--precompute-maps", precompute, "Build featuremaps during ingest")
      ->envname("DIVEX_PRECOMPUTE_MAPS");
  ingest->add_option("--cut-threshold", cutThreshold, "Shot cut histogram distance")
      ->envname("DIVEX_CUT_THRESHOLD");
  ingest->add_option("--min-shot-frames", minShotFrames, "Minimum shot length in frames")
      ->envname("DIVEX_MIN_SHOT_FRAMES");

  std::string catalog, bind = "127.0.0.1:8080", somSeed;
  int thumbMaxEdge = 0;
  auto* serve = app.add_subcommand("serve", "Serve the HTTP API over a catalog directory");
  serve->add_option("--catalog", catalog, "Catalog directory")->required()->envname("DIVEX_CATALOG");
  serve->add_option("--bind", bind, "host:port to listen on")->envname("DIVEX_BIND");
  serve->add_option("--thumb-max-edge", thumbMaxEdge, "Longest thumbnail edge in pixels")
      ->envname("DIVEX_THUMB_MAX_EDGE");
  serve->add_option("--som-seed", somSeed, "Seed for on-demand featuremaps")->envname("DIVEX_SOM_SEED");

  CLI11_PARSE(app, argc, argv);

  if (*ingest) return run_ingest(manifest, concepts, out, seed, precompute, cutThreshold, minShotFrames);
  return run_serve(catalog, bind, thumbMaxEdge, somSeed);
}
