#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "divex/catalog.hpp"
#include "divex/error.hpp"
#include "divex/frame.hpp"

namespace divex::testing {

namespace fs = std::filesystem;

/// Code of the divex::Error thrown by `fn`; fails the test when nothing is thrown.
ErrorCode code_of(const std::function<void()>& fn);
/// Message of the divex::Error thrown by `fn`.
std::string message_of(const std::function<void()>& fn);

/// Fresh, empty directory under the system temp dir.
fs::path scratch_dir(const std::string& name);

std::string read_file(const fs::path& path);
void write_file(const fs::path& path, const std::string& content);

Frame solid(int width, int height, Rgb color);

inline constexpr Rgb kRed{255, 0, 0};
inline constexpr Rgb kBlue{0, 0, 255};

/// The three-video corpus used by ingestion, service and acceptance tests.
///   v1: 20 frames at 10 fps, frames 0-9 red, 10-19 blue (2009)
///   v2: 30 frames at 5 fps, beach scene then stripes, one cut at 15 (2012)
///   v3: 8 frames at 2.5 fps, noise, one shot (2007)
/// Score files: netA (car, person, apple) and netB (car, person, dog).
struct Fixture {
  fs::path root;
  fs::path manifest;
  fs::path netA;
  fs::path netB;
};

Fixture write_fixture(const fs::path& root);

/// Ingests the fixture with both score files into `root/catalog`.
fs::path ingest_fixture(const Fixture& fx, std::uint64_t seed = 7, bool precompute = true);

struct RandomCatalogOptions {
  std::size_t videos = 10;
  std::size_t shotsPerVideo = 4;
  std::size_t secondsPerVideo = 8;
  std::vector<std::string> sources{"netA", "netB"};
  std::size_t conceptsPerSource = 6;
  double detectionRate = 0.3;
  /// Values drawn from a coarse lattice so equal distances (and ties) occur.
  bool coarse = false;
  std::uint64_t seed = 1;
};

/// Structurally valid catalog with random features and detections. Each
/// video has fps 1, so frame index equals second.
CatalogData random_catalog(const RandomCatalogOptions& options);

/// Random unit-mass histogram, 5-bin-normalised texture, motion in [0,1].
std::vector<double> random_color(std::mt19937_64& rng, bool coarse);
std::vector<double> random_texture(std::mt19937_64& rng, bool coarse);
std::vector<double> random_motion(std::mt19937_64& rng, bool coarse);
std::vector<double> random_concepts(std::mt19937_64& rng, std::size_t dims, bool coarse);

}  // namespace divex::testing
