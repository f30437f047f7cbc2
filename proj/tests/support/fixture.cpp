#include "fixture.hpp"

#include <algorithm>
#include <cstdio>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>
#include <unistd.h>

#include "divex/features.hpp"
#include "divex/ingest.hpp"
#include "divex/pipeline.hpp"

namespace divex::testing {

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  throw std::runtime_error("expected a divex::Error");
}

std::string message_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.what();
  }
  throw std::runtime_error("expected a divex::Error");
}

fs::path scratch_dir(const std::string& name) {
  // removed at exit unless DIVEX_KEEP_SCRATCH is set
  static const struct Root {
    fs::path path = fs::temp_directory_path() / ("divex-test-" + std::to_string(::getpid()));
    ~Root() {
      std::error_code ec;
      if (!std::getenv("DIVEX_KEEP_SCRATCH")) fs::remove_all(path, ec);
    }
  } root;
  auto dir = root.path / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& path, const std::string& content) {
  fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  out << content;
  if (!out) throw std::runtime_error("cannot write " + path.string());
}

Frame solid(int width, int height, Rgb color) { return Frame(width, height, color); }

namespace {

constexpr int kW = 32;
constexpr int kH = 24;

void write_frames(const fs::path& dir, const std::vector<Frame>& frames) {
  fs::create_directories(dir);
  for (std::size_t i = 0; i < frames.size(); ++i) write_ppm(dir / frame_file_name(i), frames[i]);
}

std::vector<Frame> red_blue() {
  std::vector<Frame> out;
  for (int i = 0; i < 20; ++i) out.push_back(solid(kW, kH, i < 10 ? kRed : kBlue));
  return out;
}

std::vector<Frame> beach() {
  std::vector<Frame> out;
  for (int i = 0; i < 30; ++i) {
    Frame f(kW, kH);
    for (int y = 0; y < kH; ++y) {
      for (int x = 0; x < kW; ++x) {
        if (i < 15) {
          // sky over sand, with a dark walker moving right
          Rgb c = y < kH / 2 ? Rgb{100, 160, 230} : Rgb{220, 200, 140};
          if (x >= i && x < i + 4 && y >= 8 && y < 16) c = {40, 30, 30};
          f.set(x, y, c);
        } else {
          const bool white = ((x + i) / 2) % 2 == 0;
          f.set(x, y, white ? Rgb{255, 255, 255} : Rgb{0, 0, 0});
        }
      }
    }
    out.push_back(std::move(f));
  }
  return out;
}

std::vector<Frame> noise() {
  std::mt19937_64 rng(2024);
  std::vector<Frame> out;
  for (int i = 0; i < 8; ++i) {
    Frame f(kW, kH);
    for (int y = 0; y < kH; ++y) {
      for (int x = 0; x < kW; ++x) {
        const auto v = static_cast<std::uint8_t>(rng() % 64);
        f.set(x, y, {static_cast<std::uint8_t>(v / 2), static_cast<std::uint8_t>(120 + v), static_cast<std::uint8_t>(v)});
      }
    }
    out.push_back(std::move(f));
  }
  return out;
}

}  // namespace

Fixture write_fixture(const fs::path& root) {
  Fixture fx{root, root / "manifest.jsonl", root / "netA.csv", root / "netB.csv"};
  write_frames(root / "frames/v1", red_blue());
  write_frames(root / "frames/v2", beach());
  write_frames(root / "frames/v3", noise());

  write_file(fx.manifest,
             R"({"videoId":"v1","framePath":"frames/v1","fps":10,"durationSec":2.0,"creationTime":"2009-05-01T10:00:00Z","title":"Red then blue","description":"Two solid colour shots"})"
             "\n"
             R"({"videoId":"v2","framePath":"frames/v2","fps":5,"durationSec":6.0,"creationTime":"2012-08-15T16:30:00Z","title":"Sunny Beach walk","description":"A walker on the sand, then stripes"})"
             "\n"
             R"({"videoId":"v3","framePath":"frames/v3","fps":2.5,"durationSec":3.0,"creationTime":"2007-03-10T08:00:00Z","title":"Meadow noise"})"
             "\n");

  write_file(fx.netA,
             "videoId,tSec,source,conceptId,score\n"
             "v1,0,netA,car,0.9\n"
             "v1,1,netA,car,0.4\n"
             "v2,0,netA,person,0.8\n"
             "v2,0,netA,apple,0.6\n"
             "v2,2,netA,car,0.35\n"
             "v2,3,netA,person,0.9\n"
             "v3,1,netA,apple,0.55\n"
             "v3,2,netA,CAR,0.2\n");
  write_file(fx.netB,
             "videoId,tSec,source,conceptId,score\n"
             "v1,1,netB,person,0.3\n"
             "v2,4,netB,car,0.45\n"
             "v3,0,netB,car,0.3\n"
             "v3,2,netB,dog,0.8\n");
  return fx;
}

fs::path ingest_fixture(const Fixture& fx, std::uint64_t seed, bool precompute) {
  IngestOptions o;
  o.manifest = fx.manifest;
  o.conceptFiles = {fx.netA, fx.netB};
  o.outDir = fx.root / "catalog";
  o.seed = seed;
  o.precomputeMaps = precompute;
  run_ingest(o);
  return o.outDir;
}

// --- random catalogs -----------------------------------------------------------

namespace {

double unit(std::mt19937_64& rng) { return std::uniform_real_distribution<double>(0.0, 1.0)(rng); }

template <typename T>
T pick(std::mt19937_64& rng, std::initializer_list<T> values) {
  return *(values.begin() + rng() % values.size());
}

}  // namespace

std::vector<double> random_color(std::mt19937_64& rng, bool coarse) {
  std::vector<double> v(kColorDims, 0.0);
  if (coarse) {
    for (int i = 0; i < 4; ++i) v[rng() % 8] += 0.25;
    return v;
  }
  double sum = 0.0;
  for (auto& x : v) {
    x = rng() % 3 == 0 ? unit(rng) : 0.0;
    sum += x;
  }
  if (sum == 0.0) {
    v[rng() % kColorDims] = 1.0;
    return v;
  }
  for (auto& x : v) x /= sum;
  return v;
}

std::vector<double> random_texture(std::mt19937_64& rng, bool coarse) {
  std::vector<double> v(kTextureDims, 0.0);
  for (std::size_t b = 0; b < kTextureDims; b += 5) {
    if (rng() % 5 == 0) continue;  // inactive block
    if (coarse) {
      v[b + rng() % 2] += 0.5;
      v[b + rng() % 2] += 0.5;
      continue;
    }
    double sum = 0.0;
    for (std::size_t i = b; i < b + 5; ++i) sum += (v[i] = unit(rng));
    for (std::size_t i = b; i < b + 5; ++i) v[i] /= sum;
  }
  return v;
}

std::vector<double> random_motion(std::mt19937_64& rng, bool coarse) {
  std::vector<double> v(kMotionDims);
  for (auto& x : v) x = coarse ? pick(rng, {0.0, 0.5, 1.0}) : unit(rng);
  return v;
}

std::vector<double> random_concepts(std::mt19937_64& rng, std::size_t dims, bool coarse) {
  std::vector<double> v(dims);
  for (auto& x : v) x = rng() % 2 == 0 ? 0.0 : (coarse ? pick(rng, {0.5, 1.0}) : unit(rng));
  return v;
}

CatalogData random_catalog(const RandomCatalogOptions& o) {
  std::mt19937_64 rng(o.seed);
  CatalogData data;
  data.seed = o.seed;
  const std::size_t conceptDims = o.sources.size() * o.conceptsPerSource;

  for (std::size_t vi = 0; vi < o.videos; ++vi) {
    char id[32];
    std::snprintf(id, sizeof id, "vid%03zu", vi);
    VideoRecord v;
    v.videoId = id;
    v.framePath = "/nonexistent/" + v.videoId;
    v.fps = 1.0;
    v.durationSec = static_cast<double>(o.secondsPerVideo);
    char created[32];
    std::snprintf(created, sizeof created, "%04d-%02d-%02dT%02d:00:00Z", 2000 + static_cast<int>(rng() % 21),
                  1 + static_cast<int>(rng() % 12), 1 + static_cast<int>(rng() % 28), static_cast<int>(rng() % 24));
    v.creationTime = created;
    v.title = "video " + v.videoId;
    data.videos.push_back(v);

    const auto frames = o.secondsPerVideo;
    const auto shots = std::min(o.shotsPerVideo, frames);
    std::set<std::uint64_t> cuts;
    while (cuts.size() + 1 < shots) cuts.insert(1 + rng() % (frames - 1));
    std::vector<std::uint64_t> starts{0};
    starts.insert(starts.end(), cuts.begin(), cuts.end());
    for (std::size_t s = 0; s < starts.size(); ++s) {
      const auto end = s + 1 < starts.size() ? starts[s + 1] - 1 : frames - 1;
      data.shots.push_back({v.videoId, s, starts[s], end, (starts[s] + end) / 2});
    }
    for (std::uint64_t t = 0; t < frames; ++t) data.samples.push_back({v.videoId, t, t});

    auto addFeatures = [&](const ItemKey& key) {
      const auto k = key.str();
      data.features.push_back({key, k, {FeatureKind::Color, random_color(rng, o.coarse)}});
      data.features.push_back({key, k, {FeatureKind::Texture, random_texture(rng, o.coarse)}});
      data.features.push_back({key, k, {FeatureKind::Motion, random_motion(rng, o.coarse)}});
      if (conceptDims) data.features.push_back({key, k, {FeatureKind::Concept, random_concepts(rng, conceptDims, o.coarse)}});
    };
    for (std::size_t s = 0; s < starts.size(); ++s) addFeatures(ItemKey::shot(v.videoId, s));
    for (std::uint64_t t = 0; t < frames; ++t) addFeatures(ItemKey::frame(v.videoId, t));

    // Frame detections, then shot detections max-pooled from them.
    std::vector<ConceptDetection> frameDets;
    for (std::uint64_t t = 0; t < frames; ++t) {
      for (const auto& src : o.sources) {
        for (std::size_t c = 0; c < o.conceptsPerSource; ++c) {
          if (unit(rng) >= o.detectionRate) continue;
          const double score = o.coarse ? pick(rng, {0.1, 0.3, 0.5, 0.7, 0.9, 1.0}) : std::round(unit(rng) * 1000) / 1000;
          frameDets.push_back({ItemKey::frame(v.videoId, t), src, "c" + std::to_string(c), score});
        }
      }
    }
    for (std::size_t s = 0; s < starts.size(); ++s) {
      const auto& shot = data.shots[data.shots.size() - starts.size() + s];
      std::map<std::pair<std::string, std::string>, double> best;
      for (const auto& d : frameDets) {
        if (d.item.ordinal < shot.startFrame || d.item.ordinal > shot.endFrame) continue;
        auto& b = best[{d.source, d.conceptId}];
        b = std::max(b, d.score);
      }
      for (const auto& [term, score] : best) {
        data.detections.push_back({ItemKey::shot(v.videoId, s), term.first, term.second, score});
      }
    }
    data.detections.insert(data.detections.end(), frameDets.begin(), frameDets.end());
  }
  return data;
}

}  // namespace divex::testing
