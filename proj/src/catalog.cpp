#include "divex/catalog.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <set>

#include "divex/error.hpp"
#include "jsonl.hpp"

namespace divex {

namespace {

int read_digits(std::string_view text, std::size_t pos, std::size_t count, const std::string& what) {
  if (pos + count > text.size()) fail(ErrorCode::Validation, "truncated timestamp '" + std::string(text) + "' (" + what + ")");
  int value = 0;
  for (std::size_t i = pos; i < pos + count; ++i) {
    if (text[i] < '0' || text[i] > '9') {
      fail(ErrorCode::Validation, "malformed timestamp '" + std::string(text) + "' (" + what + ")");
    }
    value = value * 10 + (text[i] - '0');
  }
  return value;
}

void expect_char(std::string_view text, std::size_t pos, char c) {
  if (pos >= text.size() || text[pos] != c) {
    fail(ErrorCode::Validation, "malformed timestamp '" + std::string(text) + "': expected '" + std::string(1, c) + "'");
  }
}

}  // namespace

std::int64_t parse_iso8601_ms(std::string_view text) {
  using namespace std::chrono;
  const int y = read_digits(text, 0, 4, "year");
  expect_char(text, 4, '-');
  const int mo = read_digits(text, 5, 2, "month");
  expect_char(text, 7, '-');
  const int d = read_digits(text, 8, 2, "day");
  const year_month_day ymd{year{y}, month{static_cast<unsigned>(mo)}, day{static_cast<unsigned>(d)}};
  if (!ymd.ok()) fail(ErrorCode::Validation, "invalid calendar date in '" + std::string(text) + "'");

  std::int64_t ms = duration_cast<milliseconds>(sys_days{ymd}.time_since_epoch()).count();
  std::size_t pos = 10;
  if (pos == text.size()) return ms;

  if (text[pos] != 'T' && text[pos] != ' ') fail(ErrorCode::Validation, "malformed timestamp '" + std::string(text) + "'");
  const int hh = read_digits(text, pos + 1, 2, "hour");
  expect_char(text, pos + 3, ':');
  const int mm = read_digits(text, pos + 4, 2, "minute");
  int ss = 0;
  int frac = 0;
  pos += 6;
  if (pos < text.size() && text[pos] == ':') {
    ss = read_digits(text, pos + 1, 2, "second");
    pos += 3;
    if (pos < text.size() && text[pos] == '.') {
      ++pos;
      int scale = 100;
      std::size_t digits = 0;
      while (pos < text.size() && text[pos] >= '0' && text[pos] <= '9') {
        frac += (text[pos] - '0') * scale;
        scale /= 10;
        ++pos;
        ++digits;
      }
      if (digits == 0) fail(ErrorCode::Validation, "malformed fraction in '" + std::string(text) + "'");
    }
  }
  if (hh > 23 || mm > 59 || ss > 60) fail(ErrorCode::Validation, "time out of range in '" + std::string(text) + "'");
  ms += ((hh * 60LL + mm) * 60LL + ss) * 1000LL + frac;

  if (pos == text.size()) return ms;
  if (text[pos] == 'Z' && pos + 1 == text.size()) return ms;
  if (text[pos] == '+' || text[pos] == '-') {
    const int oh = read_digits(text, pos + 1, 2, "offset hour");
    expect_char(text, pos + 3, ':');
    const int om = read_digits(text, pos + 4, 2, "offset minute");
    if (pos + 6 != text.size()) fail(ErrorCode::Validation, "trailing characters in '" + std::string(text) + "'");
    const std::int64_t offset = (oh * 60LL + om) * 60000LL;
    return text[pos] == '+' ? ms - offset : ms + offset;
  }
  fail(ErrorCode::Validation, "trailing characters in '" + std::string(text) + "'");
}

std::uint64_t VideoRecord::frame_count() const {
  const auto n = std::llround(durationSec * fps);
  return n < 1 ? 1 : static_cast<std::uint64_t>(n);
}

int VideoRecord::creation_year() const {
  return read_digits(creationTime, 0, 4, "year");
}

std::int64_t VideoRecord::creation_epoch_ms() const { return parse_iso8601_ms(creationTime); }

void validate(const VideoRecord& video) {
  if (video.videoId.empty()) fail(ErrorCode::Validation, "videoId must be non-empty");
  const auto ctx = "video '" + video.videoId + "': ";
  if (!(std::isfinite(video.fps) && video.fps > 0)) fail(ErrorCode::Validation, ctx + "fps must be positive");
  if (!(std::isfinite(video.durationSec) && video.durationSec > 0)) {
    fail(ErrorCode::Validation, ctx + "durationSec must be positive");
  }
  if (video.framePath.empty()) fail(ErrorCode::Validation, ctx + "framePath must be non-empty");
  try {
    parse_iso8601_ms(video.creationTime);
  } catch (const Error& e) {
    fail(ErrorCode::Validation, ctx + "creationTime: " + e.what());
  }
}

std::vector<VideoRecord> load_manifest(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) fail(ErrorCode::Io, "manifest not found: '" + path.string() + "'");
  const auto base = std::filesystem::absolute(path).parent_path();

  std::vector<VideoRecord> videos;
  std::set<std::string> seen;
  jsonl::read(path, [&](std::size_t, const jsonl::Json& obj) {
    VideoRecord v;
    v.videoId = jsonl::get_string(obj, "videoId");
    std::filesystem::path frames = jsonl::get_string(obj, "framePath");
    v.framePath = frames.empty() ? frames : (frames.is_absolute() ? frames : base / frames).lexically_normal();
    v.fps = jsonl::get_number(obj, "fps");
    v.durationSec = jsonl::get_number(obj, "durationSec");
    v.creationTime = jsonl::get_string(obj, "creationTime");
    if (obj.contains("title")) v.title = jsonl::get_string(obj, "title");
    if (obj.contains("description")) v.description = jsonl::get_string(obj, "description");
    validate(v);
    if (!seen.insert(v.videoId).second) fail(ErrorCode::DuplicateId, "duplicate videoId '" + v.videoId + "'");
    videos.push_back(std::move(v));
  });
  return videos;
}

std::size_t VideoEntry::shot_containing(std::uint64_t frame) const {
  auto it = std::upper_bound(shots.begin(), shots.end(), frame,
                             [](std::uint64_t f, const ShotRecord& s) { return f < s.startFrame; });
  if (it == shots.begin()) return 0;
  return static_cast<std::size_t>(std::distance(shots.begin(), it) - 1);
}

// ---------------------------------------------------------------------------

SnapshotPtr CatalogSnapshot::empty_snapshot() {
  static const SnapshotPtr empty{new CatalogSnapshot()};
  return empty;
}

SnapshotPtr CatalogSnapshot::make(CatalogData data) {
  std::shared_ptr<CatalogSnapshot> snap{new CatalogSnapshot()};
  snap->seed_ = data.seed;

  auto corrupt = [](const std::string& msg) { fail(ErrorCode::CorruptCatalog, msg); };

  for (auto& v : data.videos) {
    try {
      validate(v);
    } catch (const Error& e) {
      corrupt(e.what());
    }
    if (!snap->byId_.emplace(v.videoId, snap->videos_.size()).second) corrupt("duplicate videoId '" + v.videoId + "'");
    snap->videos_.push_back(VideoEntry{std::move(v), {}, {}});
  }

  for (auto& s : data.shots) {
    auto it = snap->byId_.find(s.videoId);
    if (it == snap->byId_.end()) corrupt("shot references unknown video '" + s.videoId + "'");
    snap->videos_[it->second].shots.push_back(std::move(s));
  }
  for (auto& s : data.samples) {
    auto it = snap->byId_.find(s.videoId);
    if (it == snap->byId_.end()) corrupt("sample references unknown video '" + s.videoId + "'");
    snap->videos_[it->second].samples.push_back(std::move(s));
  }

  for (auto& entry : snap->videos_) {
    const auto& id = entry.record.videoId;
    const auto last = entry.record.last_frame();
    auto& shots = entry.shots;
    std::sort(shots.begin(), shots.end(), [](const auto& a, const auto& b) { return a.shotIndex < b.shotIndex; });
    if (shots.empty()) corrupt("video '" + id + "' has no shots");
    std::uint64_t next = 0;
    for (std::size_t i = 0; i < shots.size(); ++i) {
      const auto& s = shots[i];
      if (s.shotIndex != i) corrupt("video '" + id + "': shot indices are not consecutive");
      if (s.startFrame != next) corrupt("video '" + id + "': shot " + std::to_string(i) + " leaves a gap or overlaps");
      if (s.endFrame < s.startFrame || s.keyframe < s.startFrame || s.keyframe > s.endFrame) {
        corrupt("video '" + id + "': shot " + std::to_string(i) + " has inconsistent bounds");
      }
      next = s.endFrame + 1;
    }
    if (next != last + 1) corrupt("video '" + id + "': shots do not cover all frames");

    auto& samples = entry.samples;
    std::sort(samples.begin(), samples.end(), [](const auto& a, const auto& b) { return a.tSec < b.tSec; });
    for (std::size_t i = 0; i < samples.size(); ++i) {
      const auto& s = samples[i];
      if (s.tSec != i) corrupt("video '" + id + "': sample seconds are not consecutive");
      if (static_cast<double>(s.tSec) >= entry.record.durationSec) corrupt("video '" + id + "': sample beyond duration");
      if (s.frameIndex > last) corrupt("video '" + id + "': sample frame out of range");
    }
    if (samples.empty()) corrupt("video '" + id + "' has no frame samples");

    snap->shotCount_ += shots.size();
    snap->sampleCount_ += samples.size();
  }

  std::size_t conceptDims = 0;
  bool haveConcept = false;
  for (auto& f : data.features) {
    try {
      snap->resolve(f.item);
      validate(f.vector);
    } catch (const Error& e) {
      corrupt(std::string("feature for '") + f.item.str() + "': " + e.what());
    }
    if (f.vector.kind == FeatureKind::Concept) {
      if (haveConcept && f.vector.dims() != conceptDims) corrupt("concept vectors have inconsistent dimensions");
      conceptDims = f.vector.dims();
      haveConcept = true;
    }
    f.key = f.item.str();
    snap->features_[slot(f.item.granularity, f.vector.kind)].push_back(std::move(f));
  }
  for (std::size_t i = 0; i < snap->features_.size(); ++i) {
    auto& list = snap->features_[i];
    std::sort(list.begin(), list.end(), [](const auto& a, const auto& b) { return a.key < b.key; });
    for (std::size_t j = 0; j < list.size(); ++j) {
      if (!snap->featureLookup_[i].emplace(list[j].key, j).second) {
        corrupt("duplicate " + std::string(to_string(list[j].vector.kind)) + " feature for '" + list[j].key + "'");
      }
    }
  }

  for (const auto& d : data.detections) {
    try {
      snap->resolve(d.item);
    } catch (const Error& e) {
      corrupt(std::string("concept detection: ") + e.what());
    }
    if (!(d.score >= 0.0 && d.score <= 1.0)) corrupt("concept score out of range for '" + d.item.str() + "'");
    if (d.conceptId.empty() || d.source.empty()) corrupt("concept detection with empty source or concept");
  }
  snap->index_ = ConceptIndex::build(data.detections);
  return snap;
}

const VideoEntry* CatalogSnapshot::find_video(std::string_view videoId) const {
  auto it = byId_.find(std::string(videoId));
  return it == byId_.end() ? nullptr : &videos_[it->second];
}

ResolvedItem CatalogSnapshot::resolve(const ItemKey& key) const {
  const auto* video = find_video(key.videoId);
  if (!video) fail(ErrorCode::UnknownVideo, "unknown video '" + key.videoId + "'");
  ResolvedItem out;
  out.video = video;
  if (key.granularity == Granularity::Shot) {
    if (key.ordinal >= video->shots.size()) {
      fail(ErrorCode::OrdinalOutOfRange, "video '" + key.videoId + "' has no shot " + std::to_string(key.ordinal));
    }
    out.shot = &video->shots[key.ordinal];
  } else {
    if (key.ordinal >= video->samples.size()) {
      fail(ErrorCode::OrdinalOutOfRange, "video '" + key.videoId + "' has no frame sample at " + std::to_string(key.ordinal) + "s");
    }
    out.sample = &video->samples[key.ordinal];
  }
  return out;
}

const FeatureVector* CatalogSnapshot::feature(const ItemKey& key, FeatureKind kind) const {
  const auto s = slot(key.granularity, kind);
  auto it = featureLookup_[s].find(key.str());
  return it == featureLookup_[s].end() ? nullptr : &features_[s][it->second].vector;
}

std::span<const FeatureEntry> CatalogSnapshot::features(Granularity g, FeatureKind kind) const {
  return features_[slot(g, kind)];
}

CatalogData CatalogSnapshot::data() const {
  CatalogData out;
  out.seed = seed_;
  for (const auto& v : videos_) {
    out.videos.push_back(v.record);
    out.shots.insert(out.shots.end(), v.shots.begin(), v.shots.end());
    out.samples.insert(out.samples.end(), v.samples.begin(), v.samples.end());
    auto add = [&](const ItemKey& key) {
      for (auto kind : kAllFeatureKinds) {
        if (const auto* f = feature(key, kind)) out.features.push_back(FeatureEntry{key, key.str(), *f});
      }
    };
    for (const auto& s : v.shots) add(ItemKey::shot(s.videoId, s.shotIndex));
    for (const auto& s : v.samples) add(ItemKey::frame(s.videoId, s.tSec));
  }
  out.detections = index_.detections();
  return out;
}

// ---------------------------------------------------------------------------

Catalog::Catalog() : current_(CatalogSnapshot::empty_snapshot()) {}

Catalog::Catalog(std::filesystem::path dir) : dir_(std::move(dir)), current_(load_catalog(dir_)) {}

SnapshotPtr Catalog::snapshot() const {
  std::lock_guard lock(mutex_);
  return current_;
}

void Catalog::publish(SnapshotPtr next) {
  if (!next) next = CatalogSnapshot::empty_snapshot();
  std::lock_guard lock(mutex_);
  current_.swap(next);
}

void Catalog::reload() {
  if (dir_.empty()) fail(ErrorCode::InvalidArgument, "catalog has no directory to reload from");
  publish(load_catalog(dir_));
}

}  // namespace divex
