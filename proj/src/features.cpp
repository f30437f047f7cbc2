#include "divex/features.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <set>
#include <tuple>
#include <unordered_map>

#include "divex/error.hpp"

namespace divex {

std::string_view to_string(FeatureKind kind) {
  switch (kind) {
    case FeatureKind::Concept: return "concept";
    case FeatureKind::Color: return "color";
    case FeatureKind::Texture: return "texture";
    case FeatureKind::Motion: return "motion";
  }
  return "concept";
}

FeatureKind parse_feature_kind(std::string_view text) {
  for (auto k : kAllFeatureKinds) {
    if (to_string(k) == text) return k;
  }
  fail(ErrorCode::InvalidArgument, "unknown feature kind '" + std::string(text) + "'");
}

void validate(const FeatureVector& v) {
  const auto name = std::string(to_string(v.kind));
  auto bad = [&](const std::string& why) { fail(ErrorCode::Validation, name + " vector: " + why); };
  for (double x : v.values) {
    if (!std::isfinite(x)) bad("non-finite value");
    if (x < 0.0) bad("negative value");
  }
  switch (v.kind) {
    case FeatureKind::Color: {
      if (v.dims() != kColorDims) bad("expected 128 dimensions");
      double sum = 0.0;
      for (double x : v.values) sum += x;
      if (std::abs(sum - 1.0) > 1e-6) bad("histogram mass is not 1");
      break;
    }
    case FeatureKind::Texture:
      if (v.dims() != kTextureDims) bad("expected 80 dimensions");
      for (std::size_t b = 0; b < kTextureDims; b += 5) {
        double sum = 0.0;
        for (std::size_t i = b; i < b + 5; ++i) sum += v.values[i];
        if (sum != 0.0 && std::abs(sum - 1.0) > 1e-6) bad("edge block is neither normalised nor empty");
      }
      break;
    case FeatureKind::Motion:
      if (v.dims() != kMotionDims) bad("expected 16 dimensions");
      break;
    case FeatureKind::Concept:
      for (double x : v.values) {
        if (x > 1.0) bad("concept score above 1");
      }
      break;
  }
}

// --- colour ------------------------------------------------------------------

std::size_t color_bin(Rgb p) {
  const int r = p.r, g = p.g, b = p.b;
  const int mx = std::max({r, g, b});
  const int mn = std::min({r, g, b});
  const int delta = mx - mn;

  double h = 0.0;
  if (delta != 0) {
    if (mx == r) {
      h = 60.0 * static_cast<double>(g - b) / delta;
      if (h < 0.0) h += 360.0;
    } else if (mx == g) {
      h = 60.0 * (static_cast<double>(b - r) / delta + 2.0);
    } else {
      h = 60.0 * (static_cast<double>(r - g) / delta + 4.0);
    }
  }
  const double s = mx == 0 ? 0.0 : static_cast<double>(delta) / mx;
  const double v = mx / 255.0;

  const auto hIdx = std::min<std::size_t>(static_cast<std::size_t>(h / 360.0 * 8.0), 7);
  const auto sIdx = std::min<std::size_t>(static_cast<std::size_t>(s * 4.0), 3);
  const auto vIdx = std::min<std::size_t>(static_cast<std::size_t>(v * 4.0), 3);
  return hIdx * 16 + sIdx * 4 + vIdx;
}

FeatureVector color_histogram(const Frame& frame) {
  std::array<std::uint64_t, kColorDims> counts{};
  for (int y = 0; y < frame.height(); ++y) {
    for (int x = 0; x < frame.width(); ++x) ++counts[color_bin(frame.at(x, y))];
  }
  const double total = static_cast<double>(frame.width()) * frame.height();
  FeatureVector out{FeatureKind::Color, std::vector<double>(kColorDims, 0.0)};
  for (std::size_t i = 0; i < kColorDims; ++i) out.values[i] = static_cast<double>(counts[i]) / total;
  return out;
}

// --- texture -----------------------------------------------------------------

namespace {

struct Cell {
  int x0, x1, y0, y1;
};

// Cell (cx, cy) of a 4x4 partition; integer bounds, right/bottom exclusive.
Cell grid_cell(int width, int height, int cx, int cy) {
  return {cx * width / 4, (cx + 1) * width / 4, cy * height / 4, (cy + 1) * height / 4};
}

std::vector<double> luma_plane(const Frame& frame) {
  std::vector<double> out(static_cast<std::size_t>(frame.width()) * frame.height());
  for (int y = 0; y < frame.height(); ++y) {
    for (int x = 0; x < frame.width(); ++x) out[static_cast<std::size_t>(y) * frame.width() + x] = frame.luma(x, y);
  }
  return out;
}

}  // namespace

FeatureVector texture_descriptor(const Frame& frame) {
  if (frame.width() < 8 || frame.height() < 8) {
    fail(ErrorCode::FrameTooSmall, "texture needs at least 8x8 pixels, got " + std::to_string(frame.width()) + "x" +
                                       std::to_string(frame.height()));
  }
  const int w = frame.width();
  const auto luma = luma_plane(frame);
  auto at = [&](int x, int y) { return luma[static_cast<std::size_t>(y) * w + x] / 255.0; };
  const double root2 = std::sqrt(2.0);

  FeatureVector out{FeatureKind::Texture, std::vector<double>(kTextureDims, 0.0)};
  for (int cy = 0; cy < 4; ++cy) {
    for (int cx = 0; cx < 4; ++cx) {
      const auto cell = grid_cell(w, frame.height(), cx, cy);
      std::array<std::uint64_t, 5> counts{};
      for (int y = cell.y0; y + 1 < cell.y1; y += 2) {
        for (int x = cell.x0; x + 1 < cell.x1; x += 2) {
          const double a0 = at(x, y), a1 = at(x + 1, y), a2 = at(x, y + 1), a3 = at(x + 1, y + 1);
          const std::array<double, 5> response{
              std::abs(a0 - a1 + a2 - a3),          // horizontal change
              std::abs(a0 + a1 - a2 - a3),          // vertical change
              root2 * std::abs(a0 - a3),            // 45 degrees
              root2 * std::abs(a1 - a2),            // 135 degrees
              2.0 * std::abs(a0 - a1 - a2 + a3),    // non-directional
          };
          std::size_t best = 0;
          for (std::size_t k = 1; k < response.size(); ++k) {
            if (response[k] > response[best]) best = k;
          }
          if (response[best] >= kEdgeActivityThreshold) ++counts[best];
        }
      }
      std::uint64_t total = 0;
      for (auto c : counts) total += c;
      if (total == 0) continue;
      const auto base = static_cast<std::size_t>(cy * 4 + cx) * 5;
      for (std::size_t k = 0; k < 5; ++k) out.values[base + k] = static_cast<double>(counts[k]) / static_cast<double>(total);
    }
  }
  return out;
}

// --- motion ------------------------------------------------------------------

FeatureVector motion_descriptor(std::span<const Frame> frames) {
  if (frames.empty()) fail(ErrorCode::EmptyInput, "motion needs at least one frame");
  const int w = frames.front().width();
  const int h = frames.front().height();
  for (const auto& f : frames) {
    if (f.width() != w || f.height() != h) fail(ErrorCode::DimensionMismatch, "motion frames differ in size");
  }
  FeatureVector out{FeatureKind::Motion, std::vector<double>(kMotionDims, 0.0)};
  if (frames.size() < 2) return out;

  auto prev = luma_plane(frames[0]);
  for (std::size_t t = 1; t < frames.size(); ++t) {
    auto cur = luma_plane(frames[t]);
    for (int cy = 0; cy < 4; ++cy) {
      for (int cx = 0; cx < 4; ++cx) {
        const auto cell = grid_cell(w, h, cx, cy);
        const auto area = static_cast<double>(cell.x1 - cell.x0) * (cell.y1 - cell.y0);
        if (area == 0.0) continue;
        double sum = 0.0;
        for (int y = cell.y0; y < cell.y1; ++y) {
          for (int x = cell.x0; x < cell.x1; ++x) {
            const auto i = static_cast<std::size_t>(y) * w + x;
            sum += std::abs(cur[i] - prev[i]);
          }
        }
        out.values[static_cast<std::size_t>(cy * 4 + cx)] += sum / area;
      }
    }
    prev = std::move(cur);
  }
  const double pairs = static_cast<double>(frames.size() - 1);
  for (auto& v : out.values) v = v / pairs / 255.0;
  return out;
}

// --- concept scores ------------------------------------------------------------

namespace {

std::string trim(std::string s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t");
  return s.substr(b, e - b + 1);
}

std::string lower(std::string s) {
  for (auto& c : s) {
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  }
  return s;
}

}  // namespace

std::vector<ConceptDetection> load_concept_scores(const std::filesystem::path& path, const CatalogSnapshot& snapshot) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::Io, "cannot open concept score file '" + path.string() + "'");

  std::vector<ConceptDetection> out;
  std::set<std::tuple<std::string, std::uint64_t, std::string, std::string>> seen;
  std::string line;
  std::size_t lineNo = 0;
  while (std::getline(in, line)) {
    ++lineNo;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto where = path.string() + ":" + std::to_string(lineNo) + ": ";
    if (lineNo == 1) {
      if (line.rfind("\xEF\xBB\xBF", 0) == 0) line.erase(0, 3);
      if (line != kConceptCsvHeader) fail(ErrorCode::Parse, where + "expected header '" + kConceptCsvHeader + "'");
      continue;
    }
    if (trim(line).empty()) continue;

    std::vector<std::string> cols;
    std::size_t start = 0;
    for (;;) {
      const auto comma = line.find(',', start);
      cols.push_back(trim(line.substr(start, comma == std::string::npos ? std::string::npos : comma - start)));
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
    if (cols.size() != 5) fail(ErrorCode::Parse, where + "expected 5 columns, got " + std::to_string(cols.size()));

    const auto& videoId = cols[0];
    const auto* video = snapshot.find_video(videoId);
    if (!video) fail(ErrorCode::UnknownVideo, where + "unknown video '" + videoId + "'");

    const auto& tText = cols[1];
    if (tText.empty() || tText.size() > 18 || !std::all_of(tText.begin(), tText.end(), [](char c) { return c >= '0' && c <= '9'; })) {
      fail(ErrorCode::Parse, where + "tSec must be a non-negative integer, got '" + tText + "'");
    }
    const auto tSec = std::stoull(tText);
    if (tSec >= video->samples.size()) {
      fail(ErrorCode::OrdinalOutOfRange, where + "tSec " + tText + " is not a sample second of '" + videoId + "'");
    }

    if (cols[2].empty()) fail(ErrorCode::Parse, where + "empty source");
    auto conceptId = lower(cols[3]);
    if (conceptId.empty()) fail(ErrorCode::Parse, where + "empty conceptId");

    char* end = nullptr;
    const double score = std::strtod(cols[4].c_str(), &end);
    if (cols[4].empty() || end != cols[4].c_str() + cols[4].size() || !std::isfinite(score)) {
      fail(ErrorCode::Parse, where + "score is not a number: '" + cols[4] + "'");
    }
    if (score < 0.0 || score > 1.0) fail(ErrorCode::Validation, where + "score " + cols[4] + " outside [0,1]");

    if (!seen.emplace(videoId, tSec, cols[2], conceptId).second) {
      fail(ErrorCode::Validation, where + "duplicate detection for " + videoId + "@" + tText + " " + cols[2] + "/" + conceptId);
    }
    out.push_back(ConceptDetection{ItemKey::frame(videoId, tSec), cols[2], std::move(conceptId), score});
  }
  if (lineNo == 0) fail(ErrorCode::Parse, path.string() + ": empty file, expected header '" + kConceptCsvHeader + "'");
  return out;
}

Vocabulary vocabulary_of(std::span<const ConceptDetection> detections) {
  std::map<std::string, std::set<std::string>> sets;
  for (const auto& d : detections) sets[d.source].insert(d.conceptId);
  Vocabulary out;
  for (auto& [source, set] : sets) out[source] = std::vector<std::string>(set.begin(), set.end());
  return out;
}

std::size_t concept_dims(const Vocabulary& vocab) {
  std::size_t n = 0;
  for (const auto& [_, list] : vocab) n += list.size();
  return n;
}

FeatureVector concept_vector(const Vocabulary& vocab, std::span<const ConceptDetection> itemDetections) {
  FeatureVector out{FeatureKind::Concept, std::vector<double>(concept_dims(vocab), 0.0)};
  for (const auto& d : itemDetections) {
    std::size_t offset = 0;
    for (const auto& [source, list] : vocab) {
      if (source == d.source) {
        auto it = std::lower_bound(list.begin(), list.end(), d.conceptId);
        if (it != list.end() && *it == d.conceptId) {
          auto& slot = out.values[offset + static_cast<std::size_t>(it - list.begin())];
          slot = std::max(slot, d.score);
        }
        break;
      }
      offset += list.size();
    }
  }
  return out;
}

ShotConcepts aggregate_shot_concepts(std::span<const ConceptDetection> frameDetections, const CatalogSnapshot& snapshot,
                                     const Vocabulary& vocab) {
  // (video index, shot index, source, concept) -> max score
  std::map<std::tuple<std::size_t, std::size_t, std::string, std::string>, double> best;
  std::unordered_map<std::string, std::size_t> videoPos;
  for (std::size_t i = 0; i < snapshot.videos().size(); ++i) videoPos.emplace(snapshot.videos()[i].record.videoId, i);

  for (const auto& d : frameDetections) {
    if (d.item.granularity != Granularity::Frame) continue;
    const auto resolved = snapshot.resolve(d.item);
    const auto shot = resolved.video->shot_containing(resolved.sample->frameIndex);
    auto [it, inserted] = best.try_emplace({videoPos.at(d.item.videoId), shot, d.source, d.conceptId}, d.score);
    if (!inserted) it->second = std::max(it->second, d.score);
  }

  ShotConcepts out;
  std::map<std::pair<std::size_t, std::size_t>, std::vector<ConceptDetection>> perShot;
  for (const auto& [key, score] : best) {
    const auto& [vi, si, source, conceptId] = key;
    ConceptDetection d{ItemKey::shot(snapshot.videos()[vi].record.videoId, si), source, conceptId, score};
    perShot[{vi, si}].push_back(d);
    out.detections.push_back(std::move(d));
  }
  for (std::size_t vi = 0; vi < snapshot.videos().size(); ++vi) {
    const auto& video = snapshot.videos()[vi];
    for (std::size_t si = 0; si < video.shots.size(); ++si) {
      auto it = perShot.find({vi, si});
      std::span<const ConceptDetection> dets;
      if (it != perShot.end()) dets = it->second;
      auto key = ItemKey::shot(video.record.videoId, si);
      auto keyStr = key.str();
      out.vectors.push_back(FeatureEntry{std::move(key), std::move(keyStr), concept_vector(vocab, dets)});
    }
  }
  return out;
}

}  // namespace divex
