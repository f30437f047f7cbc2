#pragma once

#include <compare>
#include <cstdint>
#include <string>
#include <string_view>

namespace divex {

enum class Granularity { Shot, Frame };

std::string_view to_string(Granularity g);
Granularity parse_granularity(std::string_view text);

/// Addresses a retrievable unit: a shot (ordinal = shot index) or a
/// one-second frame sample (ordinal = second).
///
/// Canonical text form is `v:{videoId}/s:{ordinal}` or `v:{videoId}/f:{ordinal}`.
/// The video id may itself contain '/', the granularity marker is taken from
/// the last `/s:` or `/f:` separator.
struct ItemKey {
  Granularity granularity = Granularity::Shot;
  std::string videoId;
  std::uint64_t ordinal = 0;

  static ItemKey shot(std::string videoId, std::uint64_t index) {
    return {Granularity::Shot, std::move(videoId), index};
  }
  static ItemKey frame(std::string videoId, std::uint64_t tSec) {
    return {Granularity::Frame, std::move(videoId), tSec};
  }

  std::string str() const;
  static ItemKey parse(std::string_view text);

  friend bool operator==(const ItemKey&, const ItemKey&) = default;
};

// Tie-break order used by every ranked list: canonical string ascending.
inline bool canonical_less(const ItemKey& a, const ItemKey& b) { return a.str() < b.str(); }

}  // namespace divex
