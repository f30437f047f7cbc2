#include "divex/item_key.hpp"

#include <charconv>

#include "divex/error.hpp"

namespace divex {

std::string_view to_string(Granularity g) { return g == Granularity::Shot ? "shot" : "frame"; }

Granularity parse_granularity(std::string_view text) {
  if (text == "shot") return Granularity::Shot;
  if (text == "frame") return Granularity::Frame;
  fail(ErrorCode::InvalidArgument, "granularity must be 'shot' or 'frame', got '" + std::string(text) + "'");
}

std::string ItemKey::str() const {
  std::string out;
  out.reserve(videoId.size() + 24);
  out += "v:";
  out += videoId;
  out += granularity == Granularity::Shot ? "/s:" : "/f:";
  out += std::to_string(ordinal);
  return out;
}

ItemKey ItemKey::parse(std::string_view text) {
  auto bad = [&](const char* why) {
    fail(ErrorCode::InvalidItemKey, "malformed item key '" + std::string(text) + "': " + why);
  };
  if (text.substr(0, 2) != "v:") bad("expected 'v:' prefix");

  const auto s = text.rfind("/s:");
  const auto f = text.rfind("/f:");
  std::size_t sep = std::string_view::npos;
  Granularity g = Granularity::Shot;
  if (s != std::string_view::npos && (f == std::string_view::npos || s > f)) {
    sep = s;
  } else if (f != std::string_view::npos) {
    sep = f;
    g = Granularity::Frame;
  }
  if (sep == std::string_view::npos) bad("expected '/s:' or '/f:'");
  if (sep <= 2) bad("empty video id");

  const auto digits = text.substr(sep + 3);
  if (digits.empty()) bad("missing ordinal");
  if (digits.size() > 1 && digits.front() == '0') bad("leading zero in ordinal");
  std::uint64_t ordinal = 0;
  const auto* end = digits.data() + digits.size();
  auto [ptr, ec] = std::from_chars(digits.data(), end, ordinal);
  if (ec != std::errc{} || ptr != end) bad("ordinal is not a non-negative integer");

  return ItemKey{g, std::string(text.substr(2, sep - 2)), ordinal};
}

}  // namespace divex
