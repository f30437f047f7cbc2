#pragma once

#include <array>
#include <cstddef>
#include <string_view>
#include <vector>

namespace divex {

enum class FeatureKind { Concept, Color, Texture, Motion };

inline constexpr std::array<FeatureKind, 4> kAllFeatureKinds{
    FeatureKind::Concept, FeatureKind::Color, FeatureKind::Texture, FeatureKind::Motion};

inline constexpr std::size_t kColorDims = 128;
inline constexpr std::size_t kTextureDims = 80;
inline constexpr std::size_t kMotionDims = 16;

std::string_view to_string(FeatureKind kind);
FeatureKind parse_feature_kind(std::string_view text);

struct FeatureVector {
  FeatureKind kind = FeatureKind::Concept;
  std::vector<double> values;

  std::size_t dims() const { return values.size(); }
  friend bool operator==(const FeatureVector&, const FeatureVector&) = default;
};

// Checks the per-kind range invariants (dimension, non-negativity, colour
// normalisation, texture block normalisation, concept range). Throws
// Error(Validation) naming the first violation.
void validate(const FeatureVector& v);

}  // namespace divex
