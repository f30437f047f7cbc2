#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "divex/catalog.hpp"
#include "divex/feature_vector.hpp"
#include "divex/item_key.hpp"

namespace divex {

enum class Metric { CosineDistance, L1, L2 };

std::string_view to_string(Metric metric);

/// A feature kind with its fixed metric: concept->cosine, color/texture->L1,
/// motion->L2.
struct Measure {
  FeatureKind kind = FeatureKind::Concept;
  Metric metric = Metric::CosineDistance;

  static Measure of(FeatureKind kind);
  friend bool operator==(const Measure&, const Measure&) = default;
};

/// Throws Error(KindMismatch) or Error(DimensionMismatch).
double distance(const FeatureVector& a, const FeatureVector& b, const Measure& m);
double distance(std::span<const double> a, std::span<const double> b, Metric metric);

struct RankedHit {
  ItemKey item;
  std::string key;
  double score = 0.0;
};

/// Candidate filter for restricted searches; empty means "everything".
using ItemPredicate = std::function<bool(const ItemKey&)>;

/// Exact nearest neighbours of `query` among all items of `granularity` that
/// carry a `m.kind` feature, excluding the query itself. Ascending distance,
/// ties by canonical key.
std::vector<RankedHit> knn(const CatalogSnapshot& snapshot, const ItemKey& query, const Measure& m,
                           Granularity granularity, std::size_t k, const ItemPredicate& restrict = {});

struct ConceptQuery {
  std::vector<std::string> tokens;
  std::optional<std::string> source;
  double threshold = 0.0;
  Granularity granularity = Granularity::Shot;
  std::size_t k = 100;
};

struct ConceptQueryResult {
  std::vector<RankedHit> hits;
  /// Tokens that no consulted vocabulary contains. Non-empty means the query
  /// was not evaluated; distinguishes typos from zero hits. Always empty
  /// over an empty index.
  std::vector<std::string> unknownTokens;
};

/// AND over tokens: an item qualifies when every token has a detection with
/// score >= max(threshold, 0); its score is the sum of the per-token best
/// scores. Descending score, ties by canonical key. Tokens are lower-cased
/// and de-duplicated. Throws Error(UnknownSource) for an unknown source and
/// Error(InvalidArgument) when no token is given.
ConceptQueryResult concept_query(const ConceptIndex& index, const ConceptQuery& query);

/// Case-insensitive substring match over title and description; video ids
/// ascending, at most k.
std::vector<std::string> metadata_query(const CatalogSnapshot& snapshot, std::string_view text, std::size_t k);

/// Lower-cases ASCII letters.
std::string ascii_lower(std::string_view text);

}  // namespace divex
