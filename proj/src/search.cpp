#include "divex/search.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

#include "divex/error.hpp"

namespace divex {

std::string_view to_string(Metric metric) {
  switch (metric) {
    case Metric::CosineDistance: return "cosineDistance";
    case Metric::L1: return "l1";
    case Metric::L2: return "l2";
  }
  return "l2";
}

Measure Measure::of(FeatureKind kind) {
  switch (kind) {
    case FeatureKind::Concept: return {kind, Metric::CosineDistance};
    case FeatureKind::Color:
    case FeatureKind::Texture: return {kind, Metric::L1};
    case FeatureKind::Motion: return {kind, Metric::L2};
  }
  return {kind, Metric::L2};
}

double distance(std::span<const double> a, std::span<const double> b, Metric metric) {
  if (a.size() != b.size()) {
    fail(ErrorCode::DimensionMismatch,
         "vector dimensions differ (" + std::to_string(a.size()) + " vs " + std::to_string(b.size()) + ")");
  }
  switch (metric) {
    case Metric::L1: {
      double s = 0.0;
      for (std::size_t i = 0; i < a.size(); ++i) s += std::abs(a[i] - b[i]);
      return s;
    }
    case Metric::L2: {
      double s = 0.0;
      for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        s += d * d;
      }
      return std::sqrt(s);
    }
    case Metric::CosineDistance: {
      if (std::equal(a.begin(), a.end(), b.begin())) return 0.0;
      double dot = 0.0, na = 0.0, nb = 0.0;
      for (std::size_t i = 0; i < a.size(); ++i) {
        dot += a[i] * b[i];
        na += a[i] * a[i];
        nb += b[i] * b[i];
      }
      if (na == 0.0 && nb == 0.0) return 0.0;
      if (na == 0.0 || nb == 0.0) return 1.0;
      return std::max(0.0, 1.0 - dot / (std::sqrt(na) * std::sqrt(nb)));
    }
  }
  return 0.0;
}

double distance(const FeatureVector& a, const FeatureVector& b, const Measure& m) {
  if (a.kind != m.kind || b.kind != m.kind) {
    fail(ErrorCode::KindMismatch, "vector kinds (" + std::string(to_string(a.kind)) + ", " + std::string(to_string(b.kind)) +
                                      ") do not match measure " + std::string(to_string(m.kind)));
  }
  return distance(a.values, b.values, m.metric);
}

namespace {

bool ascending(const RankedHit& a, const RankedHit& b) {
  if (a.score != b.score) return a.score < b.score;
  return a.key < b.key;
}

bool descending(const RankedHit& a, const RankedHit& b) {
  if (a.score != b.score) return a.score > b.score;
  return a.key < b.key;
}

template <typename Cmp>
void top_k(std::vector<RankedHit>& hits, std::size_t k, Cmp cmp) {
  if (k < hits.size()) {
    std::partial_sort(hits.begin(), hits.begin() + static_cast<std::ptrdiff_t>(k), hits.end(), cmp);
    hits.resize(k);
  } else {
    std::sort(hits.begin(), hits.end(), cmp);
  }
}

}  // namespace

std::vector<RankedHit> knn(const CatalogSnapshot& snapshot, const ItemKey& query, const Measure& m,
                           Granularity granularity, std::size_t k, const ItemPredicate& restrict) {
  if (k == 0) fail(ErrorCode::InvalidArgument, "k must be positive");
  if (Measure::of(m.kind) != m) fail(ErrorCode::InvalidArgument, "measure pairs " + std::string(to_string(m.kind)) +
                                                                      " with the wrong metric");
  snapshot.resolve(query);
  const auto* q = snapshot.feature(query, m.kind);
  if (!q) fail(ErrorCode::MissingFeature, "'" + query.str() + "' has no " + std::string(to_string(m.kind)) + " feature");

  const auto queryKey = query.str();
  std::vector<RankedHit> hits;
  for (const auto& entry : snapshot.features(granularity, m.kind)) {
    if (entry.key == queryKey) continue;
    if (restrict && !restrict(entry.item)) continue;
    hits.push_back(RankedHit{entry.item, entry.key, distance(q->values, entry.vector.values, m.metric)});
  }
  top_k(hits, k, ascending);
  return hits;
}

std::string ascii_lower(std::string_view text) {
  std::string out(text);
  for (auto& c : out) {
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  }
  return out;
}

ConceptQueryResult concept_query(const ConceptIndex& index, const ConceptQuery& query) {
  if (query.k == 0) fail(ErrorCode::InvalidArgument, "k must be positive");
  if (!(query.threshold >= 0.0 && query.threshold <= 1.0)) fail(ErrorCode::InvalidArgument, "threshold must lie in [0,1]");

  std::vector<std::string> tokens;
  for (const auto& raw : query.tokens) {
    auto t = ascii_lower(raw);
    const auto b = t.find_first_not_of(" \t");
    if (b == std::string::npos) continue;
    t = t.substr(b, t.find_last_not_of(" \t") - b + 1);
    if (std::find(tokens.begin(), tokens.end(), t) == tokens.end()) tokens.push_back(std::move(t));
  }
  if (tokens.empty()) fail(ErrorCode::InvalidArgument, "at least one concept token is required");
  if (index.empty()) return {};
  if (query.source && !index.has_source(*query.source)) fail(ErrorCode::UnknownSource, "unknown source '" + *query.source + "'");

  ConceptQueryResult result;
  std::vector<std::string> sources = query.source ? std::vector<std::string>{*query.source} : index.sources();
  for (const auto& t : tokens) {
    const bool known = std::any_of(sources.begin(), sources.end(), [&](const auto& s) { return index.knows(s, t); });
    if (!known) result.unknownTokens.push_back(t);
  }
  if (!result.unknownTokens.empty()) return result;

  const double minScore = std::max(query.threshold, 0.0);
  struct Acc {
    const Posting* posting;
    double sum;
  };
  std::unordered_map<std::string, Acc> acc;

  for (std::size_t ti = 0; ti < tokens.size(); ++ti) {
    // best qualifying score per item for this token
    std::unordered_map<std::string, std::pair<const Posting*, double>> best;
    for (const auto& source : sources) {
      const auto* list = index.postings(source, tokens[ti]);
      if (!list) continue;
      for (const auto& p : *list) {
        if (p.score < minScore) break;  // lists are score-descending
        if (p.item.granularity != query.granularity) continue;
        auto [it, inserted] = best.try_emplace(p.key, &p, p.score);
        if (!inserted && p.score > it->second.second) it->second.second = p.score;
      }
    }
    if (ti == 0) {
      for (const auto& [key, pb] : best) acc.emplace(key, Acc{pb.first, pb.second});
    } else {
      for (auto it = acc.begin(); it != acc.end();) {
        auto found = best.find(it->first);
        if (found == best.end()) {
          it = acc.erase(it);
        } else {
          it->second.sum += found->second.second;
          ++it;
        }
      }
    }
    if (acc.empty()) break;
  }

  result.hits.reserve(acc.size());
  for (const auto& [key, a] : acc) result.hits.push_back(RankedHit{a.posting->item, key, a.sum});
  top_k(result.hits, query.k, descending);
  return result;
}

std::vector<std::string> metadata_query(const CatalogSnapshot& snapshot, std::string_view text, std::size_t k) {
  if (text.empty()) fail(ErrorCode::InvalidArgument, "metadata query text must be non-empty");
  if (k == 0) fail(ErrorCode::InvalidArgument, "k must be positive");
  const auto needle = ascii_lower(text);
  std::vector<std::string> out;
  for (const auto& v : snapshot.videos()) {
    if (ascii_lower(v.record.title).find(needle) != std::string::npos ||
        ascii_lower(v.record.description).find(needle) != std::string::npos) {
      out.push_back(v.record.videoId);
    }
  }
  std::sort(out.begin(), out.end());
  if (out.size() > k) out.resize(k);
  return out;
}

}  // namespace divex
