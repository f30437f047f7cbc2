#pragma once

#include <map>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "divex/item_key.hpp"

namespace divex {

/// One detector output: `source` recognised `conceptId` in `item` with `score`.
struct ConceptDetection {
  ItemKey item;
  std::string source;
  std::string conceptId;
  double score = 0.0;
};

struct Posting {
  ItemKey item;
  std::string key;  // canonical form of `item`, cached for tie-breaks
  double score = 0.0;
};

/// Inverted index (source, concept) -> postings sorted by score descending,
/// then canonical key ascending. Shot and frame items share one list.
class ConceptIndex {
 public:
  using TermKey = std::pair<std::string, std::string>;  // (source, conceptId)

  ConceptIndex() = default;

  /// Duplicate (source, concept, item) triples collapse to their maximum score.
  static ConceptIndex build(std::span<const ConceptDetection> detections);

  const std::vector<Posting>* postings(const std::string& source, const std::string& conceptId) const;

  /// Sorted source names.
  std::vector<std::string> sources() const;
  bool has_source(const std::string& source) const { return vocab_.count(source) != 0; }
  /// Lexicographically ordered vocabulary of one source; empty when unknown.
  const std::set<std::string>& vocabulary(const std::string& source) const;
  bool knows(const std::string& source, const std::string& conceptId) const;
  bool knows_anywhere(const std::string& conceptId) const;

  const std::map<TermKey, std::vector<Posting>>& terms() const { return terms_; }
  bool empty() const { return terms_.empty(); }

  /// Re-expands the postings into detections, (source, concept) order.
  std::vector<ConceptDetection> detections() const;

 private:
  std::map<TermKey, std::vector<Posting>> terms_;
  std::map<std::string, std::set<std::string>> vocab_;
};

}  // namespace divex
