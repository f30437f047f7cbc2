#include "divex/concept_index.hpp"

#include <algorithm>
#include <unordered_map>

namespace divex {

ConceptIndex ConceptIndex::build(std::span<const ConceptDetection> detections) {
  ConceptIndex index;
  // (source, concept) -> canonical key -> best posting
  std::map<TermKey, std::unordered_map<std::string, Posting>> grouped;
  for (const auto& d : detections) {
    auto& bucket = grouped[{d.source, d.conceptId}];
    auto key = d.item.str();
    auto it = bucket.find(key);
    if (it == bucket.end()) {
      bucket.emplace(key, Posting{d.item, key, d.score});
    } else if (d.score > it->second.score) {
      it->second.score = d.score;
    }
    index.vocab_[d.source].insert(d.conceptId);
  }
  for (auto& [term, bucket] : grouped) {
    std::vector<Posting> list;
    list.reserve(bucket.size());
    for (auto& [key, posting] : bucket) list.push_back(std::move(posting));
    std::sort(list.begin(), list.end(), [](const Posting& a, const Posting& b) {
      if (a.score != b.score) return a.score > b.score;
      return a.key < b.key;
    });
    index.terms_.emplace(term, std::move(list));
  }
  return index;
}

const std::vector<Posting>* ConceptIndex::postings(const std::string& source, const std::string& conceptId) const {
  auto it = terms_.find({source, conceptId});
  return it == terms_.end() ? nullptr : &it->second;
}

std::vector<std::string> ConceptIndex::sources() const {
  std::vector<std::string> out;
  out.reserve(vocab_.size());
  for (const auto& [source, _] : vocab_) out.push_back(source);
  return out;
}

const std::set<std::string>& ConceptIndex::vocabulary(const std::string& source) const {
  static const std::set<std::string> none;
  auto it = vocab_.find(source);
  return it == vocab_.end() ? none : it->second;
}

bool ConceptIndex::knows(const std::string& source, const std::string& conceptId) const {
  return vocabulary(source).count(conceptId) != 0;
}

bool ConceptIndex::knows_anywhere(const std::string& conceptId) const {
  return std::any_of(vocab_.begin(), vocab_.end(), [&](const auto& kv) { return kv.second.count(conceptId) != 0; });
}

std::vector<ConceptDetection> ConceptIndex::detections() const {
  std::vector<ConceptDetection> out;
  for (const auto& [term, list] : terms_) {
    for (const auto& p : list) out.push_back(ConceptDetection{p.item, term.first, term.second, p.score});
  }
  return out;
}

}  // namespace divex
